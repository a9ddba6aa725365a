#include "ergo/entropy/sample_cloud.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ergo/core/errors.hpp"
#include "ergo/models/psl2.hpp"

namespace ergo {

namespace {

bool is_modular(const SystemModel& sys) { return sys.id() == "modular-geodesic"; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

std::vector<std::string> measure_ids(const SystemModel& sys) {
  if (is_modular(sys)) return {"liouville", "periodic-orbit"};
  return {"lebesgue"};
}

bool absolutely_continuous(std::string_view measure) {
  return measure == "lebesgue" || measure == "liouville";
}

SampleCloud sample_measure(const SystemModel& sys, std::string_view measure, long n,
                           std::uint64_t seed) {
  if (n < 1) throw DomainError("sample: n must be >= 1");
  SampleCloud cloud{sys.id(), std::string(measure), seed, {}};
  cloud.points.reserve(static_cast<std::size_t>(n));
  if (is_modular(sys) && measure == "liouville") {
    for (const auto& v : psl2::liouville_sample(n, seed)) cloud.points.push_back(psl2::to_state(v));
  } else if (is_modular(sys) && measure == "periodic-orbit") {
    for (const auto& v : psl2::periodic_orbit_sample(n)) cloud.points.push_back(psl2::to_state(v));
  } else if (!is_modular(sys) && measure == "lebesgue") {
    Rng rng(seed);
    for (long i = 0; i < n; ++i) {
      Vec c(sys.dim());
      for (int k = 0; k < sys.dim(); ++k) c[k] = rng.uniform();
      cloud.points.emplace_back(c);
    }
  } else {
    throw DomainError("measure '" + std::string(measure) + "' is not available for system '" + sys.id() + "'");
  }
  return cloud;
}

std::vector<std::string> coordinate_names(const SystemModel& sys) {
  if (is_modular(sys)) return {"x", "y", "theta"};
  if (sys.dim() == 1) return {"x"};
  return {"x", "y"};
}

SampleCloud load_point_file(const SystemModel& sys, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open point file " + path);
  SampleCloud cloud{sys.id(), "file:" + path, 0, {}};
  const auto names = coordinate_names(sys);
  std::string line;
  long line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (!header) {
      if (fields != names) throw DomainError(where + ": header does not match the coordinates of " + sys.id());
      header = true;
      continue;
    }
    if (fields.size() != names.size()) throw DomainError(where + ": expected " + std::to_string(names.size()) + " columns");
    Vec c(sys.dim());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const auto& f = fields[k];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), c[static_cast<int>(k)]);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw DomainError(where + ": not a number: '" + f + "'");
      }
    }
    StatePoint p(c);
    if (!p.finite() || !sys.in_domain(p)) throw DomainError(where + ": point outside the domain");
    cloud.points.push_back(p);
  }
  if (!header) throw DomainError(path + ": empty point file");
  return cloud;
}

}  // namespace ergo
