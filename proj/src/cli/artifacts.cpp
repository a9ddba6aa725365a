#include "ergo/cli/artifacts.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "ergo/core/errors.hpp"

namespace ergo::cli {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

namespace {

// JSON has no NaN/inf; those become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json optional_number(const std::optional<double>& x) { return x ? number(*x) : json(nullptr); }

}  // namespace

json to_json(const StatePoint& p) {
  json out = json::array();
  for (int i = 0; i < p.dim(); ++i) out.push_back(p[i]);
  return out;
}

json to_json(const EntropyEstimate& e) {
  json cells = json::array();
  for (const auto& c : e.cells) {
    json cell{{"r", c.r},         {"n", c.n},           {"raw", number(c.raw)},
              {"std_err", number(c.std_err)}, {"count", c.count}, {"resolved", c.resolved},
              {"returning", c.returning}};
    if (c.point >= 0) cell["point"] = c.point;
    cells.push_back(cell);
  }
  json fits = json::array();
  for (const auto& f : e.fits) {
    fits.push_back({{"r", f.r},
                    {"slope", number(f.slope)},
                    {"max_secant", number(f.max_secant)},
                    {"n_used", f.n_used},
                    {"wrapped", f.wrapped},
                    {"resolved", f.resolved}});
  }
  json out{{"method", std::string(to_string(e.method))},
           {"value", number(e.value)},
           {"resolved", e.resolved},
           {"r", e.r},
           {"n_range", {e.n_min, e.n_max}},
           {"delta", optional_number(e.delta)},
           {"window_y_max", optional_number(e.window_y_max)},
           {"sample_size", e.sample_size},
           {"fits", fits},
           {"cells", cells}};
  if (!e.panel_values.empty()) {
    json values = json::array();
    for (double v : e.panel_values) values.push_back(number(v));
    out["panel_values"] = values;
  }
  return out;
}

json to_json(const LyapunovSpectrum& s) {
  json exps = json::array();
  for (const auto& e : s.exponents) exps.push_back({{"value", e.value}, {"multiplicity", e.multiplicity}});
  return {{"exponents", exps},
          {"raw", s.raw},
          {"n_steps", s.n_steps},
          {"residual", s.residual},
          {"chi_plus", chi_plus(s)}};
}

json to_json(const GibbsDiagnostics& g) {
  json rows = json::array();
  for (const auto& row : g.rows) {
    rows.push_back({{"T", row.T},
                    {"log_ball_mass", number(row.log_ball_mass)},
                    {"birkhoff_sum", row.birkhoff_sum},
                    {"ratio", number(row.ratio)},
                    {"std_err", number(row.std_err)},
                    {"count", row.count},
                    {"resolved", row.resolved}});
  }
  return {{"v", to_json(g.v)},
          {"r", g.r},
          {"mode", std::string(to_string(g.mode))},
          {"rows", rows},
          {"excluded_T", g.excluded_T},
          {"ratio_spread", g.ratio_spread},
          {"slope", g.slope},
          {"log_c_max", g.log_c_max},
          {"passes", g.passes}};
}

json to_json(const RuelleReport& r) {
  json estimates = json::object();
  for (const auto& [method, est] : r.h_estimates) estimates[method] = to_json(est);
  return {{"system", r.system_id},
          {"measure", r.measure_id},
          {"h_estimates", estimates},
          {"chi_plus", r.chi_plus},
          {"best_method", r.best_method},
          {"h_best", r.h_best},
          {"h_max", r.h_max},
          {"slack", r.slack},
          {"pesin_gap", optional_number(r.pesin_gap)},
          {"potential_integral", r.potential_integral},
          {"pressure", r.pressure},
          {"ruelle_tol", r.ruelle_tol},
          {"ruelle_holds", r.ruelle_holds},
          {"complete", r.complete},
          {"unresolved", r.unresolved}};
}

std::string entropy_csv(const std::vector<EntropyEstimate>& estimates) {
  std::string out = "method,r,n,value,std_err,resolved,point\n";
  for (const auto& e : estimates) {
    const std::string method(to_string(e.method));
    for (const auto& c : e.cells) {
      out += fmt::format("{},{},{},{},{},{},{}\n", method, format_number(c.r), c.n, format_number(c.raw),
                         format_number(c.std_err), c.resolved && c.returning ? 1 : 0, c.point);
    }
  }
  return out;
}

std::string point_file(const SystemModel& sys, const std::vector<StatePoint>& points) {
  std::string out;
  const auto names = coordinate_names(sys);
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
  out += '\n';
  for (const auto& p : points) {
    for (int i = 0; i < p.dim(); ++i) {
      if (i) out += ',';
      out += format_number(p[i]);
    }
    out += '\n';
  }
  return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw Error("cannot write " + path.string());
  files_.emplace_back(name, sha256_hex(content));
}

void ArtifactWriter::write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

void ArtifactWriter::stage_time(const std::string& stage, double seconds) { timings_[stage] = seconds; }

void ArtifactWriter::write_manifest(const json& config) {
  json files = json::array();
  for (const auto& [name, hash] : files_) files.push_back({{"path", name}, {"sha256", hash}});
  const json manifest{{"config_hash", sha256_hex(config.dump())},
                      {"config", config},
                      {"versions", {{"ergo", kVersion}, {"json_schema", 1}, {"csv_schema", 1}}},
                      {"wall_clock_seconds", timings_},
                      {"files", files}};
  const auto path = dir_ / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  out << manifest.dump(2) << "\n";
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace ergo::cli
