#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "ergo/cli/artifacts.hpp"
#include "ergo/cli/config.hpp"
#include "ergo/cli/pipeline.hpp"
#include "ergo/core/errors.hpp"
#include "ergo/models/registry.hpp"

using namespace ergo;
using namespace ergo::cli;

namespace {

// Seed for invocations given only flags (no config file and no --seed).
constexpr std::uint64_t kDefaultSeed = 1;

struct CommonFlags {
  std::string config_path;
  std::string system;
  std::string measure;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<long> cloud_size;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config_path, "YAML experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--system", f.system, "identity | doubling | cat | modular-geodesic");
  cmd->add_option("--measure", f.measure, "lebesgue | liouville | periodic-orbit | file:<path>");
  cmd->add_option("--seed", f.seed, "64-bit seed");
  cmd->add_option("-o,--out", f.out, "output directory");
  cmd->add_option("--cloud-size", f.cloud_size, "points in the sample cloud");
}

std::string default_measure(const std::string& system) {
  return system == "modular-geodesic" ? "liouville" : "lebesgue";
}

ExperimentConfig build_config(const CommonFlags& f) {
  ExperimentConfig c;
  if (!f.config_path.empty()) {
    c = load_config(f.config_path);
    if (!f.system.empty()) c.system = f.system;
    if (!f.measure.empty()) c.measure = f.measure;
    if (f.seed) c.seed = *f.seed;
  } else {
    if (f.system.empty()) throw ConfigError("either --config or --system is required");
    const auto ids = system_ids();
    if (std::find(ids.begin(), ids.end(), f.system) == ids.end()) {
      throw ConfigError("unknown system '" + f.system + "'");
    }
    c = default_config(f.system, f.measure.empty() ? default_measure(f.system) : f.measure);
    c.seed = f.seed.value_or(kDefaultSeed);
  }
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.cloud_size) c.cloud_size = *f.cloud_size;
  return c;
}

StatePoint parse_point(const std::string& text) {
  std::vector<double> coords;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      coords.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("--point: not a number: '" + item + "'");
    }
  }
  return StatePoint(Eigen::Map<const Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size())));
}

void print_summary(const Pipeline& p) {
  for (const auto& line : p.summary()) std::cout << line << '\n';
}

int finish(Pipeline& p, ArtifactWriter& out, bool resolved) {
  out.write_manifest(to_json(p.config()));
  print_summary(p);
  return resolved ? kOk : kUnresolved;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical entropy, Lyapunov and pressure experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonFlags flags;

  auto* sample = app.add_subcommand("sample", "Write a point file sampled from a measure");
  add_common(sample, flags);
  long sample_n = 1000;
  std::string sample_path;
  sample->add_option("-n", sample_n, "number of points")->check(CLI::PositiveNumber);
  sample->add_option("--file", sample_path, "point file path (default <out>/points.csv)");

  auto* lyap = app.add_subcommand("lyapunov", "QR Lyapunov spectrum at one point");
  add_common(lyap, flags);
  std::optional<long> steps;
  std::string point_text;
  lyap->add_option("--steps", steps, "QR steps")->check(CLI::PositiveNumber);
  lyap->add_option("--point", point_text, "comma-separated coordinates (default: sampled from the measure)");

  auto* ent = app.add_subcommand("entropy", "Katok, Brin-Katok and Riemannian-local estimates");
  add_common(ent, flags);
  std::vector<double> ent_r;
  std::optional<int> ent_n_max;
  std::optional<double> delta;
  ent->add_option("--r", ent_r, "radii for Katok and Brin-Katok, descending");
  ent->add_option("--n-max", ent_n_max, "largest n for Katok and Brin-Katok")->check(CLI::PositiveNumber);
  ent->add_option("--delta", delta, "Katok mass threshold in (0,1)");
  std::vector<std::string> methods;
  ent->add_option("--methods", methods, "subset of katok, brin-katok, riemannian-local")
      ->check(CLI::IsMember(method_names()));

  auto* gib = app.add_subcommand("gibbs", "Gibbs ratio diagnostics for the geometric potential");
  add_common(gib, flags);
  std::optional<double> gibbs_r;
  std::optional<int> T_max;
  std::string mode;
  gib->add_option("--r", gibbs_r, "ball radius");
  gib->add_option("--T-max", T_max, "largest T (T ranges over 0..T-max)")->check(CLI::NonNegativeNumber);
  gib->add_option("--mode", mode, "measure | volume | both");

  auto* rep = app.add_subcommand("report", "Entropy vs Lyapunov and pressure report");
  add_common(rep, flags);

  auto* run = app.add_subcommand("run", "Run the stages listed in a config file");
  add_common(run, flags);
  std::vector<std::string> stages;
  run->add_option("--stages", stages, "subset of lyapunov, entropy, gibbs, report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    ExperimentConfig config = build_config(flags);

    if (*sample) {
      validate(config);
      config.cloud_size = sample_n;
      const auto sys = make_system(config.system);
      const auto cloud = sample_measure(*sys, config.measure, sample_n, config.seed);
      if (sample_path.empty()) {
        ArtifactWriter out(config.output_dir);
        out.write("points.csv", point_file(*sys, cloud.points));
        out.write_manifest(to_json(config));
        std::cout << fmt::format("sample: {} points -> {}\n", sample_n, (out.dir() / "points.csv").string());
      } else {
        const std::filesystem::path path(sample_path);
        if (path.has_parent_path()) ArtifactWriter(path.parent_path());
        std::ofstream file(path, std::ios::binary);
        file << point_file(*sys, cloud.points);
        file.close();
        if (!file) throw Error("cannot write " + path.string());
        std::cout << fmt::format("sample: {} points -> {}\n", sample_n, path.string());
      }
      return kOk;
    }

    if (*lyap) {
      if (steps) config.lyapunov.steps = *steps;
      Pipeline p(config);
      ArtifactWriter out(config.output_dir);
      std::optional<StatePoint> x;
      if (!point_text.empty()) x = parse_point(point_text);
      const bool ok = p.lyapunov(out, x);
      return finish(p, out, ok);
    }

    if (*ent) {
      if (!ent_r.empty()) config.katok.r_list = config.brin_katok.r_list = ent_r;
      if (ent_n_max) {
        std::vector<int> n;
        for (int k = 1; k <= *ent_n_max; ++k) n.push_back(k);
        config.katok.n_list = config.brin_katok.n_list = n;
      }
      if (delta) config.katok.delta = *delta;
      if (!methods.empty()) config.methods = methods;
      Pipeline p(config);
      ArtifactWriter out(config.output_dir);
      const bool ok = p.entropy(out);
      return finish(p, out, ok);
    }

    if (*gib) {
      if (gibbs_r) config.gibbs.r = *gibbs_r;
      if (T_max) {
        config.gibbs.T_list.clear();
        for (int T = 0; T <= *T_max; ++T) config.gibbs.T_list.push_back(T);
      }
      if (!mode.empty()) config.gibbs.mode = mode;
      Pipeline p(config);
      ArtifactWriter out(config.output_dir);
      bool ok = false;
      try {
        ok = p.gibbs(out);
      } catch (const UnresolvedError& e) {
        std::cerr << "gibbs: unresolved: " << e.what() << '\n';
      }
      return finish(p, out, ok);
    }

    if (*rep) {
      Pipeline p(config);
      ArtifactWriter out(config.output_dir);
      bool ok = false;
      try {
        ok = p.report(out);
        std::ifstream in(out.dir() / "report.json");
        std::cout << in.rdbuf();
      } catch (const UnresolvedError& e) {
        std::cerr << "report: unresolved: " << e.what() << '\n';
      }
      out.write_manifest(to_json(p.config()));
      return ok ? kOk : kUnresolved;
    }

    if (*run) {
      if (flags.config_path.empty()) throw ConfigError("run: --config is required");
      Pipeline p(config);
      const int rc = p.run(stages.empty() ? config.stages : stages);
      print_summary(p);
      return rc;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
