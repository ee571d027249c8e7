// Command-line front end: validate parameter sets, run flows, fit rates,
// sweep parameter grids, and falsify operator regularity claims. Artifacts
// are CSV series plus JSON summaries for offline plotting.

#include "triflow/triflow.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using triflow::Error;
using triflow::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitDomainFailure = 1;
constexpr int kExitUsage = 2;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) triflow::fail(Error::Kind::parameter, "cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) triflow::fail(Error::Kind::parameter, "cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Priority: --output-dir flag, config field, TRIFLOW_OUTPUT_DIR, cwd.
fs::path resolve_output_dir(const std::string& flag_value, const json& cfg) {
  if (!flag_value.empty()) return flag_value;
  if (cfg.is_object() && cfg.contains("output_dir")) return cfg.at("output_dir").get<std::string>();
  if (const char* env = std::getenv("TRIFLOW_OUTPUT_DIR")) return env;
  return ".";
}

void write_file(const fs::path& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  std::ofstream(dir / name) << content;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case Error::Kind::parameter:
    case Error::Kind::capability:
    case Error::Kind::precondition:
      return kExitUsage;
    default:
      return kExitDomainFailure;
  }
}

int cmd_validate(const std::string& config_path, const std::string& outdir_flag) {
  const json cfg = read_json_file(config_path);
  const triflow::ValidationReport rep = triflow::validate_from_json(cfg);
  std::cout << triflow::report_to_table(rep);
  write_file(resolve_output_dir(outdir_flag, cfg), "report.json",
             triflow::report_to_json(rep).dump(2) + "\n");
  return rep.pass() ? kExitPass : kExitDomainFailure;
}

int cmd_run(const std::string& config_path, const std::string& outdir_flag, bool force,
            std::optional<std::uint64_t> seed) {
  json cfg = read_json_file(config_path);
  if (seed) cfg["seed"] = *seed;
  const triflow::RunArtifacts art = triflow::run_once(cfg, force);
  const fs::path outdir = resolve_output_dir(outdir_flag, cfg);
  if (art.refused) {
    std::cout << "validation failed; refusing to run (use --force to override)\n"
              << triflow::report_to_table(art.validation);
    write_file(outdir, "summary.json", art.summary.dump(2) + "\n");
    return kExitDomainFailure;
  }
  triflow::write_run_artifacts(art, outdir);
  std::cout << "termination: " << art.summary["termination"].get<std::string>()
            << "  final_residual: " << art.summary["final_residual"].get<double>() << "\n";
  if (art.summary.contains("rates"))
    for (const auto& [name, est] : art.summary["rates"].items())
      std::cout << "rate[" << name << "]: s = " << est["s"].get<double>() << "\n";
  std::cout << "artifacts in " << outdir.string() << "\n";
  return kExitPass;
}

int cmd_rate(const std::string& csv_path, const std::string& column, const std::string& model,
             std::vector<double> window, bool clip, const std::string& outdir_flag) {
  triflow::TimeSeries series = triflow::csv_column(read_text_file(csv_path), column);
  int clipped = 0;
  if (clip) {
    for (auto& v : series.value)
      if (v < 1e-16) {
        v = 1e-16;
        ++clipped;
      }
  }
  double lo = window.size() == 2 ? window[0] : series.t.front();
  double hi = window.size() == 2 ? window[1] : series.t.back();
  triflow::RateEstimate est;
  try {
    est = triflow::fit_rate(series,
                            model == "exponential" ? triflow::RateModel::exponential
                                                   : triflow::RateModel::power,
                            lo, hi);
  } catch (const Error& e) {
    if (std::string(e.what()).find("nonpositive") != std::string::npos) {
      std::cerr << "error: " << e.what() << " (hint: rerun with --clip)\n";
      return kExitDomainFailure;
    }
    throw;
  }
  json out = triflow::rate_to_json(est);
  if (clipped > 0) out["clipped_points"] = clipped;
  std::cout << out.dump(2) << "\n";
  write_file(resolve_output_dir(outdir_flag, json::object()), "rate.json", out.dump(2) + "\n");
  return kExitPass;
}

int cmd_sweep(const std::string& config_path, const std::string& outdir_flag, bool force,
              int threads) {
  const json cfg = read_json_file(config_path);
  const fs::path outdir = resolve_output_dir(outdir_flag, cfg);
  const auto cells = triflow::sweep(cfg, outdir, force, 10000, threads);
  write_file(outdir, "results.csv", triflow::sweep_results_csv(cells));
  std::size_t ok = 0;
  for (const auto& c : cells) ok += c.ok ? 1 : 0;
  std::cout << "sweep: " << ok << "/" << cells.size() << " cells ran; results in "
            << (outdir / "results.csv").string() << "\n";
  return kExitPass;
}

int cmd_check_operator(const std::string& problem_path, const std::string& property,
                       double constant, int samples, std::uint64_t seed, double tolerance,
                       const std::string& outdir_flag) {
  const triflow::ProblemInstance inst = triflow::problem_from_json(read_json_file(problem_path));
  triflow::OperatorProperty prop;
  if (property == "lipschitz") prop = triflow::OperatorProperty::lipschitz;
  else if (property == "cocoercive") prop = triflow::OperatorProperty::cocoercive;
  else if (property == "quasi_cocoercive") prop = triflow::OperatorProperty::quasi_cocoercive;
  else if (property == "strongly_monotone_wrt_zero")
    prop = triflow::OperatorProperty::strongly_monotone_wrt_zero;
  else
    triflow::fail(Error::Kind::capability, "unknown property: " + property);

  triflow::SampleBox box;
  box.seed = seed;
  const triflow::Certificate cert =
      triflow::certify_property(inst.op, prop, constant, inst.dimension, samples, box);
  const json out = triflow::certificate_to_json(cert);
  std::cout << out.dump(2) << "\n";
  write_file(resolve_output_dir(outdir_flag, json::object()), "certificate.json",
             out.dump(2) + "\n");
  return cert.max_violation <= tolerance ? kExitPass : kExitDomainFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"third-order dynamical systems for zeros of generalized monotone operators"};
  app.require_subcommand(1);

  std::string output_dir;
  bool force = false;
  std::optional<std::uint64_t> seed;
  app.add_option("--output-dir", output_dir,
                 "directory for artifacts (falls back to TRIFLOW_OUTPUT_DIR)");
  app.add_flag("--force", force, "run even when parameter validation fails");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "override the config seed");

  std::string config_path, csv_path, column = "residual", model = "power";
  std::string property = "lipschitz", problem_path;
  std::vector<double> window;
  bool clip = false;
  double constant = 1.0, tolerance = 1e-9;
  int samples = 10000, threads = 0;

  auto* validate = app.add_subcommand("validate", "check a theorem's parameter inequalities");
  validate->fallthrough();
  validate->add_option("config", config_path, "JSON file {theorem, params}")->required();

  auto* run = app.add_subcommand("run", "validate, integrate, and emit diagnostics");
  run->fallthrough();
  run->add_option("config", config_path, "JSON run configuration")->required();

  auto* rate = app.add_subcommand("rate", "fit a decay rate to a CSV column");
  rate->fallthrough();
  rate->add_option("csv", csv_path, "trajectory or diagnostics CSV")->required();
  rate->add_option("--column", column, "column name");
  rate->add_option("--model", model, "power | exponential")
      ->check(CLI::IsMember({"power", "exponential"}));
  rate->add_option("--window", window, "fit window t_lo t_hi")->expected(2);
  rate->add_flag("--clip", clip, "clip values at 1e-16 before fitting");

  auto* sweep = app.add_subcommand("sweep", "run a cartesian parameter grid");
  sweep->fallthrough();
  sweep->add_option("config", config_path, "JSON {base, grid}")->required();
  sweep->add_option("--threads", threads, "worker threads (default: hardware)");

  auto* check = app.add_subcommand("check-operator", "falsification-sample a regularity claim");
  check->fallthrough();
  check->add_option("problem", problem_path, "JSON problem instance")->required();
  check->add_option("--property", property,
                    "lipschitz | cocoercive | quasi_cocoercive | strongly_monotone_wrt_zero");
  check->add_option("--constant", constant, "claimed modulus / constant");
  check->add_option("--samples", samples, "number of random samples");
  check->add_option("--tolerance", tolerance, "violation tolerance for exit code");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitPass : kExitUsage;
  }
  if (*seed_opt) seed = seed_value;

  try {
    if (*validate) return cmd_validate(config_path, output_dir);
    if (*run) return cmd_run(config_path, output_dir, force, seed);
    if (*rate) return cmd_rate(csv_path, column, model, window, clip, output_dir);
    if (*sweep) return cmd_sweep(config_path, output_dir, force, threads);
    if (*check)
      return cmd_check_operator(problem_path, property, constant, samples, seed.value_or(20240523),
                                tolerance, output_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const json::exception& e) {
    std::cerr << "error: config parse: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomainFailure;
  }
  return kExitUsage;
}
