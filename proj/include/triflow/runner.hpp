#pragma once

#include "triflow/diagnostics.hpp"
#include "triflow/integrator.hpp"
#include "triflow/io.hpp"
#include "triflow/problems.hpp"
#include "triflow/validation.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

namespace triflow {

struct RunArtifacts {
  ProblemInstance problem;
  Trajectory trajectory;
  ValidationReport validation;
  bool refused = false;  // validation failed and force was off; nothing was run
  json summary;
  std::string trajectory_csv;
  std::string diagnostics_csv;
};

namespace detail {

inline ProblemInstance load_problem(const json& cfg) {
  if (cfg.is_string()) {
    std::ifstream in(cfg.get<std::string>());
    require(in.good(), Error::Kind::parameter,
            "problem file not found: " + cfg.get<std::string>());
    json j;
    in >> j;
    return problem_from_json(j);
  }
  return problem_from_json(cfg);
}

inline TheoremId infer_theorem(const Schedule& schedule, const OperatorSpec& op) {
  if (const auto* poly = std::get_if<PolySchedule>(&schedule))
    return poly->xi2 > 0 ? TheoremId::opt_case1 : TheoremId::opt_case2;
  if (std::holds_alternative<ExpSchedule>(schedule)) return TheoremId::weak_exp_family;
  if (op.strong_monotonicity && (op.cocoercivity || op.lipschitz)) return TheoremId::exp_rate;
  return TheoremId::weak_constant;
}

/// Effective Lipschitz constant for the exponential-rate theorem: when both
/// rho and the quasi modulus kappa are declared, kappa = rho / L^2 pins L.
inline double effective_lipschitz(const OperatorSpec& op) {
  if (op.strong_monotonicity && op.cocoercivity)
    return std::sqrt(*op.strong_monotonicity / *op.cocoercivity);
  require(op.lipschitz.has_value(), Error::Kind::precondition,
          "operator declares no Lipschitz constant");
  return *op.lipschitz;
}

inline ValidationReport validate_for_run(TheoremId theorem, const Schedule& schedule,
                                         const OperatorSpec& op, const json& cfg) {
  switch (theorem) {
    case TheoremId::weak_constant: {
      const auto* s = std::get_if<ConstantSchedule>(&schedule);
      require(s != nullptr, Error::Kind::parameter,
              "weak_constant requires a constant schedule");
      require(op.cocoercivity.has_value(), Error::Kind::precondition,
              "weak_constant requires a declared quasi-cocoercivity modulus");
      return validate_weak_constant(s->q0, s->q1, s->q2, *op.cocoercivity);
    }
    case TheoremId::weak_exp_family: {
      const auto* s = std::get_if<ExpSchedule>(&schedule);
      require(s != nullptr, Error::Kind::parameter,
              "weak_exp_family requires an exp schedule");
      require(op.cocoercivity.has_value(), Error::Kind::precondition,
              "weak_exp_family requires a declared quasi-cocoercivity modulus");
      return validate_weak_exp_family(*s, *op.cocoercivity);
    }
    case TheoremId::assumption_main: {
      require(op.cocoercivity.has_value(), Error::Kind::precondition,
              "assumption_main requires a declared quasi-cocoercivity modulus");
      const double omega = *op.cocoercivity;
      const DampingSpec d = cfg.contains("damping") ? damping_from_json(cfg.at("damping"))
                                                    : DampingSpec(ConstantDamping{omega});
      return validate_assumption_main(schedule, d, omega);
    }
    case TheoremId::exp_rate: {
      const auto* s = std::get_if<ConstantSchedule>(&schedule);
      require(s != nullptr, Error::Kind::parameter, "exp_rate requires a constant schedule");
      require(op.strong_monotonicity.has_value(), Error::Kind::precondition,
              "exp_rate requires a declared strong-monotonicity modulus");
      return validate_exp_rate(s->q0, s->q1, s->q2, s->lambda1, s->lambda2,
                               *op.strong_monotonicity, effective_lipschitz(op));
    }
    case TheoremId::opt_case1: {
      const auto* s = std::get_if<PolySchedule>(&schedule);
      require(s != nullptr && s->xi2 > 0, Error::Kind::parameter,
              "opt_case1 requires a poly schedule with xi2 > 0");
      ValidationReport rep = validate_opt_case1(s->xi1, s->xi2, s->alpha0, true);
      rep.checks.push_back(make_check("nu1_forced", std::abs(s->nu1 - rep.derived["nu1"]),
                                      Relation::le, 1e-12));
      rep.checks.push_back(make_check("nu2_forced", std::abs(s->nu2 - rep.derived["nu2"]),
                                      Relation::le, 1e-12));
      return rep;
    }
    case TheoremId::opt_case2: {
      const auto* s = std::get_if<PolySchedule>(&schedule);
      require(s != nullptr && s->xi2 == 0, Error::Kind::parameter,
              "opt_case2 requires a poly schedule with xi2 = 0");
      ValidationReport rep = validate_opt_case2(s->xi1, s->nu2, s->alpha0);
      rep.checks.push_back(make_check("nu1_forced", std::abs(s->nu1 - rep.derived["nu1"]),
                                      Relation::le, 1e-12));
      return rep;
    }
    case TheoremId::ergodic: {
      const auto* s = std::get_if<ConstantSchedule>(&schedule);
      require(s != nullptr, Error::Kind::parameter, "ergodic requires a constant schedule");
      require(op.lipschitz.has_value(), Error::Kind::precondition,
              "ergodic requires the gradient Lipschitz constant");
      return validate_ergodic(s->q0, s->q1, s->q2, *op.lipschitz);
    }
  }
  fail(Error::Kind::capability, "unhandled theorem id");
}

inline TimeSeries residual_series(const Trajectory& traj) {
  TimeSeries s;
  for (const auto& r : traj.records) {
    s.t.push_back(r.t);
    s.value.push_back(r.residual);
  }
  return s;
}

inline TimeSeries distance_squared_series(const Trajectory& traj, const Vector& x_star) {
  TimeSeries s;
  for (const auto& r : traj.records) {
    s.t.push_back(r.t);
    s.value.push_back((r.x - x_star).squaredNorm());
  }
  return s;
}

inline TimeSeries clip_positive(TimeSeries s, double floor = 1e-16) {
  for (auto& v : s.value) v = std::max(v, floor);
  return s;
}

}  // namespace detail

/// Execute one configured run: build the problem, validate the schedule
/// parameters against the matching theorem, integrate, then attach the
/// theorem's diagnostics. With force off, a failed validation refuses to run.
inline RunArtifacts run_once(const json& cfg, bool force = false) {
  const auto wall_start = std::chrono::steady_clock::now();
  RunArtifacts art;
  art.problem = detail::load_problem(cfg.at("problem"));
  const Schedule schedule = schedule_from_json(cfg.at("schedule"));
  SolverConfig solver = solver_from_json(cfg.at("solver"));
  const std::uint64_t seed = cfg.value("seed", 0ULL);

  const TheoremId theorem = cfg.contains("theorem")
                                ? theorem_from_string(cfg.at("theorem").get<std::string>())
                                : detail::infer_theorem(schedule, art.problem.op);
  art.validation = detail::validate_for_run(theorem, schedule, art.problem.op, cfg);

  art.summary["theorem"] = theorem_name(theorem);
  art.summary["validation"] = report_to_json(art.validation);
  art.summary["problem"] = art.problem.description;
  art.summary["config"] = cfg;
  if (!art.validation.pass() && !force) {
    art.refused = true;
    art.summary["refused"] = true;
    return art;
  }

  // Initial state: configured explicitly, or a seeded offset from the
  // instance solution with zero velocity and acceleration.
  const int n = art.problem.dimension;
  SystemState init;
  init.t = start_time(schedule);
  if (cfg.contains("init")) {
    const json& ji = cfg.at("init");
    init.x = vector_from_json(ji.at("x"));
    init.v = ji.contains("v") ? vector_from_json(ji.at("v")) : Vector(Vector::Zero(n));
    init.a = ji.contains("a") ? vector_from_json(ji.at("a")) : Vector(Vector::Zero(n));
  } else {
    Rng rng(seed);
    init.x = art.problem.x_star + rng.normal_vector(n);
    init.v = Vector::Zero(n);
    init.a = Vector::Zero(n);
  }

  art.trajectory = integrate(schedule, art.problem.op, init, solver);

  // Diagnostics.
  std::vector<std::pair<std::string, TimeSeries>> series;
  series.emplace_back("residual", detail::residual_series(art.trajectory));
  json rates = json::object();

  const json rate_cfg = cfg.value("rate", json::object());
  const double t0 = start_time(schedule);
  const double t_end = art.trajectory.back().t;
  double w_lo = t0 + 10.0, w_hi = 0.9 * t_end;
  if (rate_cfg.contains("window")) {
    w_lo = rate_cfg.at("window")[0].get<double>();
    w_hi = rate_cfg.at("window")[1].get<double>();
  }

  auto try_fit = [&](const std::string& name, const TimeSeries& s, RateModel model) {
    if (s.size() < 10) return;
    try {
      rates[name] = rate_to_json(fit_rate(detail::clip_positive(s), model, w_lo, w_hi));
    } catch (const Error&) {
      // window too small or empty data: rate omitted from the summary
    }
  };

  const Vector& x_star = art.problem.x_star;
  const Objective& f = art.problem.objective;
  const double f_star = art.problem.f_star.value_or(0.0);

  switch (theorem) {
    case TheoremId::weak_constant:
    case TheoremId::weak_exp_family:
    case TheoremId::assumption_main: {
      const double omega = art.problem.op.cocoercivity.value();
      const DampingSpec d = cfg.contains("damping") ? damping_from_json(cfg.at("damping"))
                                                    : DampingSpec(ConstantDamping{omega});
      const TimeSeries h = lyapunov_weak(art.trajectory, DerivedCoefficients(schedule, d, omega),
                                         x_star);
      art.summary["lyapunov_worst_increase"] = worst_relative_increase(h);
      series.emplace_back("lyapunov", h);
      try_fit("residual", series.front().second, RateModel::exponential);
      break;
    }
    case TheoremId::exp_rate: {
      const TimeSeries d2 = detail::distance_squared_series(art.trajectory, x_star);
      series.emplace_back("dist2", d2);
      try_fit("dist2", d2, RateModel::exponential);
      break;
    }
    case TheoremId::opt_case1: {
      const auto& s = std::get<PolySchedule>(schedule);
      if (f) {
        const TimeSeries V =
            lyapunov_opt_case1(art.trajectory, s.xi1, s.xi2, s.alpha0, f, f_star, x_star);
        art.summary["lyapunov_worst_increase"] = worst_relative_increase(V);
        series.emplace_back("lyapunov", V);
        TimeSeries phi_gap, x_gap;
        for (const auto& r : art.trajectory.records) {
          const Vector phi = r.x + s.xi1 * r.t * r.v + s.xi2 * r.t * r.t * r.a;
          phi_gap.t.push_back(r.t);
          phi_gap.value.push_back(f(phi) - f_star);
          x_gap.t.push_back(r.t);
          x_gap.value.push_back(f(r.x) - f_star);
        }
        series.emplace_back("phi_gap", phi_gap);
        series.emplace_back("x_gap", x_gap);
        try_fit("phi_gap", phi_gap, RateModel::power);
        try_fit("x_gap", x_gap, RateModel::power);
      }
      break;
    }
    case TheoremId::opt_case2: {
      const auto& s = std::get<PolySchedule>(schedule);
      if (f) {
        const TimeSeries V =
            lyapunov_opt_case2(art.trajectory, s.xi1, s.nu2, s.alpha0, f, f_star, x_star);
        art.summary["lyapunov_worst_increase"] = worst_relative_increase(V);
        series.emplace_back("lyapunov", V);
        TimeSeries anchor_gap, x_gap;
        for (const auto& r : art.trajectory.records) {
          const Vector anchor = r.x + s.xi1 * r.t * r.v;
          anchor_gap.t.push_back(r.t);
          anchor_gap.value.push_back(f(anchor) - f_star);
          x_gap.t.push_back(r.t);
          x_gap.value.push_back(f(r.x) - f_star);
        }
        series.emplace_back("anchor_gap", anchor_gap);
        series.emplace_back("x_gap", x_gap);
        try_fit("anchor_gap", anchor_gap, RateModel::power);
        try_fit("x_gap", x_gap, RateModel::power);
      }
      break;
    }
    case TheoremId::ergodic: {
      if (f) {
        const TimeSeries gap = ergodic_gap(art.trajectory, f, f_star);
        series.emplace_back("ergodic_gap", gap);
        try_fit("ergodic_gap", gap, RateModel::power);
      }
      break;
    }
  }

  art.trajectory_csv = trajectory_to_csv(art.trajectory);
  art.diagnostics_csv = series_to_csv(series);

  art.summary["termination"] = termination_name(art.trajectory.termination);
  art.summary["steps"] = art.trajectory.steps;
  art.summary["rejected_steps"] = art.trajectory.rejected_steps;
  art.summary["initial_residual"] = art.trajectory.front().residual;
  art.summary["final_residual"] = art.trajectory.back().residual;
  if (art.trajectory.front().residual > 0)
    art.summary["residual_ratio"] =
        art.trajectory.back().residual / art.trajectory.front().residual;
  art.summary["rates"] = rates;
  art.summary["wall_time_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                            wall_start)
          .count();
  return art;
}

inline void write_run_artifacts(const RunArtifacts& art, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "summary.json") << art.summary.dump(2) << "\n";
  if (!art.refused) {
    std::ofstream(dir / "trajectory.csv") << art.trajectory_csv;
    std::ofstream(dir / "diagnostics.csv") << art.diagnostics_csv;
  }
}

// ---------------------------------------------------------------------------
// Parameter sweep: cartesian grid of dotted-path overrides applied to a base
// run config. Cells run on a thread pool; each cell writes only its own
// subdirectory and one slot of the pre-sized results table.

struct SweepCell {
  json overrides;
  bool ok = false;
  bool validator_pass = false;
  std::string termination;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

inline std::vector<SweepCell> sweep(const json& cfg, const std::filesystem::path& output_dir,
                                    bool force = false, int max_cells = 10000,
                                    int threads = 0) {
  require(cfg.contains("base") && cfg.contains("grid"), Error::Kind::parameter,
          "sweep: config needs 'base' and 'grid'");
  const json& grid = cfg.at("grid");
  require(grid.is_object() && !grid.empty(), Error::Kind::parameter, "sweep: empty grid");

  std::vector<std::string> keys;
  std::vector<std::vector<json>> values;
  std::size_t cells = 1;
  for (const auto& [k, v] : grid.items()) {
    require(v.is_array() && !v.empty(), Error::Kind::parameter,
            "sweep: grid entry must be a nonempty array: " + k);
    keys.push_back(k);
    values.emplace_back(v.begin(), v.end());
    cells *= v.size();
    require(cells <= static_cast<std::size_t>(max_cells), Error::Kind::parameter,
            "sweep: grid exceeds cell cap");
  }

  std::vector<SweepCell> results(cells);
  for (std::size_t idx = 0; idx < cells; ++idx) {
    std::size_t rem = idx;
    json overrides = json::object();
    for (std::size_t k = 0; k < keys.size(); ++k) {
      overrides[keys[k]] = values[k][rem % values[k].size()];
      rem /= values[k].size();
    }
    results[idx].overrides = overrides;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cells) return;
      SweepCell& cell = results[idx];
      json run_cfg = cfg.at("base");
      for (const auto& [path, value] : cell.overrides.items())
        run_cfg[json::json_pointer("/" + path)] = value;
      try {
        const RunArtifacts art = run_once(run_cfg, force);
        cell.validator_pass = art.validation.pass();
        if (!art.refused) {
          cell.ok = true;
          cell.termination = termination_name(art.trajectory.termination);
          cell.final_residual = art.trajectory.back().residual;
          if (art.summary.contains("rates") && !art.summary["rates"].empty())
            cell.rate = art.summary["rates"].begin().value().value("s", cell.rate);
          if (!output_dir.empty())
            write_run_artifacts(art, output_dir / ("cell_" + std::to_string(idx)));
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };

  int nthreads = threads > 0 ? threads
                             : static_cast<int>(std::min<std::size_t>(
                                   cells, std::max(1u, std::thread::hardware_concurrency())));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

inline std::string sweep_results_csv(const std::vector<SweepCell>& cells) {
  std::vector<std::string> keys;
  if (!cells.empty())
    for (const auto& [k, v] : cells.front().overrides.items()) keys.push_back(k);
  std::ostringstream os;
  os << "cell";
  for (const auto& k : keys) os << "," << k;
  os << ",validator_pass,termination,final_residual,rate,error\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    os << i;
    for (const auto& k : keys) {
      os << ",";
      const json& v = cells[i].overrides.at(k);
      os << (v.is_number() ? format_double(v.get<double>()) : v.dump());
    }
    os << "," << (cells[i].validator_pass ? 1 : 0) << "," << cells[i].termination << ","
       << format_double(cells[i].final_residual) << "," << format_double(cells[i].rate) << ","
       << cells[i].error << "\n";
  }
  return os.str();
}

}  // namespace triflow
