#pragma once

#include "triflow/core.hpp"
#include "triflow/diagnostics.hpp"
#include "triflow/integrator.hpp"
#include "triflow/operators.hpp"
#include "triflow/problems.hpp"
#include "triflow/schedules.hpp"
#include "triflow/validation.hpp"

#include <json.hpp>

#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace triflow {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Number formatting: %.17g round-trips doubles and keeps CSV output
// byte-identical across runs with the same inputs.

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Vectors and matrices (row-major nested arrays).

inline Vector vector_from_json(const json& j) {
  require(j.is_array(), Error::Kind::parameter, "expected an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

inline json vector_to_json(const Vector& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

inline Matrix matrix_from_json(const json& j) {
  require(j.is_array() && !j.empty(), Error::Kind::parameter, "expected a row-major matrix");
  const std::size_t rows = j.size(), cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    require(j[r].is_array() && j[r].size() == cols, Error::Kind::parameter,
            "matrix rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Schedules: {"family": "constant" | "exp" | "poly", ...}

inline Schedule schedule_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  Schedule out;
  if (family == "constant") {
    ConstantSchedule s;
    s.q0 = j.at("q0").get<double>();
    s.q1 = j.at("q1").get<double>();
    s.q2 = j.at("q2").get<double>();
    s.lambda1 = j.value("lambda1", 0.0);
    s.lambda2 = j.value("lambda2", 0.0);
    s.t0 = j.value("t0", 0.0);
    out = s;
  } else if (family == "exp") {
    ExpSchedule s;
    const auto p = j.at("p"), q = j.at("q"), r = j.at("r");
    require(p.size() == 3 && q.size() == 3 && r.size() == 3, Error::Kind::parameter,
            "exp schedule: p, q, r must have 3 entries (index 0,1,2)");
    s.p0 = p[0].get<double>(); s.p1 = p[1].get<double>(); s.p2 = p[2].get<double>();
    s.q0 = q[0].get<double>(); s.q1 = q[1].get<double>(); s.q2 = q[2].get<double>();
    s.r0 = r[0].get<double>(); s.r1 = r[1].get<double>(); s.r2 = r[2].get<double>();
    const auto tau = j.value("tau", json::array({0.0, 0.0}));
    const auto m = j.value("m", json::array({0.0, 0.0}));
    require(tau.size() == 2 && m.size() == 2, Error::Kind::parameter,
            "exp schedule: tau, m must have 2 entries");
    s.tau1 = tau[0].get<double>(); s.tau2 = tau[1].get<double>();
    s.m1 = m[0].get<double>(); s.m2 = m[1].get<double>();
    s.t0 = j.value("t0", 0.0);
    out = s;
  } else if (family == "poly") {
    PolySchedule s;
    s.xi1 = j.at("xi1").get<double>();
    s.xi2 = j.at("xi2").get<double>();
    s.nu1 = j.at("nu1").get<double>();
    s.nu2 = j.at("nu2").get<double>();
    s.alpha0 = j.at("alpha0").get<double>();
    s.t0 = j.at("t0").get<double>();
    out = s;
  } else {
    fail(Error::Kind::capability, "unknown schedule family: " + family);
  }
  validate_schedule(out);
  return out;
}

inline json schedule_to_json(const Schedule& sched) {
  json j;
  if (const auto* s = std::get_if<ConstantSchedule>(&sched)) {
    j["family"] = "constant";
    j["q0"] = s->q0; j["q1"] = s->q1; j["q2"] = s->q2;
    j["lambda1"] = s->lambda1; j["lambda2"] = s->lambda2;
    j["t0"] = s->t0;
  } else if (const auto* s = std::get_if<ExpSchedule>(&sched)) {
    j["family"] = "exp";
    j["p"] = {s->p0, s->p1, s->p2};
    j["q"] = {s->q0, s->q1, s->q2};
    j["r"] = {s->r0, s->r1, s->r2};
    j["tau"] = {s->tau1, s->tau2};
    j["m"] = {s->m1, s->m2};
    j["t0"] = s->t0;
  } else {
    const auto& poly = std::get<PolySchedule>(sched);
    j["family"] = "poly";
    j["xi1"] = poly.xi1; j["xi2"] = poly.xi2;
    j["nu1"] = poly.nu1; j["nu2"] = poly.nu2;
    j["alpha0"] = poly.alpha0; j["t0"] = poly.t0;
  }
  return j;
}

inline DampingSpec damping_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return ConstantDamping{j.at("d").get<double>()};
  if (kind == "saturating")
    return SaturatingDamping{j.at("d1").get<double>(), j.at("d2").get<double>()};
  fail(Error::Kind::capability, "unknown damping kind: " + kind);
}

// ---------------------------------------------------------------------------
// Regions and prox descriptors (tagged unions mirroring operation parameters).

inline Region region_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  Region out;
  if (type == "whole_space") {
    out = WholeSpace{};
  } else if (type == "box") {
    out = Box{vector_from_json(j.at("lo")), vector_from_json(j.at("hi"))};
  } else if (type == "ball") {
    out = Ball{vector_from_json(j.at("center")), j.at("radius").get<double>()};
  } else if (type == "halfspace") {
    out = Halfspace{vector_from_json(j.at("normal")), j.at("offset").get<double>()};
  } else if (type == "simplex") {
    out = Simplex{j.value("total", 1.0)};
  } else {
    fail(Error::Kind::capability, "unknown region type: " + type);
  }
  validate_region(out);
  return out;
}

inline ProxDescriptor prox_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "zero") return ProxZero{};
  if (type == "quadratic") {
    ProxQuadratic q;
    q.Q = matrix_from_json(j.at("Q"));
    if (j.contains("b")) q.b = vector_from_json(j.at("b"));
    return q;
  }
  if (type == "l1") return ProxL1{j.value("weight", 1.0)};
  if (type == "normal_cone") return ProxNormalCone{region_from_json(j.at("region"))};
  fail(Error::Kind::capability, "unknown prox descriptor: " + type);
}

// ---------------------------------------------------------------------------
// Problems: seeded generator forms plus explicit matrix forms.

inline ProblemInstance problem_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "quadratic")
    return make_quadratic(j.at("n").get<int>(), j.at("mu").get<double>(),
                          j.at("L").get<double>(), j.at("seed").get<std::uint64_t>());
  if (type == "affine_monotone")
    return make_affine_monotone(j.at("n").get<int>(), j.at("rho").get<double>(),
                                j.at("sigma").get<double>(), j.at("seed").get<std::uint64_t>());
  if (type == "vi_box") {
    const int n = j.at("n").get<int>();
    Box box;
    if (j.contains("box")) {
      box.lo = vector_from_json(j.at("box").at("lo"));
      box.hi = vector_from_json(j.at("box").at("hi"));
    } else {
      const double half = j.value("box_halfwidth", 2.0);
      box.lo = Vector::Constant(n, -half);
      box.hi = Vector::Constant(n, half);
    }
    return make_vi_box(n, j.at("rho").get<double>(), j.at("sigma").get<double>(), box,
                       j.at("seed").get<std::uint64_t>());
  }
  if (type == "splitting_lasso")
    return make_splitting_lasso(j.at("n").get<int>(), j.at("m").get<int>(),
                                j.at("lambda_reg").get<double>(),
                                j.at("seed").get<std::uint64_t>());
  if (type == "fbf")
    return make_fbf_instance(j.at("n").get<int>(), j.at("sigma").get<double>(),
                             j.at("seed").get<std::uint64_t>());
  if (type == "quadratic_explicit") {
    const Matrix Q = matrix_from_json(j.at("Q"));
    const Vector x_star = vector_from_json(j.at("x_star"));
    ProblemInstance inst;
    inst.op.eval = [Q, x_star](const Vector& x) { return Vector(Q * (x - x_star)); };
    if (j.contains("L")) {
      inst.op.lipschitz = j.at("L").get<double>();
      inst.op.cocoercivity = 1.0 / j.at("L").get<double>();
      inst.op.fully_cocoercive = true;
    }
    if (j.contains("mu")) inst.op.strong_monotonicity = j.at("mu").get<double>();
    inst.op.known_zero = x_star;
    inst.objective = [Q, x_star](const Vector& x) {
      const Vector d = x - x_star;
      return 0.5 * d.dot(Q * d);
    };
    inst.f_star = 0.0;
    inst.x_star = x_star;
    inst.dimension = static_cast<int>(x_star.size());
    inst.description = "quadratic_explicit";
    check_operator_invariants(inst.op);
    return inst;
  }
  if (type == "affine_explicit") {
    const Matrix M = matrix_from_json(j.at("M"));
    const Vector x_star = vector_from_json(j.at("x_star"));
    ProblemInstance inst;
    inst.op.eval = [M, x_star](const Vector& x) { return Vector(M * (x - x_star)); };
    if (j.contains("L")) inst.op.lipschitz = j.at("L").get<double>();
    if (j.contains("rho")) inst.op.strong_monotonicity = j.at("rho").get<double>();
    if (j.contains("omega_u")) inst.op.cocoercivity = j.at("omega_u").get<double>();
    inst.op.known_zero = x_star;
    inst.x_star = x_star;
    inst.dimension = static_cast<int>(x_star.size());
    inst.description = "affine_explicit";
    check_operator_invariants(inst.op);
    return inst;
  }
  fail(Error::Kind::capability, "unknown problem type: " + type);
}

// ---------------------------------------------------------------------------
// Solver configuration.

inline SolverConfig solver_from_json(const json& j) {
  SolverConfig cfg;
  const std::string method = j.value("method", "rk45");
  if (method == "rk45" || method == "rk45_adaptive")
    cfg.method = Method::rk45_adaptive;
  else if (method == "rk4" || method == "rk4_fixed")
    cfg.method = Method::rk4_fixed;
  else
    fail(Error::Kind::capability, "unknown solver method: " + method);
  cfg.h = j.value("h", cfg.h);
  cfg.abs_tol = j.value("abs_tol", cfg.abs_tol);
  cfg.rel_tol = j.value("rel_tol", cfg.rel_tol);
  cfg.h_init = j.value("h_init", cfg.h_init);
  cfg.h_min = j.value("h_min", cfg.h_min);
  cfg.h_max = j.value("h_max", cfg.h_max);
  cfg.t_end = j.at("t_end").get<double>();
  if (j.contains("stop_residual")) cfg.stop_residual = j.at("stop_residual").get<double>();
  cfg.record_every = j.value("record_every", 1);
  return cfg;
}

// ---------------------------------------------------------------------------
// Theorem ids and validation reports.

inline TheoremId theorem_from_string(const std::string& name) {
  for (TheoremId id : {TheoremId::weak_constant, TheoremId::weak_exp_family,
                       TheoremId::assumption_main, TheoremId::exp_rate, TheoremId::opt_case1,
                       TheoremId::opt_case2, TheoremId::ergodic})
    if (name == theorem_name(id)) return id;
  fail(Error::Kind::capability, "unknown theorem id: " + name);
}

inline json report_to_json(const ValidationReport& rep) {
  json j;
  j["theorem"] = theorem_name(rep.theorem);
  j["pass"] = rep.pass();
  j["checks"] = json::array();
  for (const auto& c : rep.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"lhs", c.lhs},
                           {"relation", relation_name(c.relation)},
                           {"rhs", c.rhs},
                           {"margin", c.margin},
                           {"pass", c.pass}});
  }
  j["derived"] = rep.derived;
  return j;
}

inline std::string report_to_table(const ValidationReport& rep) {
  std::ostringstream os;
  os << "theorem: " << theorem_name(rep.theorem) << "  ["
     << (rep.pass() ? "PASS" : "FAIL") << "]\n";
  std::size_t width = 4;
  for (const auto& c : rep.checks) width = std::max(width, c.name.size());
  for (const auto& c : rep.checks) {
    os << "  " << std::left << std::setw(static_cast<int>(width)) << c.name << "  "
       << (c.pass ? "pass" : "FAIL") << "  " << std::setw(13) << c.lhs << " "
       << relation_name(c.relation) << " " << std::setw(13) << c.rhs
       << "  margin=" << c.margin << "\n";
  }
  if (!rep.derived.empty()) {
    os << "  derived:";
    for (const auto& [k, v] : rep.derived) os << " " << k << "=" << v;
    os << "\n";
  }
  return os.str();
}

/// Dispatch {"theorem": ..., "params": {...}} onto the matching validator.
inline ValidationReport validate_from_json(const json& cfg) {
  const TheoremId id = theorem_from_string(cfg.at("theorem").get<std::string>());
  const json& p = cfg.at("params");
  switch (id) {
    case TheoremId::weak_constant:
      return validate_weak_constant(p.at("q0").get<double>(), p.at("q1").get<double>(),
                                    p.at("q2").get<double>(), p.at("omega_u").get<double>());
    case TheoremId::weak_exp_family: {
      json sched = p;
      sched["family"] = "exp";
      const Schedule s = schedule_from_json(sched);
      return validate_weak_exp_family(std::get<ExpSchedule>(s), p.at("omega_u").get<double>());
    }
    case TheoremId::assumption_main: {
      const Schedule s = schedule_from_json(p.at("schedule"));
      const double omega = p.at("omega_u").get<double>();
      const DampingSpec d = p.contains("damping") ? damping_from_json(p.at("damping"))
                                                  : DampingSpec(ConstantDamping{omega});
      return validate_assumption_main(s, d, omega);
    }
    case TheoremId::exp_rate:
      return validate_exp_rate(p.at("beta0").get<double>(), p.at("beta1").get<double>(),
                               p.at("beta2").get<double>(), p.value("lambda1", 0.0),
                               p.value("lambda2", 0.0), p.at("rho").get<double>(),
                               p.at("L_u").get<double>());
    case TheoremId::opt_case1:
      return validate_opt_case1(p.at("xi1").get<double>(), p.at("xi2").get<double>(),
                                p.value("alpha0", 1.0), p.value("check_xt_rate", true));
    case TheoremId::opt_case2:
      return validate_opt_case2(p.at("xi1").get<double>(), p.at("nu2").get<double>(),
                                p.value("alpha0", 1.0));
    case TheoremId::ergodic:
      return validate_ergodic(p.at("beta0").get<double>(), p.at("beta1").get<double>(),
                              p.at("beta2").get<double>(), p.at("M").get<double>());
  }
  fail(Error::Kind::capability, "unhandled theorem id");
}

// ---------------------------------------------------------------------------
// CSV artifacts.

inline std::string trajectory_to_csv(const Trajectory& traj) {
  require(!traj.records.empty(), Error::Kind::domain, "trajectory_to_csv: empty trajectory");
  const Eigen::Index n = traj.records.front().x.size();
  std::ostringstream os;
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x_" << i;
  for (Eigen::Index i = 0; i < n; ++i) os << ",v_" << i;
  for (Eigen::Index i = 0; i < n; ++i) os << ",a_" << i;
  os << ",residual\n";
  for (const auto& r : traj.records) {
    os << format_double(r.t);
    for (Eigen::Index i = 0; i < n; ++i) os << "," << format_double(r.x[i]);
    for (Eigen::Index i = 0; i < n; ++i) os << "," << format_double(r.v[i]);
    for (Eigen::Index i = 0; i < n; ++i) os << "," << format_double(r.a[i]);
    os << "," << format_double(r.residual) << "\n";
  }
  return os.str();
}

/// Wide CSV keyed by t; series missing a timestamp leave the cell empty.
inline std::string series_to_csv(const std::vector<std::pair<std::string, TimeSeries>>& series) {
  std::vector<double> ts;
  for (const auto& [name, s] : series) ts.insert(ts.end(), s.t.begin(), s.t.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  std::ostringstream os;
  os << "t";
  for (const auto& [name, s] : series) os << "," << name;
  os << "\n";
  std::vector<std::size_t> cursor(series.size(), 0);
  for (double t : ts) {
    os << format_double(t);
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto& s = series[i].second;
      os << ",";
      if (cursor[i] < s.t.size() && s.t[cursor[i]] == t) {
        os << format_double(s.value[cursor[i]]);
        ++cursor[i];
      }
    }
    os << "\n";
  }
  return os.str();
}

/// Parse one column of a trajectory/diagnostics CSV into a time series.
inline TimeSeries csv_column(const std::string& csv, const std::string& column) {
  std::istringstream is(csv);
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), Error::Kind::domain, "csv: empty input");
  std::vector<std::string> headers;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) headers.push_back(cell);
  }
  std::size_t col = headers.size();
  for (std::size_t i = 0; i < headers.size(); ++i)
    if (headers[i] == column) col = i;
  require(col < headers.size(), Error::Kind::domain, "csv: no column named " + column);

  TimeSeries out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    double t = 0.0;
    bool have = false;
    for (std::size_t i = 0; i <= col; ++i) {
      require(static_cast<bool>(std::getline(ls, cell, ',')), Error::Kind::domain,
              "csv: short row");
      if (i == 0) t = std::stod(cell);
      if (i == col) have = !cell.empty();
    }
    if (have) {
      out.t.push_back(t);
      out.value.push_back(std::stod(cell));
    }
  }
  return out;
}

inline json rate_to_json(const RateEstimate& est) {
  return json{{"model", est.model == RateModel::power ? "power" : "exponential"},
              {"s", est.s},
              {"C", est.C},
              {"r2", est.r2},
              {"window", {est.t_lo, est.t_hi}},
              {"points", est.points}};
}

inline json certificate_to_json(const Certificate& cert) {
  const char* prop = "";
  switch (cert.property) {
    case OperatorProperty::lipschitz: prop = "lipschitz"; break;
    case OperatorProperty::cocoercive: prop = "cocoercive"; break;
    case OperatorProperty::quasi_cocoercive: prop = "quasi_cocoercive"; break;
    case OperatorProperty::strongly_monotone_wrt_zero:
      prop = "strongly_monotone_wrt_zero";
      break;
  }
  json j{{"property", prop},
         {"claimed", cert.claimed},
         {"max_violation", cert.max_violation},
         {"samples", cert.samples}};
  if (cert.witness_x.size() > 0) j["witness_x"] = vector_to_json(cert.witness_x);
  if (cert.witness_y.size() > 0) j["witness_y"] = vector_to_json(cert.witness_y);
  return j;
}

}  // namespace triflow
