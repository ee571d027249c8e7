#pragma once

#include "triflow/core.hpp"
#include "triflow/schedules.hpp"

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace triflow {

enum class TheoremId {
  weak_constant,    // constant coefficients, quasi-cocoercive U
  weak_exp_family,  // p e^{-rt} + q family, quasi-cocoercive U
  assumption_main,  // full grid check of the structural assumption + rate gate
  exp_rate,         // strongly monotone U, e^{-2t} rate
  opt_case1,        // optimization flow, xi2 != 0
  opt_case2,        // optimization flow, xi2 == 0
  ergodic,          // constant coefficients, ergodic O(1/t) rate
};

inline const char* theorem_name(TheoremId id) {
  switch (id) {
    case TheoremId::weak_constant: return "weak_constant";
    case TheoremId::weak_exp_family: return "weak_exp_family";
    case TheoremId::assumption_main: return "assumption_main";
    case TheoremId::exp_rate: return "exp_rate";
    case TheoremId::opt_case1: return "opt_case1";
    case TheoremId::opt_case2: return "opt_case2";
    case TheoremId::ergodic: return "ergodic";
  }
  return "?";
}

enum class Relation { lt, le, gt, ge };

inline const char* relation_name(Relation r) {
  switch (r) {
    case Relation::lt: return "<";
    case Relation::le: return "<=";
    case Relation::gt: return ">";
    case Relation::ge: return ">=";
  }
  return "?";
}

/// One inequality with its signed margin: margin > 0 means strictly feasible,
/// margin == 0 sits on the boundary (passes only non-strict relations).
struct Check {
  std::string name;
  double lhs = 0.0, rhs = 0.0;
  Relation relation = Relation::lt;
  double margin = 0.0;
  bool pass = false;
};

inline Check make_check(std::string name, double lhs, Relation rel, double rhs) {
  Check c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.relation = rel;
  const bool strict = rel == Relation::lt || rel == Relation::gt;
  c.margin = (rel == Relation::lt || rel == Relation::le) ? rhs - lhs : lhs - rhs;
  c.pass = strict ? c.margin > 0 : c.margin >= 0;
  return c;
}

struct ValidationReport {
  TheoremId theorem = TheoremId::weak_constant;
  std::vector<Check> checks;
  std::map<std::string, double> derived;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const Check* find(std::string_view name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Constant coefficients, quasi-cocoercive case: q2 > sqrt(2 q1) and
// q0 < omega_u q1^2 / (2 q2).

inline ValidationReport validate_weak_constant(double q0, double q1, double q2, double omega_u) {
  require(q0 > 0 && q1 > 0 && q2 > 0 && omega_u > 0, Error::Kind::parameter,
          "validate_weak_constant: all inputs must be > 0");
  ValidationReport rep;
  rep.theorem = TheoremId::weak_constant;
  rep.checks.push_back(make_check("q2_lower", q2, Relation::gt, std::sqrt(2.0 * q1)));
  rep.checks.push_back(make_check("q0_upper", q0, Relation::lt, omega_u * q1 * q1 / (2.0 * q2)));
  rep.derived["q2_bound"] = std::sqrt(2.0 * q1);
  rep.derived["q0_bound"] = omega_u * q1 * q1 / (2.0 * q2);
  return rep;
}

// ---------------------------------------------------------------------------
// Exponential-family schedule, quasi-cocoercive case.

inline ValidationReport validate_weak_exp_family(const ExpSchedule& s, double omega_u) {
  validate_schedule(s);
  require(omega_u > 0, Error::Kind::parameter, "validate_weak_exp_family: omega_u must be > 0");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  ValidationReport rep;
  rep.theorem = TheoremId::weak_exp_family;
  const double a1 = s.p1 + s.q1;  // sup beta1
  const double w = omega_u / s.q0;

  const double b_q2 = std::max(a1 / std::sqrt(s.q1), std::sqrt(2.0 * a1));
  rep.checks.push_back(make_check("q2_lower", s.q2, Relation::gt, b_q2));

  const double b_p0 = s.q2 * std::sqrt(s.q1) / a1 - 1.0;
  rep.checks.push_back(make_check("p0_upper", s.p0, Relation::lt, b_p0));

  // Three-way lower bound on omega_u / q0; the quadratic alternative only
  // makes sense when its leading coefficient q1 q2^2 - a1^2 (p0+1)^2 is
  // positive, which is exactly the p0 condition above.
  const double lead = s.q1 * s.q2 * s.q2 - a1 * a1 * (s.p0 + 1.0) * (s.p0 + 1.0);
  const double x1 = 2.0 * (s.p2 + s.q2) / (s.q1 * s.q1);
  const double x2 = 1.0 / (s.q1 * s.q2);
  const double x3 =
      lead > 0 ? (s.q2 + a1 * (s.p0 + 1.0) / std::sqrt(s.q1)) / lead : kInf;
  const double b_w = std::max({x1, x2, x3});
  rep.checks.push_back(make_check("omega_over_q0_lower", w, Relation::gt, b_w));
  rep.derived["omega_over_q0_binding"] = b_w == x1 ? 1.0 : (b_w == x2 ? 2.0 : 3.0);

  const double inner36 = w * (omega_u * s.q1 * s.q1 / s.q0 - 2.0 * (s.p2 + s.q2));
  const double b_tau1 = inner36 > 0 ? std::sqrt(inner36) : 0.0;
  rep.checks.push_back(make_check("tau1_upper", s.tau1, Relation::lt, b_tau1));

  const double root37 = s.q2 * s.q2 - 2.0 * a1;
  const double b_tau12_a =
      w * std::min(omega_u * s.q1 * s.q2 / s.q0 - 1.0,
                   s.tau1 * std::sqrt(std::max(root37, 0.0)));
  rep.checks.push_back(make_check("tau_product_upper", s.tau1 * s.tau2, Relation::lt, b_tau12_a));

  const double den38 = omega_u * s.q1 * s.q2 - s.q0;
  const double b_tau12_b =
      den38 > 0 ? (omega_u * s.q1 / den38) * (lead * w * w - 2.0 * s.q2 * w + 1.0 / s.q1) : -kInf;
  rep.checks.push_back(
      make_check("tau_product_gate", s.tau1 * s.tau2, Relation::lt, b_tau12_b));

  const ScheduleBounds b = schedule_bounds(s);
  rep.derived["c0"] = b.c0;
  rep.derived["c1"] = b.c1;
  rep.derived["c2"] = b.c2;
  rep.derived["alpha0"] = b.a0;
  rep.derived["alpha1"] = b.a1;
  rep.derived["alpha2"] = b.a2;
  rep.derived["delta1"] = w * s.q1 * s.q1 - 2.0 * (s.p2 + s.q2) - s.q0 * s.tau1 * s.tau1 / omega_u;
  rep.derived["delta2"] = w * root37 - s.q0 * s.tau2 * s.tau2 / omega_u;
  rep.derived["delta3"] =
      omega_u * s.q1 * s.q2 / s.q0 - 1.0 - s.q0 * s.tau1 * s.tau2 / omega_u;
  rep.derived["delta4"] = w * a1 * (s.p0 + 1.0);
  rep.derived["delta5"] = w * s.q2;
  rep.derived["delta6"] = w;
  return rep;
}

// ---------------------------------------------------------------------------
// Full structural assumption, checked on a log grid over [t0, t0 + 1e4],
// plus the rate gate 1/c1 < delta5 - delta4^2/delta3.

namespace detail {

inline DerivedCoefficients::At derived_at(const ScheduleValues& s, const DampingValues& d,
                                          double omega_u) {
  const double E = 2.0 * omega_u - d.D;
  DerivedCoefficients::At at{};
  at.A2 = E * s.beta1 / s.beta0;
  at.A1 = E * s.beta1 * s.beta2 / s.beta0 - (s.beta0 / d.D) * s.lambda1 * s.lambda2 - 3.0;
  at.A0 = E * s.beta1 * s.beta1 / s.beta0 - (s.beta0 / d.D) * s.lambda1 * s.lambda1 -
          2.0 * s.beta2;
  at.B1 = E * s.beta2 / s.beta0;
  at.B0 = (E / s.beta0) * (s.beta2 * s.beta2 - 2.0 * s.beta1) -
          (s.beta0 / d.D) * s.lambda2 * s.lambda2;
  at.C0 = E / s.beta0;
  return at;
}

}  // namespace detail

inline ValidationReport validate_assumption_main(const Schedule& schedule,
                                                 const DampingSpec& damping, double omega_u) {
  validate_schedule(schedule);
  require(omega_u > 0, Error::Kind::parameter, "validate_assumption_main: omega_u must be > 0");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  const double t0 = start_time(schedule);
  double min_db2 = kInf, min_ddb2 = kInf, min_db1 = kInf, min_ddb1 = kInf;
  double min_db0 = kInf, min_ddb0_neg = kInf, min_dl1 = kInf, min_dl2 = kInf;
  double min_D = kInf, min_dD = kInf, min_ddD_neg = kInf, min_dom = kInf;
  double d1 = kInf, d2 = kInf, d3 = kInf, d4 = -kInf, d5 = kInf, d6 = kInf;

  for (double t : log_grid(t0, DerivedCoefficients::kGridSpan, DerivedCoefficients::kGridPoints)) {
    const ScheduleValues s = eval_schedule(schedule, t);
    const DampingValues d = eval_damping(damping, t);
    min_db2 = std::min(min_db2, -s.dbeta2);
    min_ddb2 = std::min(min_ddb2, s.ddbeta2);
    min_db1 = std::min(min_db1, -s.dbeta1);
    min_ddb1 = std::min(min_ddb1, s.ddbeta1);
    min_db0 = std::min(min_db0, s.dbeta0);
    min_ddb0_neg = std::min(min_ddb0_neg, -s.ddbeta0);
    min_dl1 = std::min(min_dl1, s.dlambda1);
    min_dl2 = std::min(min_dl2, s.dlambda2);
    min_D = std::min(min_D, d.D);
    min_dD = std::min(min_dD, d.dD);
    min_ddD_neg = std::min(min_ddD_neg, -d.ddD);
    min_dom = std::min(min_dom, d.D * d.D - s.beta0 * s.beta0 * s.lambda1 * s.lambda2 /
                                    (s.beta1 * s.beta2));
    const auto at = detail::derived_at(s, d, omega_u);
    d1 = std::min(d1, at.A0);
    d2 = std::min(d2, at.B0);
    d3 = std::min(d3, at.A1 + 2.0);
    d4 = std::max(d4, at.A2);
    d5 = std::min(d5, at.B1);
    d6 = std::min(d6, at.C0);
  }

  ValidationReport rep;
  rep.theorem = TheoremId::assumption_main;
  rep.checks.push_back(make_check("beta2_nonincreasing", 0.0, Relation::le, min_db2));
  rep.checks.push_back(make_check("beta2_convex", 0.0, Relation::le, min_ddb2));
  rep.checks.push_back(make_check("beta1_nonincreasing", 0.0, Relation::le, min_db1));
  rep.checks.push_back(make_check("beta1_convex", 0.0, Relation::le, min_ddb1));
  rep.checks.push_back(make_check("beta0_nondecreasing", 0.0, Relation::le, min_db0));
  rep.checks.push_back(make_check("beta0_concave", 0.0, Relation::le, min_ddb0_neg));
  rep.checks.push_back(make_check("lambda1_nondecreasing", 0.0, Relation::le, min_dl1));
  rep.checks.push_back(make_check("lambda2_nondecreasing", 0.0, Relation::le, min_dl2));
  rep.checks.push_back(make_check("damping_positive", min_D, Relation::gt, 0.0));
  rep.checks.push_back(
      make_check("damping_sup", damping_sup(damping), Relation::lt, 2.0 * omega_u));
  rep.checks.push_back(make_check("damping_nondecreasing", 0.0, Relation::le, min_dD));
  rep.checks.push_back(make_check("damping_concave", 0.0, Relation::le, min_ddD_neg));
  rep.checks.push_back(make_check("damping_dominates_lambda", 0.0, Relation::le, min_dom));
  rep.checks.push_back(make_check("A0_inf", d1, Relation::gt, 0.0));
  rep.checks.push_back(make_check("B0_inf", d2, Relation::gt, 0.0));
  rep.checks.push_back(make_check("A1_plus_2_inf", d3, Relation::gt, 0.0));
  rep.checks.push_back(make_check("B1_inf", d5, Relation::gt, 0.0));
  rep.checks.push_back(make_check("C0_inf", d6, Relation::gt, 0.0));

  const ScheduleBounds b = schedule_bounds(schedule);
  const double gate_lhs = b.c1 > 0 ? 1.0 / b.c1 : kInf;
  const double gate_rhs = d3 > 0 ? d5 - d4 * d4 / d3 : -kInf;
  rep.checks.push_back(make_check("rate_gate", gate_lhs, Relation::lt, gate_rhs));

  rep.derived["delta1"] = d1;
  rep.derived["delta2"] = d2;
  rep.derived["delta3"] = d3;
  rep.derived["delta4"] = d4;
  rep.derived["delta5"] = d5;
  rep.derived["delta6"] = d6;
  rep.derived["c0"] = b.c0;
  rep.derived["c1"] = b.c1;
  rep.derived["c2"] = b.c2;
  rep.derived["alpha0"] = b.a0;
  rep.derived["alpha1"] = b.a1;
  rep.derived["alpha2"] = b.a2;
  return rep;
}

// ---------------------------------------------------------------------------
// Strongly monotone case: constant coefficients, e^{-2t} rate.

inline ValidationReport validate_exp_rate(double beta0, double beta1, double beta2,
                                          double lambda1, double lambda2, double rho,
                                          double L_u) {
  require(rho > 0 && L_u > 0, Error::Kind::parameter, "validate_exp_rate: rho, L_u must be > 0");
  require(beta0 > 0 && beta1 > 0 && beta2 > 0, Error::Kind::parameter,
          "validate_exp_rate: beta coefficients must be > 0");
  require(lambda1 >= 0 && lambda2 >= 0, Error::Kind::parameter,
          "validate_exp_rate: lambda coefficients must be >= 0");
  const double kappa = rho / (L_u * L_u);
  const double rk = rho * kappa;

  ValidationReport rep;
  rep.theorem = TheoremId::exp_rate;
  rep.checks.push_back(make_check(
      "beta2_lower", beta2, Relation::gt, std::max({4.0 + 12.0 / rk, 6.0, 16.0 / rk})));
  rep.checks.push_back(make_check(
      "beta1_lower", beta1, Relation::gt,
      std::max(4.0 * (beta2 - 3.0), (8.0 / rk) * (beta2 - 3.0))));
  rep.checks.push_back(make_check("beta1_upper", beta1, Relation::lt,
                                  beta2 * (beta2 - 2.0) / 2.0));
  const double core = beta1 - 2.0 * beta2 + 4.0;
  rep.checks.push_back(make_check("beta0_lower", beta0, Relation::gt, (2.0 / rho) * core));
  rep.checks.push_back(make_check(
      "beta0_upper", beta0, Relation::lt,
      (kappa * beta1 / 2.0) *
          std::min(core / (2.0 * (beta2 - 3.0)), (beta2 - 4.0) / 3.0)));
  rep.checks.push_back(make_check(
      "lambda1_upper", lambda1, Relation::lt,
      (rho * beta0 - 2.0 * beta1 + 4.0 * beta2 - 8.0) / (2.0 * rho * beta0)));
  const double excess = 2.0 / kappa - rho;  // = (2 L^2 - rho^2)/rho > 0
  rep.checks.push_back(make_check(
      "lambda_mix_1", beta0 * excess * lambda1 * lambda1 + 2.0 * beta0 * rho * lambda2,
      Relation::lt, (kappa * beta1 / (2.0 * beta0)) * core - 2.0 * (beta2 - 3.0)));
  rep.checks.push_back(make_check(
      "lambda2_upper", lambda2, Relation::lt,
      (12.0 + beta1 - 4.0 * beta2) / (4.0 * rho * beta0)));
  rep.checks.push_back(make_check(
      "lambda_mix_2", beta0 * excess * lambda1 * lambda2, Relation::lt,
      (kappa * beta1 / (2.0 * beta0)) * (beta2 - 4.0) - 3.0));
  rep.checks.push_back(make_check(
      "lambda_mix_3", beta0 * excess * lambda2 * lambda2, Relation::lt,
      (kappa / (2.0 * beta0)) * (beta2 * beta2 - 2.0 * beta2 - 2.0 * beta1)));

  rep.derived["kappa"] = kappa;
  rep.derived["u12"] = kappa * beta1 / (2.0 * beta0);
  rep.derived["u11"] =
      kappa * beta1 * beta2 / (2.0 * beta0) - 3.0 - excess * beta0 * lambda1 * lambda2;
  rep.derived["u10"] = kappa * beta1 * beta1 / (2.0 * beta0) - 2.0 * beta2 -
                       2.0 * beta0 * lambda1 * lambda1 / kappa +
                       beta0 * rho * (lambda1 * lambda1 - 2.0 * lambda2);
  rep.derived["u21"] = kappa * beta2 / (2.0 * beta0);
  rep.derived["u20"] = (kappa / (2.0 * beta0)) * (beta2 * beta2 - 2.0 * beta1) -
                       excess * beta0 * lambda2 * lambda2;
  return rep;
}

// ---------------------------------------------------------------------------
// Optimization flow, case xi2 != 0: forced nu coefficients plus the window on
// (xi1, xi2) that upgrades the anchored rate to the trajectory itself via the
// roots of h(z) = z^2 - (xi1 - xi2) z + xi2.

inline ValidationReport validate_opt_case1(double xi1, double xi2, double alpha0,
                                           bool check_xt_rate) {
  require(xi2 > 0, Error::Kind::parameter, "validate_opt_case1: xi2 must be > 0");
  require(xi1 >= 0, Error::Kind::parameter, "validate_opt_case1: xi1 must be >= 0");
  require(alpha0 > 0, Error::Kind::parameter, "validate_opt_case1: alpha0 must be > 0");

  ValidationReport rep;
  rep.theorem = TheoremId::opt_case1;
  rep.derived["nu1"] = (xi1 + 1.0) / xi2;
  rep.derived["nu2"] = xi1 / xi2 + 2.0;
  if (!check_xt_rate) return rep;

  rep.checks.push_back(make_check("xi2_upper", xi2, Relation::lt, 9.0));
  rep.checks.push_back(make_check("xi1_lower", xi1, Relation::gt, xi2 + 2.0 * std::sqrt(xi2)));
  rep.checks.push_back(make_check("xi1_upper", xi1, Relation::lt, (4.0 * xi2 + 9.0) / 3.0));

  const double disc = (xi1 - xi2) * (xi1 - xi2) - 4.0 * xi2;
  rep.derived["root_discriminant"] = disc;
  if (disc > 0) {
    const double sq = std::sqrt(disc);
    const double p = ((xi1 - xi2) - sq) / 2.0;
    const double q = ((xi1 - xi2) + sq) / 2.0;
    rep.derived["root_p"] = p;
    rep.derived["root_q"] = q;
    rep.checks.push_back(make_check("roots_positive", p, Relation::gt, 0.0));
    rep.checks.push_back(make_check("roots_below_3", q, Relation::lt, 3.0));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Optimization flow, case xi2 == 0: forced nu1 and the lower bound on nu2.
// The trajectory rate carries a secondary term with exponent 1/xi1.

inline ValidationReport validate_opt_case2(double xi1, double nu2, double alpha0) {
  require(xi1 > 0, Error::Kind::parameter, "validate_opt_case2: xi1 must be > 0");
  require(alpha0 > 0, Error::Kind::parameter, "validate_opt_case2: alpha0 must be > 0");

  ValidationReport rep;
  rep.theorem = TheoremId::opt_case2;
  rep.derived["nu1"] =
      ((1.0 + xi1) / xi1) * (nu2 - 2.0) - (1.0 + xi1) / (xi1 * xi1);
  rep.derived["secondary_exponent"] = 1.0 / xi1;
  rep.checks.push_back(make_check("nu2_lower", nu2, Relation::ge, 6.0 + 1.0 / xi1));
  return rep;
}

// ---------------------------------------------------------------------------
// Ergodic O(1/t) rate for constant coefficients on an M-smooth objective.

inline ValidationReport validate_ergodic(double beta0, double beta1, double beta2, double M) {
  require(beta0 > 0 && beta1 > 0 && beta2 > 0 && M > 0, Error::Kind::parameter,
          "validate_ergodic: all inputs must be > 0");
  ValidationReport rep;
  rep.theorem = TheoremId::ergodic;
  rep.checks.push_back(make_check("beta0_upper", beta0, Relation::lt, beta1 * beta2 / M));

  // roots of h(x) = 2 M beta2 x^2 - 4 beta1 beta2 x + 2 beta0 beta1
  const double disc = beta1 * beta2 * (beta1 * beta2 - M * beta0);
  if (disc > 0) {
    const double sq = std::sqrt(disc);
    const double x1 = (beta1 * beta2 - sq) / (M * beta2);
    const double x2 = (beta1 * beta2 + sq) / (M * beta2);
    rep.derived["x1"] = x1;
    rep.derived["x2"] = x2;
    rep.checks.push_back(make_check("window_lower", beta0 / (2.0 * beta2), Relation::lt, x1));
    rep.checks.push_back(make_check("window_upper", x2, Relation::lt, 2.0 * beta1 / M));
    const double A = (x1 + x2) / 2.0;
    rep.derived["A_mid"] = A;
    rep.derived["B_lo"] = 1.0 / (beta2 * (2.0 * A * beta2 - beta0));
    rep.derived["B_hi"] = (1.0 / (beta0 * beta2)) * (2.0 * beta1 / (A * M) - 1.0);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Deterministic sequential feasibility search. Each free parameter is placed
// at the midpoint of its currently feasible interval, in the order the
// corresponding theorem builds its conditions; unbounded-above intervals are
// capped at twice their lower endpoint first. The seed only matters when the
// midpoint cascade fails and jittered retries are needed.

struct Suggestion {
  std::map<std::string, double> params;
  ValidationReport report;
};

namespace detail {

struct Interval {
  double lo, hi;  // open interval unless stated otherwise by the caller
};

inline Interval capped(Interval iv) {
  if (std::isinf(iv.hi)) iv.hi = iv.lo > 0 ? 2.0 * iv.lo : 1.0;
  return iv;
}

inline double pick_mid(const std::string& name, Interval iv) {
  iv = capped(iv);
  require(iv.lo < iv.hi, Error::Kind::infeasible,
          "suggest_parameters: empty feasible interval for " + name);
  return 0.5 * (iv.lo + iv.hi);
}

inline double pick_jitter(const std::string& name, Interval iv, Rng& rng) {
  iv = capped(iv);
  require(iv.lo < iv.hi, Error::Kind::infeasible,
          "suggest_parameters: empty feasible interval for " + name);
  return iv.lo + (iv.hi - iv.lo) * rng.uniform(0.05, 0.95);
}

using Fixed = std::map<std::string, double>;

inline std::optional<double> fixed_value(const Fixed& fixed, const std::string& key) {
  auto it = fixed.find(key);
  if (it == fixed.end()) return std::nullopt;
  return it->second;
}

}  // namespace detail

inline Suggestion suggest_parameters(TheoremId theorem,
                                     const std::map<std::string, double>& fixed,
                                     std::uint64_t seed = 0) {
  using detail::Interval;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Rng rng(seed);

  // One deterministic midpoint pass, then seeded jitter retries.
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto pick = [&](const std::string& name, Interval iv) {
      if (auto v = detail::fixed_value(fixed, name)) return *v;
      return attempt == 0 ? detail::pick_mid(name, iv) : detail::pick_jitter(name, iv, rng);
    };
    auto value_or = [&](const std::string& name, double dflt) {
      if (auto v = detail::fixed_value(fixed, name)) return *v;
      return dflt;
    };

    Suggestion out;
    switch (theorem) {
      case TheoremId::weak_constant: {
        const double omega = value_or("omega_u", 1.0);
        const double q1 = pick("q1", {0.0, kInf});
        const double q2 = pick("q2", {std::sqrt(2.0 * q1), kInf});
        const double q0 = pick("q0", {0.0, omega * q1 * q1 / (2.0 * q2)});
        out.params = {{"q0", q0}, {"q1", q1}, {"q2", q2}, {"omega_u", omega}};
        out.report = validate_weak_constant(q0, q1, q2, omega);
        break;
      }
      case TheoremId::weak_exp_family: {
        const double omega = value_or("omega_u", 1.0);
        const double p1 = value_or("p1", 0.0);
        const double q1 = pick("q1", {0.0, kInf});
        const double a1 = p1 + q1;
        const double q2 =
            pick("q2", {std::max(a1 / std::sqrt(q1), std::sqrt(2.0 * a1)), kInf});
        const double p0 = pick("p0", {0.0, q2 * std::sqrt(q1) / a1 - 1.0});
        const double p2 = value_or("p2", 0.0);
        const double lead = q1 * q2 * q2 - a1 * a1 * (p0 + 1.0) * (p0 + 1.0);
        const double wmin = std::max({2.0 * (p2 + q2) / (q1 * q1), 1.0 / (q1 * q2),
                                      (q2 + a1 * (p0 + 1.0) / std::sqrt(q1)) / lead});
        const double q0 = pick("q0", {0.0, omega / wmin});
        const double w = omega / q0;
        const double tau1 =
            pick("tau1", {0.0, std::sqrt(w * (omega * q1 * q1 / q0 - 2.0 * (p2 + q2)))});
        const double cap37 = w * std::min(omega * q1 * q2 / q0 - 1.0,
                                          tau1 * std::sqrt(q2 * q2 - 2.0 * a1));
        const double cap38 = (omega * q1 / (omega * q1 * q2 - q0)) *
                             (lead * w * w - 2.0 * q2 * w + 1.0 / q1);
        const double tau2 = pick("tau2", {0.0, std::min(cap37, cap38) / std::max(tau1, 1e-300)});
        ExpSchedule s;
        s.p0 = p0; s.p1 = p1; s.p2 = p2;
        s.q0 = q0; s.q1 = q1; s.q2 = q2;
        s.r0 = value_or("r0", 1.0); s.r1 = value_or("r1", 1.0); s.r2 = value_or("r2", 1.0);
        s.tau1 = tau1; s.tau2 = tau2;
        s.m1 = value_or("m1", 1.0); s.m2 = value_or("m2", 1.0);
        out.params = {{"p0", s.p0}, {"p1", s.p1}, {"p2", s.p2}, {"q0", s.q0}, {"q1", s.q1},
                      {"q2", s.q2}, {"r0", s.r0}, {"r1", s.r1}, {"r2", s.r2},
                      {"tau1", s.tau1}, {"tau2", s.tau2}, {"m1", s.m1}, {"m2", s.m2},
                      {"omega_u", omega}};
        out.report = validate_weak_exp_family(s, omega);
        break;
      }
      case TheoremId::exp_rate: {
        const double rho = value_or("rho", 1.0);
        const double L = value_or("L_u", 1.0);
        const double kappa = rho / (L * L), rk = rho * kappa;
        const double b2 = pick("beta2", {std::max({4.0 + 12.0 / rk, 6.0, 16.0 / rk}), kInf});
        const double b1 =
            pick("beta1", {std::max(4.0 * (b2 - 3.0), (8.0 / rk) * (b2 - 3.0)),
                           b2 * (b2 - 2.0) / 2.0});
        const double core = b1 - 2.0 * b2 + 4.0;
        const double b0 =
            pick("beta0", {(2.0 / rho) * core,
                           (kappa * b1 / 2.0) *
                               std::min(core / (2.0 * (b2 - 3.0)), (b2 - 4.0) / 3.0)});
        const double l1 = value_or("lambda1", 0.0);
        const double l2 = value_or("lambda2", 0.0);
        out.params = {{"beta0", b0}, {"beta1", b1}, {"beta2", b2}, {"lambda1", l1},
                      {"lambda2", l2}, {"rho", rho}, {"L_u", L}};
        out.report = validate_exp_rate(b0, b1, b2, l1, l2, rho, L);
        break;
      }
      case TheoremId::opt_case1: {
        const double xi2 = pick("xi2", {0.0, 9.0});
        const double xi1 =
            pick("xi1", {xi2 + 2.0 * std::sqrt(xi2), (4.0 * xi2 + 9.0) / 3.0});
        const double a0 = value_or("alpha0", 1.0);
        out.params = {{"xi1", xi1}, {"xi2", xi2}, {"alpha0", a0}};
        out.report = validate_opt_case1(xi1, xi2, a0, true);
        break;
      }
      case TheoremId::opt_case2: {
        const double xi1 = value_or("xi1", 1.0);
        const double nu2 = pick("nu2", {6.0 + 1.0 / xi1, kInf});
        const double a0 = value_or("alpha0", 1.0);
        out.params = {{"xi1", xi1}, {"nu2", nu2}, {"alpha0", a0},
                      {"nu1", ((1.0 + xi1) / xi1) * (nu2 - 2.0) - (1.0 + xi1) / (xi1 * xi1)}};
        out.report = validate_opt_case2(xi1, nu2, a0);
        break;
      }
      case TheoremId::ergodic: {
        const double M = value_or("M", 1.0);
        const double b1 = pick("beta1", {0.0, kInf});
        const double b2 = pick("beta2", {0.0, kInf});
        const double b0 = pick("beta0", {0.0, b1 * b2 / M});
        out.params = {{"beta0", b0}, {"beta1", b1}, {"beta2", b2}, {"M", M}};
        out.report = validate_ergodic(b0, b1, b2, M);
        break;
      }
      case TheoremId::assumption_main:
        fail(Error::Kind::capability,
             "suggest_parameters: assumption_main validates full schedules, not parameter sets");
    }
    if (out.report.pass()) return out;
  }
  fail(Error::Kind::infeasible,
       "suggest_parameters: no feasible point found for the given constraints");
}

}  // namespace triflow
