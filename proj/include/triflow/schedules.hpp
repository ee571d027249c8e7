#pragma once

#include "triflow/core.hpp"

#include <algorithm>
#include <string>
#include <variant>

namespace triflow {

/// Values of the five coefficient functions and their first two derivatives
/// at a single time. All derivatives are analytic closed forms.
struct ScheduleValues {
  double beta0, beta1, beta2, lambda1, lambda2;
  double dbeta0, dbeta1, dbeta2, dlambda1, dlambda2;
  double ddbeta0, ddbeta1, ddbeta2, ddlambda1, ddlambda2;
};

struct ConstantSchedule {
  double q0 = 1.0, q1 = 1.0, q2 = 1.0;
  double lambda1 = 0.0, lambda2 = 0.0;
  double t0 = 0.0;
};

/// beta_j(t) = p_j e^{-r_j t} + q_j for j = 1,2; beta_0(t) = q0 / (p0 e^{-r0 t} + 1);
/// lambda_j(t) = tau_j (1 - e^{-m_j t}).
struct ExpSchedule {
  double p0 = 0.0, p1 = 0.0, p2 = 0.0;
  double q0 = 1.0, q1 = 1.0, q2 = 1.0;
  double r0 = 0.0, r1 = 0.0, r2 = 0.0;
  double tau1 = 0.0, tau2 = 0.0;
  double m1 = 0.0, m2 = 0.0;
  double t0 = 0.0;
};

/// lambda2 = xi2 t^2, lambda1 = xi1 t, beta2 = nu2/t, beta1 = nu1/t^2,
/// beta0 = alpha0. Singular at t = 0, so t0 must be positive.
struct PolySchedule {
  double xi1 = 0.0, xi2 = 0.0;
  double nu1 = 1.0, nu2 = 1.0;
  double alpha0 = 1.0;
  double t0 = 1.0;
};

using Schedule = std::variant<ConstantSchedule, ExpSchedule, PolySchedule>;

inline void validate_schedule(const ConstantSchedule& s) {
  require(s.q0 >= 0 && s.q1 >= 0 && s.q2 >= 0, Error::Kind::parameter,
          "constant schedule: q0, q1, q2 must be >= 0");
  require(s.lambda1 >= 0 && s.lambda2 >= 0, Error::Kind::parameter,
          "constant schedule: lambda1, lambda2 must be >= 0");
  require(s.t0 >= 0, Error::Kind::parameter, "constant schedule: t0 must be >= 0");
}

inline void validate_schedule(const ExpSchedule& s) {
  require(s.q0 > 0 && s.q1 > 0 && s.q2 > 0, Error::Kind::parameter,
          "exp schedule: q0, q1, q2 must be > 0");
  require(s.p0 >= 0 && s.p1 >= 0 && s.p2 >= 0, Error::Kind::parameter,
          "exp schedule: p_j must be >= 0");
  require(s.r0 >= 0 && s.r1 >= 0 && s.r2 >= 0, Error::Kind::parameter,
          "exp schedule: r_j must be >= 0");
  require(s.tau1 >= 0 && s.tau2 >= 0, Error::Kind::parameter, "exp schedule: tau_j must be >= 0");
  require(s.m1 >= 0 && s.m2 >= 0, Error::Kind::parameter, "exp schedule: m_j must be >= 0");
  require(s.t0 >= 0, Error::Kind::parameter, "exp schedule: t0 must be >= 0");
}

inline void validate_schedule(const PolySchedule& s) {
  require(s.xi1 >= 0 && s.xi2 >= 0, Error::Kind::parameter, "poly schedule: xi1, xi2 must be >= 0");
  require(s.nu1 > 0 && s.nu2 > 0, Error::Kind::parameter, "poly schedule: nu1, nu2 must be > 0");
  require(s.alpha0 > 0, Error::Kind::parameter, "poly schedule: alpha0 must be > 0");
  require(s.t0 > 0, Error::Kind::parameter,
          "poly schedule: t0 must be > 0 (beta1, beta2 singular at t = 0)");
}

inline void validate_schedule(const Schedule& s) {
  std::visit([](const auto& fam) { validate_schedule(fam); }, s);
}

inline double start_time(const Schedule& s) {
  return std::visit([](const auto& fam) { return fam.t0; }, s);
}

inline ScheduleValues eval_schedule(const ConstantSchedule& s, double) {
  ScheduleValues v{};
  v.beta0 = s.q0;
  v.beta1 = s.q1;
  v.beta2 = s.q2;
  v.lambda1 = s.lambda1;
  v.lambda2 = s.lambda2;
  return v;
}

inline ScheduleValues eval_schedule(const ExpSchedule& s, double t) {
  ScheduleValues v{};
  const double e1 = std::exp(-s.r1 * t), e2 = std::exp(-s.r2 * t);
  v.beta1 = s.p1 * e1 + s.q1;
  v.dbeta1 = -s.p1 * s.r1 * e1;
  v.ddbeta1 = s.p1 * s.r1 * s.r1 * e1;
  v.beta2 = s.p2 * e2 + s.q2;
  v.dbeta2 = -s.p2 * s.r2 * e2;
  v.ddbeta2 = s.p2 * s.r2 * s.r2 * e2;

  const double w = s.p0 * std::exp(-s.r0 * t);  // beta0 = q0 / (w + 1), w' = -r0 w
  const double den = w + 1.0;
  v.beta0 = s.q0 / den;
  v.dbeta0 = s.q0 * s.r0 * w / (den * den);
  v.ddbeta0 = s.q0 * s.r0 * s.r0 * w * (w - 1.0) / (den * den * den);

  const double f1 = std::exp(-s.m1 * t), f2 = std::exp(-s.m2 * t);
  v.lambda1 = s.tau1 * (1.0 - f1);
  v.dlambda1 = s.tau1 * s.m1 * f1;
  v.ddlambda1 = -s.tau1 * s.m1 * s.m1 * f1;
  v.lambda2 = s.tau2 * (1.0 - f2);
  v.dlambda2 = s.tau2 * s.m2 * f2;
  v.ddlambda2 = -s.tau2 * s.m2 * s.m2 * f2;
  return v;
}

inline ScheduleValues eval_schedule(const PolySchedule& s, double t) {
  ScheduleValues v{};
  v.beta0 = s.alpha0;
  v.beta1 = s.nu1 / (t * t);
  v.dbeta1 = -2.0 * s.nu1 / (t * t * t);
  v.ddbeta1 = 6.0 * s.nu1 / (t * t * t * t);
  v.beta2 = s.nu2 / t;
  v.dbeta2 = -s.nu2 / (t * t);
  v.ddbeta2 = 2.0 * s.nu2 / (t * t * t);
  v.lambda1 = s.xi1 * t;
  v.dlambda1 = s.xi1;
  v.lambda2 = s.xi2 * t * t;
  v.dlambda2 = 2.0 * s.xi2 * t;
  v.ddlambda2 = 2.0 * s.xi2;
  return v;
}

inline ScheduleValues eval_schedule(const Schedule& s, double t) {
  require(t >= start_time(s), Error::Kind::domain, "eval_schedule: t < t0");
  return std::visit([t](const auto& fam) { return eval_schedule(fam, t); }, s);
}

/// inf/sup of beta_j over [t0, inf), from the family closed forms.
struct ScheduleBounds {
  double c0, c1, c2;  // infima
  double a0, a1, a2;  // suprema
};

inline ScheduleBounds schedule_bounds(const ConstantSchedule& s) {
  return {s.q0, s.q1, s.q2, s.q0, s.q1, s.q2};
}

inline ScheduleBounds schedule_bounds(const ExpSchedule& s) {
  // beta1, beta2 decrease toward q_j; beta0 increases toward q0.
  const double e0 = std::exp(-s.r0 * s.t0), e1 = std::exp(-s.r1 * s.t0), e2 = std::exp(-s.r2 * s.t0);
  ScheduleBounds b{};
  b.c0 = s.q0 / (s.p0 * e0 + 1.0);
  b.a0 = s.q0;
  b.c1 = s.q1;
  b.a1 = s.p1 * e1 + s.q1;
  b.c2 = s.q2;
  b.a2 = s.p2 * e2 + s.q2;
  return b;
}

inline ScheduleBounds schedule_bounds(const PolySchedule& s) {
  // beta1, beta2 decay to zero; only the suprema (at t0) are finite and useful.
  ScheduleBounds b{};
  b.c0 = b.a0 = s.alpha0;
  b.c1 = 0.0;
  b.a1 = s.nu1 / (s.t0 * s.t0);
  b.c2 = 0.0;
  b.a2 = s.nu2 / s.t0;
  return b;
}

inline ScheduleBounds schedule_bounds(const Schedule& s) {
  return std::visit([](const auto& fam) { return schedule_bounds(fam); }, s);
}

// ---------------------------------------------------------------------------
// The auxiliary function D and the derived coefficient block.

struct ConstantDamping {
  double d = 1.0;
};

/// D(t) = d1 - d2 e^{-t}; increasing and concave, saturating at d1.
struct SaturatingDamping {
  double d1 = 1.0, d2 = 0.0;
};

using DampingSpec = std::variant<ConstantDamping, SaturatingDamping>;

struct DampingValues {
  double D, dD, ddD;
};

inline DampingValues eval_damping(const DampingSpec& spec, double t) {
  if (const auto* c = std::get_if<ConstantDamping>(&spec)) return {c->d, 0.0, 0.0};
  const auto& s = std::get<SaturatingDamping>(spec);
  const double e = std::exp(-t);
  return {s.d1 - s.d2 * e, s.d2 * e, -s.d2 * e};
}

inline double damping_sup(const DampingSpec& spec) {
  if (const auto* c = std::get_if<ConstantDamping>(&spec)) return c->d;
  return std::get<SaturatingDamping>(spec).d1;
}

/// The six coefficient functions built from a schedule, a damping function D
/// and the quasi-cocoercivity modulus omega_u:
///
///   A2 = (2w - D) b1 / b0
///   A1 = (2w - D) b1 b2 / b0 - (b0/D) l1 l2 - 3
///   A0 = (2w - D) b1^2 / b0 - (b0/D) l1^2 - 2 b2
///   B1 = (2w - D) b2 / b0
///   B0 = ((2w - D)/b0)(b2^2 - 2 b1) - (b0/D) l2^2
///   C0 = (2w - D) / b0
///
/// Construction grid-checks 0 < D < 2 omega_u on [t0, t0 + 1e4].
class DerivedCoefficients {
 public:
  static constexpr int kGridPoints = 1000;
  static constexpr double kGridSpan = 1e4;

  DerivedCoefficients(Schedule schedule, DampingSpec damping, double omega_u)
      : schedule_(std::move(schedule)), damping_(damping), omega_u_(omega_u) {
    require(omega_u_ > 0, Error::Kind::parameter, "derived coefficients: omega_u must be > 0");
    validate_schedule(schedule_);
    for (double t : log_grid(start_time(schedule_), kGridSpan, kGridPoints)) {
      const double D = eval_damping(damping_, t).D;
      if (!(D > 0.0 && D < 2.0 * omega_u_))
        fail(Error::Kind::domain,
             "derived coefficients: D(t) outside (0, 2 omega_u) at t = " + std::to_string(t));
    }
  }

  struct At {
    double A2, A1, A0, B1, B0, C0;
    double dA2, ddA2, dA1, dB1;
  };

  At operator()(double t) const {
    const ScheduleValues s = eval_schedule(schedule_, t);
    const DampingValues d = eval_damping(damping_, t);
    const double E = 2.0 * omega_u_ - d.D;  // E' = -D', E'' = -D''
    const double dE = -d.dD, ddE = -d.ddD;
    const double b0 = s.beta0, b1 = s.beta1, b2 = s.beta2;
    const double l1 = s.lambda1, l2 = s.lambda2;

    const double g = b1 / b0;
    const double dg = s.dbeta1 / b0 - b1 * s.dbeta0 / (b0 * b0);
    const double ddg = s.ddbeta1 / b0 - 2.0 * s.dbeta1 * s.dbeta0 / (b0 * b0) -
                       b1 * s.ddbeta0 / (b0 * b0) + 2.0 * b1 * s.dbeta0 * s.dbeta0 / (b0 * b0 * b0);

    const double u = b1 * b2 / b0;
    const double du = (s.dbeta1 * b2 + b1 * s.dbeta2) / b0 - b1 * b2 * s.dbeta0 / (b0 * b0);

    const double w = (b0 / d.D) * l1 * l2;
    const double dw = (s.dbeta0 / d.D - b0 * d.dD / (d.D * d.D)) * l1 * l2 +
                      (b0 / d.D) * (s.dlambda1 * l2 + l1 * s.dlambda2);

    At at{};
    at.A2 = E * g;
    at.dA2 = dE * g + E * dg;
    at.ddA2 = ddE * g + 2.0 * dE * dg + E * ddg;
    at.A1 = E * u - w - 3.0;
    at.dA1 = dE * u + E * du - dw;
    at.A0 = E * b1 * b1 / b0 - (b0 / d.D) * l1 * l1 - 2.0 * b2;
    at.B1 = E * b2 / b0;
    at.dB1 = dE * b2 / b0 + E * (s.dbeta2 / b0 - b2 * s.dbeta0 / (b0 * b0));
    at.B0 = (E / b0) * (b2 * b2 - 2.0 * b1) - (b0 / d.D) * l2 * l2;
    at.C0 = E / b0;
    return at;
  }

  const Schedule& schedule() const { return schedule_; }
  const DampingSpec& damping() const { return damping_; }
  double omega_u() const { return omega_u_; }

 private:
  Schedule schedule_;
  DampingSpec damping_;
  double omega_u_;
};

}  // namespace triflow
