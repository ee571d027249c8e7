#pragma once

#include "triflow/core.hpp"
#include "triflow/integrator.hpp"
#include "triflow/schedules.hpp"

#include <functional>
#include <string>
#include <vector>

namespace triflow {

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> value;

  std::size_t size() const { return t.size(); }
};

/// Largest per-step increase normalized by 1 + |value|; a nonincreasing
/// series stays <= 0 up to integration error.
inline double worst_relative_increase(const TimeSeries& series) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < series.size(); ++k) {
    const double inc =
        (series.value[k + 1] - series.value[k]) / (1.0 + std::abs(series.value[k]));
    worst = std::max(worst, inc);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Lyapunov function of the weak-convergence analysis:
//   h = y'' + beta2 y' + (beta1 - beta2') y + A2 z1' + (A1 - A2') z1 + B1 z2
// with y = ||x - x*||^2, z1 = ||x'||^2, z2 = ||x''||^2.

inline TimeSeries lyapunov_weak(const Trajectory& traj, const DerivedCoefficients& dc,
                                const Vector& x_star) {
  require(x_star.size() > 0, Error::Kind::precondition, "lyapunov_weak: x_star required");
  TimeSeries out;
  out.t.reserve(traj.records.size());
  out.value.reserve(traj.records.size());
  for (const auto& r : traj.records) {
    const ScheduleValues s = eval_schedule(dc.schedule(), r.t);
    const auto at = dc(r.t);
    const Vector d = r.x - x_star;
    const double y = d.squaredNorm();
    const double dy = 2.0 * r.v.dot(d);
    const double ddy = 2.0 * r.a.dot(d) + 2.0 * r.v.squaredNorm();
    const double z1 = r.v.squaredNorm();
    const double dz1 = 2.0 * r.a.dot(r.v);
    const double z2 = r.a.squaredNorm();
    const double h = ddy + s.beta2 * dy + (s.beta1 - s.dbeta2) * y + at.A2 * dz1 +
                     (at.A1 - at.dA2) * z1 + at.B1 * z2;
    out.t.push_back(r.t);
    out.value.push_back(h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Norm-expansion identities used throughout the rate proofs. Each identity is
// checked as direct norm (left) versus scalar combination (right); both sides
// are exact algebra, so residuals beyond rounding refute the implementation.

struct IdentitySample {
  Vector x, v, a, x3;  // state and third derivative
  Vector x_star;
};

struct IdentityResiduals {
  double flow_norm;    // ||x''' + b2 x'' + b1 x'||^2 expansion
  double damping_mix;  // ||l1 x' + l2 x''||^2 expansion
  double anchor_norm;  // ||phi_x - x*||^2 expansion
  double max_rel;
};

inline IdentityResiduals check_norm_identities(const IdentitySample& st, double beta1,
                                               double beta2, double lambda1, double lambda2) {
  const double z1 = st.v.squaredNorm();
  const double dz1 = 2.0 * st.a.dot(st.v);
  const double ddz1 = 2.0 * st.a.squaredNorm() + 2.0 * st.x3.dot(st.v);
  const double z2 = st.a.squaredNorm();
  const double dz2 = 2.0 * st.x3.dot(st.a);
  const double z3 = st.x3.squaredNorm();
  const Vector d = st.x - st.x_star;
  const double y = d.squaredNorm();
  const double dy = 2.0 * st.v.dot(d);
  const double ddy = 2.0 * st.a.dot(d) + 2.0 * z1;

  auto rel = [](double lhs, double rhs) { return std::abs(lhs - rhs) / (1.0 + std::abs(lhs)); };

  const double lhs1 = (st.x3 + beta2 * st.a + beta1 * st.v).squaredNorm();
  const double rhs1 = beta1 * ddz1 + beta1 * beta2 * dz1 + beta1 * beta1 * z1 + beta2 * dz2 +
                      (beta2 * beta2 - 2.0 * beta1) * z2 + z3;

  const double lhs2 = (lambda1 * st.v + lambda2 * st.a).squaredNorm();
  const double rhs2 =
      lambda1 * lambda1 * z1 + lambda2 * lambda2 * z2 + lambda1 * lambda2 * dz1;

  const double lhs3 = (d + lambda1 * st.v + lambda2 * st.a).squaredNorm();
  const double rhs3 = lambda2 * ddy + lambda1 * dy + y + lambda1 * lambda2 * dz1 +
                      (lambda1 * lambda1 - 2.0 * lambda2) * z1 + lambda2 * lambda2 * z2;

  IdentityResiduals res{rel(lhs1, rhs1), rel(lhs2, rhs2), rel(lhs3, rhs3), 0.0};
  res.max_rel = std::max({res.flow_norm, res.damping_mix, res.anchor_norm});
  return res;
}

// ---------------------------------------------------------------------------
// Least-squares decay-rate fits.

enum class RateModel { power, exponential };

struct RateEstimate {
  RateModel model = RateModel::power;
  double s = 0.0;   // exponent (power) or rate (exponential)
  double C = 0.0;   // multiplicative constant
  double r2 = 0.0;  // goodness of fit on the linearized data
  double t_lo = 0.0, t_hi = 0.0;
  int points = 0;
};

inline RateEstimate fit_rate(const TimeSeries& series, RateModel model, double t_lo,
                             double t_hi) {
  require(t_lo < t_hi, Error::Kind::domain, "fit_rate: empty window");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double t = series.t[k];
    if (t < t_lo || t > t_hi) continue;
    const double v = series.value[k];
    require(v > 0, Error::Kind::domain,
            "fit_rate: nonpositive value at t = " + std::to_string(t) +
                " (clip at a positive floor first)");
    if (model == RateModel::power) {
      require(t > 0, Error::Kind::domain, "fit_rate: power model needs t > 0");
      xs.push_back(std::log(t));
    } else {
      xs.push_back(t);
    }
    ys.push_back(std::log(v));
  }
  require(xs.size() >= 10, Error::Kind::domain, "fit_rate: fewer than 10 points in window");

  const auto n = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateEstimate est;
  est.model = model;
  est.s = sxy / sxx;
  est.C = std::exp(my - est.s * mx);
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double yhat = my + est.s * (xs[i] - mx);
    ss_res += (ys[i] - yhat) * (ys[i] - yhat);
  }
  est.r2 = syy > 0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  est.t_lo = t_lo;
  est.t_hi = t_hi;
  est.points = static_cast<int>(xs.size());
  return est;
}

// ---------------------------------------------------------------------------
// Rate-transfer check: from g(y + xi t y') <= M1/t^3 on samples, the explicit
// constants M2 = M1/(1 - 3 xi) and M3 = t0^{1/xi} g(y(t0)) - M2 t0^{1/xi - 3}
// must dominate g(y(t)) t^3 <= M2 + M3 t^{3 - 1/xi}.

struct RateTransferReport {
  bool hypothesis_ok = false;
  double worst_hypothesis_violation = 0.0;  // max of g(phi) t^3 - M1
  bool bound_ok = false;
  double worst_bound_violation = 0.0;  // max of g(y) t^3 - (M2 + M3 t^{3-1/xi})
  double M2 = 0.0, M3 = 0.0;
};

inline RateTransferReport verify_rate_transfer(const std::function<Vector(double)>& y,
                                               const std::function<Vector(double)>& yprime,
                                               const Objective& g, double xi, double t0,
                                               double M1, const std::vector<double>& times) {
  require(xi > 0, Error::Kind::domain, "verify_rate_transfer: xi must be > 0");
  require(std::abs(xi - 1.0 / 3.0) > 1e-12, Error::Kind::domain,
          "verify_rate_transfer: xi = 1/3 is excluded");
  require(t0 > 0, Error::Kind::domain, "verify_rate_transfer: t0 must be > 0");
  require(!times.empty(), Error::Kind::domain, "verify_rate_transfer: no sample times");

  RateTransferReport rep;
  double worst_h = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    require(t >= t0, Error::Kind::domain, "verify_rate_transfer: sample before t0");
    const Vector phi = y(t) + xi * t * yprime(t);
    worst_h = std::max(worst_h, g(phi) * t * t * t - M1);
  }
  rep.worst_hypothesis_violation = worst_h;
  rep.hypothesis_ok = worst_h <= 1e-9 * (1.0 + M1);
  if (!rep.hypothesis_ok) return rep;

  rep.M2 = M1 / (1.0 - 3.0 * xi);
  rep.M3 = std::pow(t0, 1.0 / xi) * g(y(t0)) - rep.M2 * std::pow(t0, 1.0 / xi - 3.0);
  double worst_b = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    const double bound = rep.M2 + rep.M3 * std::pow(t, 3.0 - 1.0 / xi);
    worst_b = std::max(worst_b, g(y(t)) * t * t * t - bound);
  }
  rep.worst_bound_violation = worst_b;
  rep.bound_ok = worst_b <= 1e-9 * (1.0 + std::abs(rep.M2) + std::abs(rep.M3));
  return rep;
}

// ---------------------------------------------------------------------------
// Lyapunov functions of the two optimization-flow cases. Both are
// nonincreasing along exact trajectories; sampled series inherit that up to
// integration error.

inline TimeSeries lyapunov_opt_case1(const Trajectory& traj, double xi1, double xi2,
                                     double alpha0, const Objective& f, double f_star,
                                     const Vector& x_star) {
  require(xi2 > 0, Error::Kind::parameter,
          "lyapunov_opt_case1: xi2 must be > 0 (use lyapunov_opt_case2 for xi2 = 0)");
  const double nu1 = (xi1 + 1.0) / xi2;
  const double nu2 = xi1 / xi2 + 2.0;
  const double bracket = nu1 - nu2 + 2.0;
  TimeSeries out;
  for (const auto& r : traj.records) {
    const double t = r.t;
    const Vector phi = r.x + xi1 * t * r.v + xi2 * t * t * r.a;
    const Vector mix = t * t * r.a + (xi1 / xi2) * t * r.v + bracket * (r.x - x_star);
    const double V =
        (alpha0 * t * t * t / (3.0 * xi2)) * (f(phi) - f_star) + 0.5 * mix.squaredNorm();
    out.t.push_back(t);
    out.value.push_back(V);
  }
  return out;
}

inline TimeSeries lyapunov_opt_case2(const Trajectory& traj, double xi1, double nu2,
                                     double alpha0, const Objective& f, double f_star,
                                     const Vector& x_star) {
  require(xi1 > 0, Error::Kind::parameter, "lyapunov_opt_case2: xi1 must be > 0");
  const double bracket = (nu2 - 2.0) / xi1 - (1.0 + xi1) / (xi1 * xi1);
  TimeSeries out;
  for (const auto& r : traj.records) {
    const double t = r.t;
    const Vector phi = r.x + xi1 * t * r.v;
    const Vector mix = t * t * r.a + (nu2 - 2.0) * t * r.v + bracket * (r.x - x_star);
    const double V = (alpha0 * t * t * t / xi1) * (f(phi) - f_star) + 0.5 * mix.squaredNorm();
    out.t.push_back(t);
    out.value.push_back(V);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Objective gap at the running trajectory average (trapezoid rule).

inline TimeSeries ergodic_gap(const Trajectory& traj, const Objective& f, double f_star) {
  require(traj.records.size() >= 2, Error::Kind::domain,
          "ergodic_gap: need at least two records");
  TimeSeries out;
  Vector integral = Vector::Zero(traj.records.front().x.size());
  const double t0 = traj.records.front().t;
  for (std::size_t k = 1; k < traj.records.size(); ++k) {
    const auto& prev = traj.records[k - 1];
    const auto& cur = traj.records[k];
    integral += 0.5 * (cur.t - prev.t) * (cur.x + prev.x);
    const Vector avg = integral / (cur.t - t0);
    out.t.push_back(cur.t);
    out.value.push_back(f(avg) - f_star);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nested factorization of the anchor point: with h-roots p and q, the anchor
// phi_x = (x + q t x') + p t (x + q t x')' lets the O(1/t^3) bound transfer
// first to x + q t x' and then to x itself.

struct NestedSeries {
  std::vector<double> t;
  std::vector<double> inner_gap;  // f(x + q t x') - f*
  std::vector<double> x_gap;      // f(x) - f*
  double max_identity_residual = 0.0;
};

inline NestedSeries nested_factor_trajectories(const Trajectory& traj, double p, double q,
                                               const Objective& f, double f_star) {
  const double xi1 = p + q + p * q;
  const double xi2 = p * q;
  NestedSeries out;
  for (const auto& r : traj.records) {
    const double t = r.t;
    const Vector inner = r.x + q * t * r.v;
    const Vector dinner = (1.0 + q) * r.v + q * t * r.a;
    const Vector composite = inner + p * t * dinner;
    const Vector phi = r.x + xi1 * t * r.v + xi2 * t * t * r.a;
    out.max_identity_residual =
        std::max(out.max_identity_residual,
                 (composite - phi).norm() / (1.0 + phi.norm()));
    out.t.push_back(t);
    out.inner_gap.push_back(f(inner) - f_star);
    out.x_gap.push_back(f(r.x) - f_star);
  }
  return out;
}

}  // namespace triflow
