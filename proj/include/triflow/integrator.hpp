#pragma once

#include "triflow/core.hpp"
#include "triflow/operators.hpp"
#include "triflow/schedules.hpp"

#include <optional>
#include <vector>

namespace triflow {

struct SystemState {
  double t = 0.0;
  Vector x, v, a;  // position, velocity, acceleration
};

enum class Method { rk4_fixed, rk45_adaptive };

struct SolverConfig {
  Method method = Method::rk45_adaptive;
  double h = 1e-2;  // fixed step for rk4
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 1.0;
  double t_end = 10.0;
  std::optional<double> stop_residual;  // stop once ||U(x(t))|| falls below
  int record_every = 1;
};

enum class Termination { reached_t_end, residual_met, nonfinite_abort };

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::reached_t_end: return "reached_t_end";
    case Termination::residual_met: return "residual_met";
    case Termination::nonfinite_abort: return "nonfinite_abort";
  }
  return "?";
}

struct TrajectoryRecord {
  double t;
  Vector x, v, a;
  double residual;  // ||U(x(t))||, not the anchored residual
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Termination termination = Termination::reached_t_end;
  long steps = 0;
  long rejected_steps = 0;

  const TrajectoryRecord& front() const { return records.front(); }
  const TrajectoryRecord& back() const { return records.back(); }
};

struct Derivative {
  Vector dx, dv, da;
};

/// Right-hand side of the first-order reformulation:
///   x' = v, v' = a, a' = -beta1 v - beta2 a - beta0 U(x + lambda1 v + lambda2 a).
inline Derivative rhs(const Schedule& schedule, const OperatorSpec& U, const SystemState& st) {
  const ScheduleValues s = eval_schedule(schedule, st.t);
  const Vector anchor = st.x + s.lambda1 * st.v + s.lambda2 * st.a;
  Vector u = U(anchor);
  require_finite(u, "rhs: operator output");
  return {st.v, st.a, Vector(-s.beta1 * st.v - s.beta2 * st.a - s.beta0 * u)};
}

namespace detail {

// Stacked-state right-hand side; returns false if the operator output is
// non-finite so the caller can abort and keep the partial trajectory.
class StackedSystem {
 public:
  StackedSystem(const Schedule& schedule, const OperatorSpec& U, Eigen::Index n)
      : schedule_(schedule), U_(U), n_(n) {}

  bool operator()(double t, const Vector& y, Vector& dy) const {
    const ScheduleValues s = eval_schedule(schedule_, t);
    const auto x = y.segment(0, n_), v = y.segment(n_, n_), a = y.segment(2 * n_, n_);
    const Vector u = U_(x + s.lambda1 * v + s.lambda2 * a);
    if (!u.allFinite()) return false;
    dy.segment(0, n_) = v;
    dy.segment(n_, n_) = a;
    dy.segment(2 * n_, n_) = -s.beta1 * v - s.beta2 * a - s.beta0 * u;
    return dy.allFinite();
  }

 private:
  const Schedule& schedule_;
  const OperatorSpec& U_;
  Eigen::Index n_;
};

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,      0.0,        500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,     0.0,          7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace detail

/// Integrate the third-order flow from init.t (= schedule start) to t_end or
/// until the residual stop threshold fires. Throws on parameter errors and
/// step underflow; a non-finite operator output ends the run with a partial
/// trajectory marked nonfinite_abort.
inline Trajectory integrate(const Schedule& schedule, const OperatorSpec& U,
                            const SystemState& init, const SolverConfig& cfg) {
  validate_schedule(schedule);
  const double t0 = start_time(schedule);
  require(init.t == t0, Error::Kind::parameter, "integrate: init.t must equal schedule t0");
  require(cfg.t_end > t0, Error::Kind::parameter, "integrate: t_end must exceed t0");
  require(init.x.size() == init.v.size() && init.x.size() == init.a.size(),
          Error::Kind::parameter, "integrate: state dimensions differ");
  require_finite(init.x, "integrate: x0");
  require_finite(init.v, "integrate: v0");
  require_finite(init.a, "integrate: a0");
  require(cfg.record_every >= 1, Error::Kind::parameter, "integrate: record_every must be >= 1");
  if (cfg.method == Method::rk4_fixed)
    require(cfg.h > 0, Error::Kind::parameter, "integrate: fixed step h must be > 0");
  else
    require(cfg.abs_tol > 0 && cfg.rel_tol >= 0 && cfg.h_min > 0 && cfg.h_max >= cfg.h_min,
            Error::Kind::parameter, "integrate: bad adaptive tolerances");

  const Eigen::Index n = init.x.size();
  detail::StackedSystem f(schedule, U, n);

  Vector y(3 * n);
  y << init.x, init.v, init.a;
  double t = t0;

  Trajectory traj;
  auto residual_at = [&](const Vector& state) {
    return U(state.segment(0, n)).norm();
  };
  auto record = [&](double tt, const Vector& state, double res) {
    traj.records.push_back({tt, state.segment(0, n), state.segment(n, n),
                            state.segment(2 * n, n), res});
  };

  {
    const double res0 = residual_at(y);
    record(t, y, res0);
    if (cfg.stop_residual && res0 <= *cfg.stop_residual) {
      traj.termination = Termination::residual_met;
      return traj;
    }
  }

  long accepted_since_record = 0;
  auto on_accept = [&](double tt, const Vector& state) -> bool {
    ++traj.steps;
    ++accepted_since_record;
    const bool at_end = tt >= cfg.t_end;
    const double res = residual_at(state);
    if (accepted_since_record >= cfg.record_every || at_end ||
        (cfg.stop_residual && res <= *cfg.stop_residual)) {
      record(tt, state, res);
      accepted_since_record = 0;
    }
    if (cfg.stop_residual && res <= *cfg.stop_residual) {
      traj.termination = Termination::residual_met;
      return false;
    }
    if (at_end) {
      traj.termination = Termination::reached_t_end;
      return false;
    }
    return true;
  };

  Vector k[7], ytmp(3 * n), ynew(3 * n), y4(3 * n);
  for (auto& ki : k) ki.resize(3 * n);

  if (cfg.method == Method::rk4_fixed) {
    Vector k1(3 * n), k2(3 * n), k3(3 * n), k4(3 * n);
    while (true) {
      const double h = std::min(cfg.h, cfg.t_end - t);
      bool ok = f(t, y, k1);
      ok = ok && f(t + 0.5 * h, Vector(y + 0.5 * h * k1), k2);
      ok = ok && f(t + 0.5 * h, Vector(y + 0.5 * h * k2), k3);
      ok = ok && f(t + h, Vector(y + h * k3), k4);
      if (!ok) {
        traj.termination = Termination::nonfinite_abort;
        return traj;
      }
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += h;
      if (!on_accept(t, y)) return traj;
    }
  }

  // Dormand-Prince 5(4) with PI step-size control (safety 0.9, exponents
  // 0.7/4 and 0.4/4), error measured in the max norm over the stacked state.
  double h = std::min(cfg.h_init, cfg.t_end - t0);
  double err_prev = 1.0;
  while (true) {
    h = std::min(h, cfg.t_end - t);
    if (!f(t, y, k[0])) {
      traj.termination = Termination::nonfinite_abort;
      return traj;
    }
    bool nonfinite = false;
    while (true) {
      for (int i = 1; i < 7; ++i) {
        ytmp = y;
        for (int j = 0; j < i; ++j) ytmp += h * detail::kA[i][j] * k[j];
        if (!f(t + detail::kC[i] * h, ytmp, k[i])) {
          nonfinite = true;
          break;
        }
      }
      if (nonfinite) break;
      ynew = y;
      y4 = y;
      for (int i = 0; i < 7; ++i) {
        ynew += h * detail::kB5[i] * k[i];
        y4 += h * detail::kB4[i] * k[i];
      }
      double err = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double scale =
            cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err = std::max(err, std::abs(ynew[i] - y4[i]) / scale);
      }
      if (err <= 1.0) {
        const double grow =
            0.9 * std::pow(std::max(err, 1e-10), -0.7 / 4.0) * std::pow(err_prev, 0.4 / 4.0);
        err_prev = std::max(err, 1e-4);
        t += h;
        y.swap(ynew);
        h = std::min(cfg.h_max, h * std::min(5.0, std::max(0.2, grow)));
        break;
      }
      ++traj.rejected_steps;
      const double shrink = std::max(0.2, 0.9 * std::pow(err, -0.7 / 4.0));
      h *= std::min(1.0, shrink);
      if (h < cfg.h_min)
        fail(Error::Kind::stiffness, "integrate: step size underflow at t = " + std::to_string(t));
    }
    if (nonfinite) {
      traj.termination = Termination::nonfinite_abort;
      return traj;
    }
    if (!on_accept(t, y)) return traj;
  }
}

}  // namespace triflow
