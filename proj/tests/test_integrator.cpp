#include "triflow/integrator.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <unsupported/Eigen/MatrixFunctions>

using namespace triflow;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

OperatorSpec identity_op(int n) {
  OperatorSpec op;
  op.eval = [](const Vector& x) { return x; };
  op.lipschitz = 1.0;
  op.cocoercivity = 1.0;
  op.known_zero = Vector::Zero(n);
  op.fully_cocoercive = true;
  return op;
}

OperatorSpec zero_op() {
  OperatorSpec op;
  op.eval = [](const Vector& x) { return Vector(Vector::Zero(x.size())); };
  return op;
}

// Exact endpoint of the constant-coefficient flow with affine U(x) = M(x-x*):
// the stacked (x, v, a, 1) system is linear, so the state is a matrix
// exponential of the (3n+1) x (3n+1) companion matrix.
Vector companion_exponential_x(const Matrix& M, const Vector& x_star, double q0, double q1,
                               double q2, const SystemState& init, double t) {
  const Eigen::Index n = init.x.size();
  Matrix K = Matrix::Zero(3 * n + 1, 3 * n + 1);
  K.block(0, n, n, n) = Matrix::Identity(n, n);
  K.block(n, 2 * n, n, n) = Matrix::Identity(n, n);
  K.block(2 * n, 0, n, n) = -q0 * M;
  K.block(2 * n, n, n, n) = -q1 * Matrix::Identity(n, n);
  K.block(2 * n, 2 * n, n, n) = -q2 * Matrix::Identity(n, n);
  K.block(2 * n, 3 * n, n, 1) = q0 * M * x_star;
  Vector z(3 * n + 1);
  z << init.x, init.v, init.a, 1.0;
  const Matrix E = (K * (t - init.t)).exp();
  return (E * z).segment(0, n);
}

}  // namespace

TEST_CASE("rhs: hand values") {
  // U = I, beta = (1,1,1), lambda = 0: a' = -v - a - x
  const ConstantSchedule s{1.0, 1.0, 1.0};
  const SystemState st{0.0, vec({1.0}), vec({2.0}), vec({3.0})};
  const auto d = rhs(Schedule(s), identity_op(1), st);
  CHECK(d.dx.isApprox(vec({2.0})));
  CHECK(d.dv.isApprox(vec({3.0})));
  CHECK(d.da.isApprox(vec({-6.0})));

  // equilibrium: (x*, 0, 0) is a fixed point of the first-order system
  const SystemState eq{0.0, vec({0.0}), vec({0.0}), vec({0.0})};
  const auto de = rhs(Schedule(s), identity_op(1), eq);
  CHECK(de.dx.norm() == 0.0);
  CHECK(de.dv.norm() == 0.0);
  CHECK(de.da.norm() == 0.0);

  // homogeneous part only: U = 0 gives a' = -beta1 v - beta2 a
  const auto dh = rhs(Schedule(ConstantSchedule{1.0, 2.0, 3.0}), zero_op(), st);
  CHECK(dh.da.isApprox(vec({-2.0 * 2.0 - 3.0 * 3.0})));
}

TEST_CASE("polynomial exactness: U = 0 and beta1 = beta2 = 0") {
  // x''' = 0, so x(t) = x0 + x1 (t - t0) + x2 (t - t0)^2 / 2 exactly; RK4
  // reproduces polynomials of degree <= 2 to rounding.
  const ConstantSchedule s{1.0, 0.0, 0.0};
  SolverConfig cfg;
  cfg.method = Method::rk4_fixed;
  cfg.h = 0.1;
  cfg.t_end = 1.0;
  const SystemState init{0.0, vec({1.0, -2.0}), vec({0.5, 1.0}), vec({2.0, 0.0})};
  const auto traj = integrate(Schedule(s), zero_op(), init, cfg);
  const Vector expect = init.x + init.v + 0.5 * init.a;
  CHECK((traj.back().x - expect).norm() <= 1e-12);
  CHECK(traj.back().t == Catch::Approx(1.0));
}

TEST_CASE("linear constant-coefficient instance against the matrix exponential") {
  // U = I with the constant weak-convergence parameters {0.5, 2, 3}
  const ConstantSchedule s{0.5, 2.0, 3.0};
  const SystemState init{0.0, vec({1.0}), vec({0.0}), vec({0.0})};
  const Vector exact =
      companion_exponential_x(Matrix::Identity(1, 1), Vector::Zero(1), 0.5, 2.0, 3.0, init, 10.0);

  SECTION("rk45 meets the adaptive tolerance") {
    SolverConfig cfg;
    cfg.abs_tol = cfg.rel_tol = 1e-10;
    cfg.t_end = 10.0;
    const auto traj = integrate(Schedule(s), identity_op(1), init, cfg);
    const double err = (traj.back().x - exact).norm();
    CHECK(err <= 1e-8);
    CHECK(err <= 50.0 * cfg.abs_tol);
  }

  SECTION("rk4 shows fourth-order convergence under step halving") {
    auto endpoint_error = [&](double h) {
      SolverConfig cfg;
      cfg.method = Method::rk4_fixed;
      cfg.h = h;
      cfg.t_end = 10.0;
      cfg.record_every = 1000000;  // endpoint only
      const auto traj = integrate(Schedule(s), identity_op(1), init, cfg);
      return (traj.back().x - exact).norm();
    };
    const double e1 = endpoint_error(0.05);
    const double e2 = endpoint_error(0.025);
    CHECK(e1 / e2 >= 12.0);
  }

  SECTION("rk45 and rk4 agree") {
    SolverConfig a;
    a.abs_tol = a.rel_tol = 1e-10;
    a.t_end = 10.0;
    SolverConfig b;
    b.method = Method::rk4_fixed;
    b.h = 0.01;
    b.t_end = 10.0;
    const auto ta = integrate(Schedule(s), identity_op(1), init, a);
    const auto tb = integrate(Schedule(s), identity_op(1), init, b);
    CHECK((ta.back().x - tb.back().x).norm() <= 1e-6);
  }

  SECTION("the trajectory approaches the unique zero") {
    SolverConfig cfg;
    cfg.abs_tol = cfg.rel_tol = 1e-10;
    cfg.t_end = 40.0;
    const auto traj = integrate(Schedule(s), identity_op(1), init, cfg);
    CHECK(traj.back().x.norm() < 1e-6);
  }
}

TEST_CASE("matrix-exponential oracle also covers n > 1 with a skew part") {
  Matrix M(2, 2);
  M << 0.5, 0.4, -0.4, 0.5;
  const Vector x_star = vec({1.0, -1.0});
  OperatorSpec op;
  op.eval = [M, x_star](const Vector& x) { return Vector(M * (x - x_star)); };
  const ConstantSchedule s{0.5, 2.0, 3.0};
  const SystemState init{0.0, vec({2.0, 0.5}), vec({0.0, 0.1}), vec({-0.3, 0.0})};
  SolverConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-11;
  cfg.t_end = 8.0;
  const auto traj = integrate(Schedule(s), op, init, cfg);
  const Vector exact = companion_exponential_x(M, x_star, 0.5, 2.0, 3.0, init, 8.0);
  CHECK((traj.back().x - exact).norm() <= 1e-8);
}

TEST_CASE("homogeneous damped system: velocity/acceleration energy stays bounded") {
  // beta1 = 1 makes E = ||v||^2 + ||a||^2 monotone: E' = -2 beta2 ||a||^2
  const ConstantSchedule s{1.0, 1.0, 2.0};
  const SystemState init{0.0, vec({0.0, 0.0}), vec({1.0, -0.5}), vec({0.3, 0.8})};
  SolverConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-10;
  cfg.t_end = 20.0;
  const auto traj = integrate(Schedule(s), zero_op(), init, cfg);
  const double e0 = init.v.squaredNorm() + init.a.squaredNorm();
  for (const auto& r : traj.records)
    CHECK(r.v.squaredNorm() + r.a.squaredNorm() <= e0 * (1.0 + 1e-9));
}

TEST_CASE("equilibrium persistence over ten thousand steps") {
  const ConstantSchedule s{0.5, 2.0, 3.0};
  const Vector x_star = vec({0.7, -0.3});
  OperatorSpec op;
  op.eval = [x_star](const Vector& x) { return Vector(x - x_star); };
  SolverConfig cfg;
  cfg.method = Method::rk4_fixed;
  cfg.h = 0.01;
  cfg.t_end = 100.0;  // 1e4 steps
  cfg.record_every = 100;
  const SystemState init{0.0, x_star, Vector::Zero(2), Vector::Zero(2)};
  const auto traj = integrate(Schedule(s), op, init, cfg);
  CHECK(traj.steps == 10000);
  for (const auto& r : traj.records) CHECK((r.x - x_star).norm() <= 1e-10);
}

TEST_CASE("residual stopping") {
  const ConstantSchedule s{0.5, 2.0, 3.0};
  SolverConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-10;
  cfg.t_end = 100.0;
  cfg.stop_residual = 1e-4;
  const SystemState init{0.0, vec({1.0}), vec({0.0}), vec({0.0})};
  const auto traj = integrate(Schedule(s), identity_op(1), init, cfg);
  CHECK(traj.termination == Termination::residual_met);
  CHECK(traj.back().residual <= 1e-4);
  CHECK(traj.back().t < 100.0);
}

TEST_CASE("records are strictly increasing in t and start at t0") {
  const ConstantSchedule s{0.5, 2.0, 3.0};
  SolverConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-8;
  cfg.t_end = 5.0;
  cfg.record_every = 3;
  const SystemState init{0.0, vec({1.0}), vec({0.0}), vec({0.0})};
  const auto traj = integrate(Schedule(s), identity_op(1), init, cfg);
  CHECK(traj.records.front().t == 0.0);
  for (std::size_t k = 1; k < traj.records.size(); ++k)
    CHECK(traj.records[k].t > traj.records[k - 1].t);
  CHECK(traj.back().t == Catch::Approx(5.0));
}

TEST_CASE("non-finite operator output aborts with a partial trajectory") {
  OperatorSpec op;
  op.eval = [](const Vector& x) {
    Vector u = x;
    if (x.norm() > 2.0) u[0] = std::numeric_limits<double>::quiet_NaN();
    return u;
  };
  // beta0 large drives the state outward through x'''= -beta0 U
  const ConstantSchedule s{5.0, 0.1, 0.1};
  SolverConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-6;
  cfg.t_end = 50.0;
  const SystemState init{0.0, vec({1.9}), vec({3.0}), vec({0.0})};
  const auto traj = integrate(Schedule(s), op, init, cfg);
  CHECK(traj.termination == Termination::nonfinite_abort);
  CHECK(!traj.records.empty());
}

TEST_CASE("step underflow raises a stiffness error") {
  SolverConfig cfg;
  cfg.abs_tol = 1e-16;
  cfg.rel_tol = 0.0;
  cfg.h_min = 1e-3;  // impossible to satisfy the tolerance above this floor
  cfg.h_init = 0.5;
  cfg.t_end = 10.0;
  const ConstantSchedule s{0.5, 2.0, 3.0};
  const SystemState init{0.0, vec({1.0}), vec({0.0}), vec({0.0})};
  try {
    integrate(Schedule(s), identity_op(1), init, cfg);
    FAIL("expected a stiffness error");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::stiffness);
  }
}

TEST_CASE("input validation") {
  const ConstantSchedule s{0.5, 2.0, 3.0};
  SolverConfig cfg;
  cfg.t_end = 1.0;
  SystemState init{0.5, vec({1.0}), vec({0.0}), vec({0.0})};  // init.t != t0
  CHECK_THROWS_AS(integrate(Schedule(s), identity_op(1), init, cfg), Error);
  init.t = 0.0;
  init.v = vec({0.0, 0.0});  // dimension mismatch
  CHECK_THROWS_AS(integrate(Schedule(s), identity_op(1), init, cfg), Error);
}
