#pragma once

#include "triflow/core.hpp"
#include "triflow/operators.hpp"

#include <optional>
#include <string>

namespace triflow {

/// Benchmark instance: operator, optional objective, and a solution known to
/// machine precision (or to the stated reference-loop tolerance).
struct ProblemInstance {
  OperatorSpec op;
  Objective objective;  // null when the instance has no optimization reading
  std::optional<double> f_star;
  Vector x_star;
  int dimension = 0;
  std::string description;
};

/// Largest singular value by power iteration on A^T A. The start vector is
/// supplied by the caller so generation stays seed-deterministic.
inline double spectral_norm(const Matrix& A, const Vector& start, int iters = 200,
                            double tol = 1e-12) {
  require(start.size() == A.cols() && start.norm() > 0, Error::Kind::parameter,
          "spectral_norm: bad start vector");
  Vector v = start.normalized();
  double value = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vector w = A.transpose() * (A * v);
    const double next = std::sqrt(w.norm());
    if (w.norm() == 0.0) return 0.0;
    v = w / w.norm();
    if (k > 0 && std::abs(next - value) <= tol * std::max(1.0, next)) {
      value = next;
      break;
    }
    value = next;
  }
  return value;
}

namespace detail {

/// Random orthogonal matrix from the QR factorization of a Gaussian draw,
/// sign-fixed so the result is deterministic in the seed.
inline Matrix random_orthogonal(int n, Rng& rng) {
  const Matrix G = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

inline Matrix random_skew(int n, double sigma, Rng& rng) {
  if (sigma == 0.0) return Matrix::Zero(n, n);
  require(n >= 2, Error::Kind::parameter, "skew part needs dimension >= 2");
  const Matrix G = rng.normal_matrix(n, n);
  Matrix S = 0.5 * (G - G.transpose());
  const double norm = spectral_norm(S, rng.normal_vector(n), 400, 1e-14);
  require(norm > 0, Error::Kind::parameter, "degenerate skew draw");
  return (sigma / norm) * S;
}

}  // namespace detail

/// f(x) = (1/2)(x - x*)^T Q (x - x*) with spectrum in [mu, L]; operator is
/// the gradient, so rho = mu, L_u = L and omega_u = 1/L.
inline ProblemInstance make_quadratic(int n, double mu, double L, std::uint64_t seed) {
  require(n >= 1, Error::Kind::parameter, "make_quadratic: n must be >= 1");
  require(mu > 0 && mu <= L, Error::Kind::parameter, "make_quadratic: need 0 < mu <= L");
  Rng rng(seed);
  const Matrix O = detail::random_orthogonal(n, rng);
  Vector eigs(n);
  for (int i = 0; i < n; ++i)
    eigs[i] = n == 1 ? mu : mu + (L - mu) * static_cast<double>(i) / (n - 1);
  Matrix Q = O * eigs.asDiagonal() * O.transpose();
  Q = 0.5 * (Q + Q.transpose());
  const Vector x_star = rng.normal_vector(n);

  ProblemInstance inst;
  inst.op.eval = [Q, x_star](const Vector& x) { return Vector(Q * (x - x_star)); };
  inst.op.lipschitz = L;
  inst.op.cocoercivity = 1.0 / L;
  inst.op.strong_monotonicity = mu;
  inst.op.fully_cocoercive = true;
  inst.op.known_zero = x_star;
  inst.objective = [Q, x_star](const Vector& x) {
    const Vector d = x - x_star;
    return 0.5 * d.dot(Q * d);
  };
  inst.f_star = 0.0;
  inst.x_star = x_star;
  inst.dimension = n;
  inst.description = "quadratic(n=" + std::to_string(n) + ", mu=" + std::to_string(mu) +
                     ", L=" + std::to_string(L) + ", seed=" + std::to_string(seed) + ")";
  check_operator_invariants(inst.op);
  return inst;
}

/// U(x) = (rho I + S)(x - x*) with S skew of spectral norm sigma. The skew
/// part drops out of <U(x), x - x*>, so the operator is exactly rho-strongly
/// monotone w.r.t. its zero; the quasi-cocoercivity modulus is
/// rho/(rho^2 + sigma^2) because ||rho I + S||_2 = sqrt(rho^2 + sigma^2).
inline ProblemInstance make_affine_monotone(int n, double rho, double sigma,
                                            std::uint64_t seed) {
  require(n >= 1, Error::Kind::parameter, "make_affine_monotone: n must be >= 1");
  require(rho > 0 && sigma >= 0, Error::Kind::parameter,
          "make_affine_monotone: need rho > 0, sigma >= 0");
  Rng rng(seed);
  const Matrix S = detail::random_skew(n, sigma, rng);
  const Matrix M = rho * Matrix::Identity(n, n) + S;
  const Vector x_star = rng.normal_vector(n);

  ProblemInstance inst;
  inst.op.eval = [M, x_star](const Vector& x) { return Vector(M * (x - x_star)); };
  inst.op.lipschitz =
      sigma == 0.0 ? rho : 1.01 * spectral_norm(M, rng.normal_vector(n), 400, 1e-14);
  inst.op.cocoercivity = rho / (rho * rho + sigma * sigma);
  inst.op.strong_monotonicity = rho;
  inst.op.fully_cocoercive = false;  // skew part breaks full cocoercivity
  inst.op.known_zero = x_star;
  inst.x_star = x_star;
  inst.dimension = n;
  inst.description = "affine_monotone(n=" + std::to_string(n) + ", rho=" + std::to_string(rho) +
                     ", sigma=" + std::to_string(sigma) + ", seed=" + std::to_string(seed) + ")";
  check_operator_invariants(inst.op);
  return inst;
}

/// Variational-inequality instance over a box: V affine strongly monotone
/// with its zero in the interior, composed through the projected forward
/// residual with nu at the midpoint of (0, 4 l / M^2).
inline ProblemInstance make_vi_box(int n, double rho, double sigma, const Box& box,
                                   std::uint64_t seed) {
  require(n >= 1, Error::Kind::parameter, "make_vi_box: n must be >= 1");
  validate_region(Region(box));
  require(box.lo.size() == n, Error::Kind::parameter, "make_vi_box: box dimension mismatch");
  for (int i = 0; i < n; ++i)
    require(std::isfinite(box.lo[i]) && std::isfinite(box.hi[i]) && box.lo[i] < box.hi[i],
            Error::Kind::parameter, "make_vi_box: box must be bounded with nonempty interior");

  Rng rng(seed);
  const Matrix S = detail::random_skew(n, sigma, rng);
  const Matrix M = rho * Matrix::Identity(n, n) + S;
  // zero strictly inside the box
  Vector x_star(n);
  for (int i = 0; i < n; ++i) {
    const double c = 0.5 * (box.lo[i] + box.hi[i]);
    const double half = 0.5 * (box.hi[i] - box.lo[i]);
    x_star[i] = c + 0.5 * half * rng.uniform(-1.0, 1.0);
  }

  OperatorSpec V;
  V.eval = [M, x_star](const Vector& x) { return Vector(M * (x - x_star)); };
  V.strong_monotonicity = rho;
  V.lipschitz = sigma == 0.0 ? rho : 1.01 * spectral_norm(M, rng.normal_vector(n), 400, 1e-14);
  V.known_zero = x_star;

  const double ell = rho, Mlip = *V.lipschitz;
  const double nu = 2.0 * ell / (Mlip * Mlip);

  ProblemInstance inst;
  inst.op = vi_forward(std::move(V), Region(box), nu);
  inst.x_star = x_star;
  inst.dimension = n;
  inst.description = "vi_box(n=" + std::to_string(n) + ", rho=" + std::to_string(rho) +
                     ", sigma=" + std::to_string(sigma) + ", seed=" + std::to_string(seed) + ")";
  check_operator_invariants(inst.op);
  return inst;
}

/// LASSO through the three-operator splitting: A the least-squares gradient,
/// B the scaled l1 subdifferential, C the normal cone of a box sized 10x the
/// reference solution so it stays inactive. The reference solution comes from
/// an independent proximal-gradient loop (never from the splitting operator).
inline ProblemInstance make_splitting_lasso(int n, int m, double lambda_reg,
                                            std::uint64_t seed) {
  require(n >= 1 && m >= 1, Error::Kind::parameter, "make_splitting_lasso: need n, m >= 1");
  require(lambda_reg >= 0, Error::Kind::parameter, "make_splitting_lasso: lambda_reg >= 0");
  Rng rng(seed);
  const Matrix K = rng.normal_matrix(m, n);
  Vector z0 = rng.normal_vector(n);
  for (int i = 0; i < n; ++i)
    if (rng.uniform(0.0, 1.0) < 0.5) z0[i] = 0.0;  // sparse-ish ground signal
  const Vector b = K * z0 + 0.1 * rng.normal_vector(m);

  const double L_bound = 1.01 * std::pow(spectral_norm(K, rng.normal_vector(n), 400, 1e-14), 2);
  const double omega_a = 1.0 / L_bound;
  const double gamma = omega_a;

  auto grad = [K, b](const Vector& z) { return Vector(K.transpose() * (K * z - b)); };

  // Reference loop: ISTA with step gamma; its fixed-point residual at the
  // solution equals the splitting residual once the box is inactive.
  Vector z = Vector::Zero(n);
  const ProxL1 l1{lambda_reg};
  bool converged = false;
  for (int it = 0; it < 2000000; ++it) {
    const Vector znext = resolvent(ProxDescriptor(l1), gamma, z - gamma * grad(z));
    const double res = (znext - z).norm();
    z = znext;
    if (res <= 1e-13 * (1.0 + z.norm())) {
      converged = true;
      break;
    }
  }
  require(converged, Error::Kind::domain,
          "make_splitting_lasso: reference loop did not reach residual tolerance");

  const double R = 10.0 * std::max(1.0, z.lpNorm<Eigen::Infinity>());
  Box box{Vector::Constant(n, -R), Vector::Constant(n, R)};

  OperatorSpec A;
  A.eval = grad;
  A.lipschitz = L_bound;
  A.cocoercivity = omega_a;
  A.fully_cocoercive = true;

  ProblemInstance inst;
  inst.op = davis_yin(std::move(A), ProxDescriptor(l1), ProxDescriptor(ProxNormalCone{Region(box)}),
                      gamma);
  adopt_zero_if_valid(inst.op, z);
  require(inst.op.known_zero.has_value(), Error::Kind::domain,
          "make_splitting_lasso: reference solution is not a splitting zero");
  inst.objective = [K, b, lambda_reg](const Vector& x) {
    return 0.5 * (K * x - b).squaredNorm() + lambda_reg * x.lpNorm<1>();
  };
  inst.f_star = inst.objective(z);
  inst.x_star = z;
  inst.dimension = n;
  inst.description = "splitting_lasso(n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                     ", lambda=" + std::to_string(lambda_reg) + ", seed=" + std::to_string(seed) +
                     ")";
  return inst;
}

/// Monotone-but-not-cocoercive instance: A pure skew around an interior point
/// of a box, composed through Tseng's forward-backward-forward residual with
/// gamma = 1/(2L).
inline ProblemInstance make_fbf_instance(int n, double sigma, std::uint64_t seed) {
  require(n >= 2, Error::Kind::parameter, "make_fbf_instance: n must be >= 2");
  require(sigma > 0, Error::Kind::parameter, "make_fbf_instance: sigma must be > 0");
  Rng rng(seed);
  const Matrix S = detail::random_skew(n, sigma, rng);
  const Vector x_star = rng.normal_vector(n);
  Box box{Vector(x_star.array() - 1.0), Vector(x_star.array() + 1.0)};

  OperatorSpec A;
  A.eval = [S, x_star](const Vector& x) { return Vector(S * (x - x_star)); };
  A.lipschitz = sigma;
  A.known_zero = x_star;

  ProblemInstance inst;
  inst.op = tseng_fbf(std::move(A), ProxDescriptor(ProxNormalCone{Region(box)}),
                      1.0 / (2.0 * sigma));
  inst.x_star = x_star;
  inst.dimension = n;
  inst.description = "fbf(n=" + std::to_string(n) + ", sigma=" + std::to_string(sigma) +
                     ", seed=" + std::to_string(seed) + ")";
  check_operator_invariants(inst.op);
  return inst;
}

}  // namespace triflow
