#pragma once

#include "triflow/core.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <variant>

namespace triflow {

// ---------------------------------------------------------------------------
// Regions and Euclidean projections.

struct WholeSpace {};

struct Box {
  Vector lo, hi;  // entries may be +-inf for one-sided bounds
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

struct Halfspace {
  Vector normal;  // {x : <normal, x> <= offset}
  double offset = 0.0;
};

struct Simplex {
  double total = 1.0;  // {x >= 0, sum x = total}
};

using Region = std::variant<WholeSpace, Box, Ball, Halfspace, Simplex>;

inline void validate_region(const Region& region) {
  if (const auto* box = std::get_if<Box>(&region)) {
    require(box->lo.size() == box->hi.size(), Error::Kind::parameter, "box: lo/hi size mismatch");
    for (Eigen::Index i = 0; i < box->lo.size(); ++i)
      require(box->lo[i] <= box->hi[i], Error::Kind::parameter, "box: lo > hi");
  } else if (const auto* ball = std::get_if<Ball>(&region)) {
    require(ball->radius > 0, Error::Kind::parameter, "ball: radius must be > 0");
  } else if (const auto* hs = std::get_if<Halfspace>(&region)) {
    require(hs->normal.size() > 0 && hs->normal.norm() > 0, Error::Kind::parameter,
            "halfspace: normal must be nonzero");
  } else if (const auto* sx = std::get_if<Simplex>(&region)) {
    require(sx->total > 0, Error::Kind::parameter, "simplex: total must be > 0");
  }
}

inline Vector project(const Box& box, const Vector& x) {
  require(x.size() == box.lo.size(), Error::Kind::parameter, "project: dimension mismatch");
  return x.cwiseMax(box.lo).cwiseMin(box.hi);
}

inline Vector project(const Ball& ball, const Vector& x) {
  require(x.size() == ball.center.size(), Error::Kind::parameter, "project: dimension mismatch");
  const Vector d = x - ball.center;
  const double r = d.norm();
  if (r <= ball.radius) return x;
  return ball.center + (ball.radius / r) * d;
}

inline Vector project(const Halfspace& hs, const Vector& x) {
  require(x.size() == hs.normal.size(), Error::Kind::parameter, "project: dimension mismatch");
  const double g = hs.normal.dot(x) - hs.offset;
  if (g <= 0) return x;
  return x - (g / hs.normal.squaredNorm()) * hs.normal;
}

/// Sort-based simplex projection: threshold at the largest k with
/// u_(k) + (total - sum of k largest)/k > 0.
inline Vector project(const Simplex& sx, const Vector& x) {
  const Eigen::Index n = x.size();
  std::vector<double> u(x.data(), x.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0, theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumsum += u[static_cast<std::size_t>(k)];
    const double candidate = (cumsum - sx.total) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] - candidate > 0) theta = candidate;
  }
  return (x.array() - theta).max(0.0).matrix();
}

inline Vector project(const WholeSpace&, const Vector& x) { return x; }

inline Vector project(const Region& region, const Vector& x) {
  validate_region(region);
  return std::visit([&x](const auto& r) { return project(r, x); }, region);
}

// ---------------------------------------------------------------------------
// Prox-friendly monotone maps and their resolvents J = (I + gamma B)^{-1}.
// The descriptor set is a closed world so every resolvent is exact.

struct ProxZero {};

/// B(z) = Q z - b with Q symmetric positive semidefinite.
struct ProxQuadratic {
  Matrix Q;
  Vector b;
};

/// B = subdifferential of weight * ||.||_1; resolvent is soft-thresholding.
struct ProxL1 {
  double weight = 1.0;
};

/// B = normal cone of a region; resolvent is the projection.
struct ProxNormalCone {
  Region region;
};

using ProxDescriptor = std::variant<ProxZero, ProxQuadratic, ProxL1, ProxNormalCone>;

inline Vector resolvent(const ProxDescriptor& desc, double gamma, const Vector& point) {
  require(gamma > 0, Error::Kind::parameter, "resolvent: gamma must be > 0");
  if (std::holds_alternative<ProxZero>(desc)) return point;
  if (const auto* quad = std::get_if<ProxQuadratic>(&desc)) {
    require(quad->Q.rows() == point.size() && quad->Q.cols() == point.size(),
            Error::Kind::parameter, "resolvent: quadratic size mismatch");
    require(quad->Q.isApprox(quad->Q.transpose(), 1e-12), Error::Kind::parameter,
            "resolvent: quadratic Q must be symmetric");
    Matrix A = Matrix::Identity(point.size(), point.size()) + gamma * quad->Q;
    Vector rhs = point;
    if (quad->b.size() > 0) {
      require(quad->b.size() == point.size(), Error::Kind::parameter,
              "resolvent: quadratic b size mismatch");
      rhs += gamma * quad->b;
    }
    return A.ldlt().solve(rhs);
  }
  if (const auto* l1 = std::get_if<ProxL1>(&desc)) {
    require(l1->weight >= 0, Error::Kind::parameter, "resolvent: l1 weight must be >= 0");
    const double thr = gamma * l1->weight;
    Vector z(point.size());
    for (Eigen::Index i = 0; i < point.size(); ++i)
      z[i] = std::copysign(std::max(std::abs(point[i]) - thr, 0.0), point[i]);
    return z;
  }
  const auto& cone = std::get<ProxNormalCone>(desc);
  return project(cone.region, point);  // independent of gamma
}

// ---------------------------------------------------------------------------
// Evaluatable operator with declared regularity metadata.

struct OperatorSpec {
  std::function<Vector(const Vector&)> eval;
  std::optional<double> lipschitz;            // L_u
  std::optional<double> cocoercivity;         // omega_u; quasi modulus unless fully_cocoercive
  std::optional<double> strong_monotonicity;  // rho, with respect to the zeros set
  std::optional<Vector> known_zero;
  bool fully_cocoercive = false;

  Vector operator()(const Vector& x) const { return eval(x); }
};

/// Residual tolerance used by the known-zero consistency invariant.
inline double zero_tolerance(const Vector& z) { return 1e-10 * (1.0 + z.norm()); }

inline void check_operator_invariants(const OperatorSpec& op) {
  if (op.known_zero) {
    const Vector r = op.eval(*op.known_zero);
    require(r.norm() <= zero_tolerance(*op.known_zero), Error::Kind::parameter,
            "operator: declared zero has residual " + std::to_string(r.norm()));
  }
  if (op.fully_cocoercive && op.lipschitz && op.cocoercivity) {
    require(*op.lipschitz <= 1.0 / *op.cocoercivity * (1.0 + 1e-12), Error::Kind::parameter,
            "operator: cocoercive operators must satisfy L_u <= 1/omega_u");
  }
}

/// Keeps a candidate zero only if it actually annihilates the operator.
inline void adopt_zero_if_valid(OperatorSpec& op, const std::optional<Vector>& candidate) {
  if (!candidate) return;
  if (op.eval(*candidate).norm() <= zero_tolerance(*candidate)) op.known_zero = *candidate;
}

/// An alpha-averaged map T yields a 1/(2 alpha)-cocoercive residual I - T.
inline double averaged_to_cocoercive(double alpha) {
  require(alpha > 0 && alpha < 1, Error::Kind::parameter, "averagedness must lie in (0,1)");
  return 1.0 / (2.0 * alpha);
}

/// U = grad f. When the Lipschitz constant of the gradient is known, the
/// Baillon-Haddad modulus omega_u = 1/L applies (f convex).
inline OperatorSpec gradient_operator(std::function<Vector(const Vector&)> grad,
                                      std::optional<double> lipschitz = {},
                                      std::optional<Vector> known_zero = {}) {
  OperatorSpec op;
  op.eval = std::move(grad);
  op.lipschitz = lipschitz;
  if (lipschitz) {
    require(*lipschitz > 0, Error::Kind::parameter, "gradient operator: L must be > 0");
    op.cocoercivity = 1.0 / *lipschitz;
    op.fully_cocoercive = true;
  }
  op.known_zero = std::move(known_zero);
  check_operator_invariants(op);
  return op;
}

/// U = I - J_{gamma B}(I - gamma A), the forward-backward residual.
inline OperatorSpec forward_backward(OperatorSpec A, ProxDescriptor B, double gamma) {
  require(gamma > 0, Error::Kind::parameter, "forward_backward: gamma must be > 0");
  OperatorSpec op;
  op.eval = [A = A.eval, B = std::move(B), gamma](const Vector& x) {
    return Vector(x - resolvent(B, gamma, x - gamma * A(x)));
  };
  if (A.cocoercivity && gamma < 2.0 * *A.cocoercivity) {
    const double alpha = 2.0 * *A.cocoercivity / (4.0 * *A.cocoercivity - gamma);
    op.cocoercivity = averaged_to_cocoercive(alpha);
    op.lipschitz = 2.0 * alpha;
    op.fully_cocoercive = true;
  }
  adopt_zero_if_valid(op, A.known_zero);
  return op;
}

/// U = I - T_DY for the three-operator splitting map
///   T_DY = J_{gamma B}(2 J_{gamma C} - I - gamma A J_{gamma C}) + I - J_{gamma C},
/// which is alpha-averaged with alpha = 2 omega_A / (4 omega_A - gamma).
inline OperatorSpec davis_yin(OperatorSpec A, ProxDescriptor B, ProxDescriptor C, double gamma) {
  require(A.cocoercivity.has_value(), Error::Kind::precondition,
          "davis_yin: A must declare a cocoercivity modulus");
  const double omega_a = *A.cocoercivity;
  require(gamma > 0 && gamma < 2.0 * omega_a, Error::Kind::parameter,
          "davis_yin: gamma must lie in (0, 2 omega_A)");
  OperatorSpec op;
  op.eval = [A = A.eval, B = std::move(B), C = std::move(C), gamma](const Vector& x) {
    const Vector zc = resolvent(C, gamma, x);
    const Vector zb = resolvent(B, gamma, 2.0 * zc - x - gamma * A(zc));
    return Vector(zc - zb);
  };
  const double alpha = 2.0 * omega_a / (4.0 * omega_a - gamma);
  op.cocoercivity = averaged_to_cocoercive(alpha);
  op.lipschitz = 2.0 * alpha;
  op.fully_cocoercive = true;
  return op;
}

/// Tseng's forward-backward-forward residual
///   U = I - J_{gamma B}(I - gamma A) - gamma [A - A J_{gamma B}(I - gamma A)],
/// quasi-cocoercive with modulus (1 - gamma L)/(1 + gamma L)^2 for gamma < 1/L.
inline OperatorSpec tseng_fbf(OperatorSpec A, ProxDescriptor B, double gamma) {
  require(A.lipschitz.has_value(), Error::Kind::precondition,
          "tseng_fbf: A must declare a Lipschitz constant");
  const double L = *A.lipschitz;
  require(gamma > 0 && gamma < 1.0 / L, Error::Kind::parameter,
          "tseng_fbf: gamma must lie in (0, 1/L)");
  OperatorSpec op;
  op.eval = [A = A.eval, B = std::move(B), gamma](const Vector& x) {
    const Vector ax = A(x);
    const Vector z = resolvent(B, gamma, x - gamma * ax);
    return Vector(x - z - gamma * (ax - A(z)));
  };
  const double gl = gamma * L;
  op.cocoercivity = (1.0 - gl) / ((1.0 + gl) * (1.0 + gl));
  op.fully_cocoercive = false;  // quasi only
  op.lipschitz = (2.0 + gl) * (1.0 + gl);
  adopt_zero_if_valid(op, A.known_zero);
  return op;
}

/// U = I - Pi_Omega(I - nu V) for a strongly pseudomonotone Lipschitz V.
/// Moduli follow kappa_1 = 1 - nu M^2/(4 l), kappa_2 = nu l/(1 + nu l + nu M):
/// rho = kappa_1 kappa_2^2 and the kappa entering the exponential-rate theorem
/// is kappa_1 kappa_2^2 / M^2.
inline OperatorSpec vi_forward(OperatorSpec V, Region omega, double nu) {
  require(V.strong_monotonicity.has_value(), Error::Kind::precondition,
          "vi_forward: V must declare a strong (pseudo)monotonicity modulus");
  require(V.lipschitz.has_value(), Error::Kind::precondition,
          "vi_forward: V must declare a Lipschitz constant");
  const double ell = *V.strong_monotonicity, M = *V.lipschitz;
  require(nu > 0 && nu < 4.0 * ell / (M * M), Error::Kind::parameter,
          "vi_forward: nu must lie in (0, 4 l / M^2)");
  validate_region(omega);
  OperatorSpec op;
  op.eval = [V = V.eval, omega = std::move(omega), nu](const Vector& x) {
    return Vector(x - project(omega, x - nu * V(x)));
  };
  const double kappa1 = 1.0 - nu * M * M / (4.0 * ell);
  const double kappa2 = nu * ell / (1.0 + nu * ell + nu * M);
  op.strong_monotonicity = kappa1 * kappa2 * kappa2;
  op.cocoercivity = kappa1 * kappa2 * kappa2 / (M * M);
  op.fully_cocoercive = false;
  op.lipschitz = 2.0 + nu * M;
  adopt_zero_if_valid(op, V.known_zero);
  return op;
}

/// U = I - F. A declared c-contraction gives rho = 1 - c and L_u = 1 + c.
inline OperatorSpec fixed_point_residual(std::function<Vector(const Vector&)> F,
                                         std::optional<double> contraction = {},
                                         std::optional<Vector> fixed_point = {}) {
  OperatorSpec op;
  op.eval = [F = std::move(F)](const Vector& x) { return Vector(x - F(x)); };
  if (contraction) {
    require(*contraction >= 0 && *contraction < 1, Error::Kind::parameter,
            "fixed_point_residual: contraction factor must lie in [0,1)");
    op.strong_monotonicity = 1.0 - *contraction;
    op.lipschitz = 1.0 + *contraction;
  }
  adopt_zero_if_valid(op, fixed_point);
  return op;
}

// ---------------------------------------------------------------------------
// Empirical falsification of regularity claims. Sampling can refute a claimed
// constant (positive violation) but never prove it.

enum class OperatorProperty { lipschitz, cocoercive, quasi_cocoercive, strongly_monotone_wrt_zero };

struct SampleBox {
  double lo = -10.0, hi = 10.0;
  std::uint64_t seed = 20240523ULL;
};

struct Certificate {
  OperatorProperty property;
  double claimed = 0.0;
  double max_violation = -std::numeric_limits<double>::infinity();
  Vector witness_x, witness_y;  // witness_y empty for point-wise properties
  int samples = 0;
};

inline Certificate certify_property(const OperatorSpec& op, OperatorProperty property,
                                    double claimed, int dimension, int n_samples,
                                    SampleBox box = {}) {
  require(dimension >= 1, Error::Kind::parameter, "certify_property: dimension must be >= 1");
  require(n_samples >= 1, Error::Kind::parameter, "certify_property: n_samples must be >= 1");
  const bool needs_zero = property == OperatorProperty::quasi_cocoercive ||
                          property == OperatorProperty::strongly_monotone_wrt_zero;
  if (needs_zero)
    require(op.known_zero.has_value(), Error::Kind::precondition,
            "certify_property: property requires a known zero");

  Rng rng(box.seed);
  Certificate cert;
  cert.property = property;
  cert.claimed = claimed;
  cert.samples = n_samples;
  for (int k = 0; k < n_samples; ++k) {
    const Vector x = rng.uniform_vector(dimension, box.lo, box.hi);
    double violation;
    Vector y;
    switch (property) {
      case OperatorProperty::lipschitz: {
        y = rng.uniform_vector(dimension, box.lo, box.hi);
        violation = (op(x) - op(y)).norm() - claimed * (x - y).norm();
        break;
      }
      case OperatorProperty::cocoercive: {
        y = rng.uniform_vector(dimension, box.lo, box.hi);
        const Vector du = op(x) - op(y);
        violation = claimed * du.squaredNorm() - du.dot(x - y);
        break;
      }
      case OperatorProperty::quasi_cocoercive: {
        const Vector ux = op(x);
        violation = claimed * ux.squaredNorm() - ux.dot(x - *op.known_zero);
        break;
      }
      case OperatorProperty::strongly_monotone_wrt_zero: {
        const Vector d = x - *op.known_zero;
        violation = claimed * d.squaredNorm() - op(x).dot(d);
        break;
      }
    }
    if (violation > cert.max_violation) {
      cert.max_violation = violation;
      cert.witness_x = x;
      cert.witness_y = y;
    }
  }
  return cert;
}

}  // namespace triflow
