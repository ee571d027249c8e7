#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace triflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Objective = std::function<double(const Vector&)>;

/// Library-wide exception. The kind tells callers which contract was broken.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    parameter,     // constant out of its admissible range
    domain,        // input outside an operation's domain (t < t0, bad window, ...)
    capability,    // unsupported descriptor or theorem id
    precondition,  // required field missing (known zero, metadata constant, ...)
    nonfinite,     // NaN/Inf where finiteness is required
    stiffness,     // adaptive step-size underflow
    infeasible,    // empty feasible interval during parameter search
  };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

[[noreturn]] inline void fail(Error::Kind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, Error::Kind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) fail(Error::Kind::nonfinite, std::string(what) + ": non-finite entries");
}

/// Deterministic RNG used by samplers and instance generators. Seeds are part
/// of the reproducibility contract, so they always appear at call sites.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }

  Vector uniform_vector(int n, double lo, double hi) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  Vector normal_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  Matrix normal_matrix(int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }
  std::uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

/// n points t0 + 10^u with u linearly spaced; first point is exactly t0.
inline std::vector<double> log_grid(double t0, double span, int n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  out.push_back(t0);
  const double lo = -6.0, hi = std::log10(span);
  for (int k = 1; k < n; ++k) {
    const double u = lo + (hi - lo) * static_cast<double>(k) / (n - 1);
    out.push_back(t0 + std::pow(10.0, u));
  }
  return out;
}

}  // namespace triflow
