#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace inewton {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised for invalid parameters, dimension mismatches and malformed input.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a linear solve fails, e.g. the accumulated curvature matrix is
/// not numerically positive definite. Carries the cycle and inner index.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t cycle, std::size_t inner)
      : std::runtime_error(what + " (cycle " + std::to_string(cycle) +
                           ", inner " + std::to_string(inner) + ")"),
        cycle_(cycle),
        inner_(inner) {}

  std::size_t cycle() const noexcept { return cycle_; }
  std::size_t inner() const noexcept { return inner_; }

 private:
  std::size_t cycle_;
  std::size_t inner_;
};

struct EigenBounds {
  double min = 0.0;
  double max = 0.0;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ArgumentError(message);
}

inline void require_dimension(const Vector& x, std::size_t n,
                              const char* what) {
  if (static_cast<std::size_t>(x.size()) != n) {
    throw ArgumentError(std::string(what) + ": expected dimension " +
                        std::to_string(n) + ", got " +
                        std::to_string(x.size()));
  }
}

/// Extreme eigenvalues of a symmetric matrix.
inline EigenBounds eigen_bounds(const Matrix& symmetric) {
  if (symmetric.rows() == 1) {
    return {symmetric(0, 0), symmetric(0, 0)};
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric,
                                               Eigen::EigenvaluesOnly);
  const auto& values = solver.eigenvalues();
  return {values.minCoeff(), values.maxCoeff()};
}

/// Spectral norm of a symmetric matrix.
inline double symmetric_norm(const Matrix& symmetric) {
  const auto bounds = eigen_bounds(symmetric);
  return std::max(std::abs(bounds.min), std::abs(bounds.max));
}

/// Cholesky-based solve of H y = rhs. Throws NumericalError when H is not
/// numerically positive definite.
inline Vector spd_solve(const Matrix& H, const Vector& rhs, std::size_t cycle,
                        std::size_t inner) {
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("curvature matrix is not positive definite", cycle,
                         inner);
  }
  // A zero pivot can slip through LLT as a tiny positive number.
  if (llt.rcond() < 64.0 * std::numeric_limits<double>::epsilon()) {
    throw NumericalError("curvature matrix is numerically singular", cycle,
                         inner);
  }
  return llt.solve(rhs);
}

inline bool all_finite(const Vector& x) { return x.allFinite(); }

}  // namespace inewton
