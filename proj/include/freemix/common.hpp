#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

namespace freemix {

using Index = Eigen::Index;
using cplx = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
inline constexpr bool is_complex_v = false;
template <typename T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

/// Dyson index of the field a scalar type lives in: 1 real, 2 complex.
template <typename Scalar>
inline constexpr int beta_of_v = is_complex_v<Scalar> ? 2 : 1;

/// A quantity the caller asked for is numerically undefined (e.g. the
/// classical and free fourth moments coincide).
class NumericalDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An eigen-solve or root-polish did not converge.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation point coincides with a pole of the transform.
class PoleCollision : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline void check_beta(int beta) {
  if (beta != 1 && beta != 2)
    throw std::invalid_argument("unsupported beta " + std::to_string(beta) +
                                " (expected 1 or 2)");
}

/// Calls f with a value-initialized double (beta=1) or std::complex<double>
/// (beta=2) so templated code can be selected from a runtime beta.
template <typename F>
decltype(auto) dispatch_beta(int beta, F&& f) {
  check_beta(beta);
  if (beta == 1) return f(double{});
  return f(cplx{});
}

}  // namespace freemix
