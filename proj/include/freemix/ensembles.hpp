#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "freemix/common.hpp"
#include "freemix/random.hpp"

namespace freemix {

enum class MatrixKind { haar, permutation, hermitian, general };

/// Dense square matrix tagged with how it was produced. beta follows the
/// scalar type: real samples are beta=1, complex samples beta=2.
template <typename Scalar>
struct MatrixSample {
  static constexpr int beta = beta_of_v<Scalar>;

  Matrix<Scalar> entries;
  MatrixKind kind = MatrixKind::general;

  Index size() const { return entries.rows(); }
};

/// Standard Gaussian scalar. Complex draws have independent real and
/// imaginary parts, each of variance `variance / 2`, so E|z|^2 = variance.
template <typename Scalar>
Scalar gaussian(Engine& rng, double variance = 1.0) {
  if constexpr (is_complex_v<Scalar>) {
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
  } else {
    std::normal_distribution<double> n(0.0, std::sqrt(variance));
    return n(rng);
  }
}

template <typename Scalar>
Matrix<Scalar> gaussian_matrix(Index rows, Index cols, Engine& rng, double variance = 1.0) {
  Matrix<Scalar> g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = gaussian<Scalar>(rng, variance);
  return g;
}

/// Haar-distributed orthogonal (double) or unitary (complex) matrix.
///
/// QR of an i.i.d. Gaussian matrix, with each column of Q multiplied by the
/// phase of the matching diagonal entry of R. Without that correction the
/// result is orthonormal but not Haar.
template <typename Scalar>
MatrixSample<Scalar> sample_haar(Index m, Engine& rng) {
  if (m < 1) throw std::invalid_argument("sample_haar needs m >= 1");
  const Matrix<Scalar> g = gaussian_matrix<Scalar>(m, m, rng);
  Eigen::HouseholderQR<Matrix<Scalar>> qr(g);
  Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(m, m);
  const Matrix<Scalar>& r = qr.matrixQR();
  for (Index j = 0; j < m; ++j) {
    const Scalar d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return {std::move(q), MatrixKind::haar};
}

template <typename Scalar>
MatrixSample<Scalar> sample_haar(Index m, RngSeed seed) {
  Engine rng = make_engine(seed);
  return sample_haar<Scalar>(m, rng);
}

/// Uniform random permutation of 0..m-1 (Fisher-Yates).
inline std::vector<Index> random_permutation(Index m, Engine& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = m - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  return perm;
}

/// P with P(i, perm[i]) = 1.
template <typename Scalar = double>
MatrixSample<Scalar> permutation_matrix(const std::vector<Index>& perm) {
  const auto m = static_cast<Index>(perm.size());
  Matrix<Scalar> p = Matrix<Scalar>::Zero(m, m);
  for (Index i = 0; i < m; ++i) p(i, perm[static_cast<std::size_t>(i)]) = Scalar(1);
  return {std::move(p), MatrixKind::permutation};
}

template <typename Scalar = double>
MatrixSample<Scalar> sample_permutation(Index m, Engine& rng) {
  if (m < 1) throw std::invalid_argument("sample_permutation needs m >= 1");
  return permutation_matrix<Scalar>(random_permutation(m, rng));
}

/// Inverse participation ratio 1 - (1/m) sum_ij |u_ij|^4: 0 for permutation
/// (fully localized) matrices, 1 - 1/m for flat ones.
template <typename Derived>
double ipr(const Eigen::MatrixBase<Derived>& u) {
  if (u.rows() != u.cols()) throw std::invalid_argument("ipr needs a square matrix");
  const auto m = static_cast<double>(u.rows());
  return 1.0 - u.cwiseAbs2().cwiseAbs2().sum() / m;
}

template <typename Scalar>
double ipr(const MatrixSample<Scalar>& u) {
  return ipr(u.entries);
}

/// E|q_ij|^4 = (beta + 2) / (m (m beta + 2)) for beta-Haar q.
double haar_fourth_moment(Index m, int beta);

/// 1 - m E|q|^4 = (m - 1) beta / (m beta + 2).
double haar_ipr_closed(Index m, int beta);

struct HaarCrossMoments {
  /// E(|q_ij|^2 |q_ik|^2), j != k.
  double e22;
  /// E(conj(q_ji) q_jk conj(q_pk) q_pi), i != k and j != p. Zero at m = 1,
  /// where no such index pair exists.
  double e_cross;
};

HaarCrossMoments haar_cross_moments(Index m, int beta);

/// (G + G^dag) / 2 for an ell x ell i.i.d. Gaussian G: diagonal variance 1,
/// off-diagonal E|b_ij|^2 = beta / 2. Complex G has real and imaginary parts
/// of unit variance.
template <typename Scalar>
MatrixSample<Scalar> sample_goe_block(Index ell, Engine& rng) {
  if (ell < 1) throw std::invalid_argument("sample_goe_block needs ell >= 1");
  const double var = is_complex_v<Scalar> ? 2.0 : 1.0;
  const Matrix<Scalar> g = gaussian_matrix<Scalar>(ell, ell, rng, var);
  Matrix<Scalar> b = (g + g.adjoint()) / 2.0;
  return {std::move(b), MatrixKind::hermitian};
}

/// Largest |A - A^dag| entry.
template <typename Derived>
double hermitian_defect(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Largest |U^dag U - I| entry.
template <typename Derived>
double orthonormality_defect(const Eigen::MatrixBase<Derived>& u) {
  using S = typename Derived::Scalar;
  const Matrix<S> g = u.adjoint() * u;
  return (g - Matrix<S>::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace freemix
