#pragma once

#include <string>
#include <vector>

#include "freemix/density.hpp"
#include "freemix/ensembles.hpp"
#include "freemix/random.hpp"
#include "freemix/spectrum.hpp"

namespace freemix {

/// G(z) = sum_i w_i / (z - lambda_i). Throws PoleCollision when z sits on an
/// atom to machine precision.
cplx cauchy_transform(const Spectrum& s, cplx z);

/// Default threshold separating genuinely complex roots from eigensolver
/// dust on real ones: |Im w| > tol * (1 + |w|).
inline constexpr double kComplexRootTolerance = 1e-9;

/// Roots are carried in extended precision: a root pinned between two nearly
/// coincident poles cannot meet a tight residual bound as a double.
using Root = std::complex<long double>;

inline bool is_complex_root(Root w, double tol = kComplexRootTolerance) {
  return std::abs(w.imag()) > tol * (1.0L + std::abs(w));
}

/// Roots w of the N-fold inverse-Cauchy equation at real z, written as the
/// pole equation
///
///     sum_i w_i v_i / (w - v_i) = -(N - 1) / N,   v_i = (N - 1) / (N lambda_i - z),
///
/// (with w_i = 1/m this is the familiar sum_i v_i / (w - v_i) = -m (N-1)/N).
/// The roots are the eigenvalues of the rank-one update
/// diag(v) + (1/alpha) 1 (w o v)^T, solved with a Hessenberg/shifted-QR dense
/// eigensolver and then Newton-polished in long double. Atoms with equal
/// value are grouped first, so the list has one root per distinct atom value.
/// At most one complex-conjugate pair exists.
///
/// Throws std::invalid_argument for N < 2, PoleCollision when z = N lambda_i,
/// SolverFailure when the eigensolver does not converge.
std::vector<Root> nfold_roots(const Spectrum& s, double z, int folds);

/// |sum_i w_i v_i / (w - v_i) - alpha| / |alpha| for a candidate root w.
double nfold_residual(const Spectrum& s, double z, int folds, Root w);

/// Boundary value G_N(z + i0) of the N-fold free self-sum at real z. Inside
/// the support this is the complex root with negative imaginary part;
/// outside, the real root nearest 1/(z - N m1).
cplx nfold_cauchy_transform(const Spectrum& s, double z, int folds);

/// Density of the N-fold free self-sum at x, Im(w+)/pi with w+ the root of
/// largest positive imaginary part (0 when every root is real). Not
/// renormalized.
double nfold_free_density_at(const Spectrum& s, double x, int folds,
                             double root_tolerance = kComplexRootTolerance);

struct FreeSumQuery {
  Spectrum base;
  int folds = 2;
  GridSpec grid;
  double root_tolerance = kComplexRootTolerance;
  /// When > 0 the curve is Poisson-smoothed at width eta, i.e. it becomes
  /// -Im G(x + i eta) / pi.
  double eta = 0.0;
  /// Used only for folds == 1, where the base is simply smoothed.
  SmoothingSpec smoothing;
};

/// Per-grid-point root bookkeeping for the diagnostics sidecar.
struct PointDiagnostics {
  double x = 0.0;
  int n_real = 0;
  int n_complex = 0;
  double max_residual = 0.0;
  bool skipped = false;
  std::string error;
};

struct FreeDensityResult {
  /// Renormalized so the trapezoid integral is 1.
  DensityCurve curve;
  /// Im(w+) / pi at each grid point, before renormalization. Near
  /// inverse-square-root edges the trapezoid rule undercounts the mass, so
  /// renormalizing inflates the curve; these are the exact point values.
  Eigen::VectorXd pointwise;
  /// Trapezoid integral of the pointwise density before renormalization.
  double raw_integral = 0.0;
  std::vector<PointDiagnostics> diagnostics;
};

/// Analytic N-fold free self-convolution of a discrete spectrum on a grid.
/// Grid points where the roots cannot be computed (pole collision, solver
/// failure, more than one complex pair) get density 0 and are flagged.
FreeDensityResult nfold_free_density(const FreeSumQuery& q);

/// R(w) = G^{-1}(w) - 1/w. G^{-1}(w) is read off the eigenvalues of
/// diag(lambda) + (1/w) sqrt(w_i) sqrt(w_j), taking the root on the branch
/// with z ~ 1/w as w -> 0. Throws NumericalDegeneracy if no root is near
/// that branch.
cplx r_transform_probe(const Spectrum& s, cplx w);

/// Pools eigenvalues of Lambda1 + Q^dag Lambda2 Q over `samples` independent
/// Haar draws of Q (sample i uses seed.child(i)). Both spectra must be
/// unweighted with equal size. Weight 1/(m samples) per eigenvalue.
template <typename Scalar>
Spectrum free_sum_mc(const Spectrum& s1, const Spectrum& s2, int samples, RngSeed seed);

Spectrum free_sum_mc(const Spectrum& s1, const Spectrum& s2, int beta, int samples, RngSeed seed);

/// Eigenvalues of diag(s1) + Q^dag diag(s2) Q for one given Q.
template <typename Scalar>
Spectrum conjugated_sum(const Spectrum& s1, const Spectrum& s2, const Matrix<Scalar>& q) {
  const Eigen::VectorXd l1 = s1.values();
  const Eigen::VectorXd l2 = s2.values();
  Matrix<Scalar> a = q.adjoint() * l2.cast<Scalar>().asDiagonal() * q;
  a.diagonal() += l1.cast<Scalar>();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverFailure("symmetric eigensolver failed");
  return Spectrum::from_vector(es.eigenvalues());
}

extern template Spectrum free_sum_mc<double>(const Spectrum&, const Spectrum&, int, RngSeed);
extern template Spectrum free_sum_mc<cplx>(const Spectrum&, const Spectrum&, int, RngSeed);

}  // namespace freemix
