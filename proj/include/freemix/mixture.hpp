#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "freemix/classical.hpp"
#include "freemix/density.hpp"
#include "freemix/ensembles.hpp"
#include "freemix/free_convolution.hpp"

namespace freemix {

// ---------------------------------------------------------------------------
// Summand pairs
// ---------------------------------------------------------------------------

/// One concrete draw of the two summands. Models that know their spectra or
/// relative eigenvectors in closed form may fill the optional fields; the
/// estimator diagonalizes whatever is missing.
template <typename Scalar>
struct MatrixPair {
  Matrix<Scalar> m1;
  Matrix<Scalar> m2;
  std::optional<Spectrum> s1;
  std::optional<Spectrum> s2;
  /// Q with M1 + M2 unitarily similar to Lambda1 + Q^dag Lambda2 Q, the
  /// Lambdas in any fixed order (only ordering-invariant statistics use it).
  std::optional<Matrix<Scalar>> relative;
};

template <typename Scalar>
struct FixedMatrices {
  Matrix<Scalar> m1;
  Matrix<Scalar> m2;
};

template <typename Scalar>
struct PairSampler {
  std::function<MatrixPair<Scalar>(Engine&)> draw;
  /// Model-supplied analytic p, if one exists.
  std::optional<double> closed_form_p;
};

/// M1 = diag(lambda1), M2 = Qs^dag diag(lambda2) Qs.
template <typename Scalar>
struct EigenvectorCoupling {
  Eigen::VectorXd lambda1;
  Eigen::VectorXd lambda2;
  Matrix<Scalar> qs;
};

template <typename Scalar>
using Coupling = std::variant<FixedMatrices<Scalar>, PairSampler<Scalar>, EigenvectorCoupling<Scalar>>;

template <typename Scalar>
struct SummandPair {
  Coupling<Scalar> coupling;

  bool deterministic() const { return !std::holds_alternative<PairSampler<Scalar>>(coupling); }

  std::optional<double> closed_form_p() const {
    if (const auto* s = std::get_if<PairSampler<Scalar>>(&coupling)) return s->closed_form_p;
    return std::nullopt;
  }

  MatrixPair<Scalar> draw(Engine& rng) const {
    if (const auto* f = std::get_if<FixedMatrices<Scalar>>(&coupling)) {
      if (f->m1.rows() != f->m2.rows()) throw std::invalid_argument("summand dimension mismatch");
      return {f->m1, f->m2, std::nullopt, std::nullopt, std::nullopt};
    }
    if (const auto* e = std::get_if<EigenvectorCoupling<Scalar>>(&coupling)) {
      if (e->lambda1.size() != e->lambda2.size() || e->qs.rows() != e->lambda1.size())
        throw std::invalid_argument("summand dimension mismatch");
      MatrixPair<Scalar> p;
      p.m1 = e->lambda1.template cast<Scalar>().asDiagonal();
      p.m2 = e->qs.adjoint() * e->lambda2.template cast<Scalar>().asDiagonal() * e->qs;
      p.s1 = Spectrum::from_vector(e->lambda1);
      p.s2 = Spectrum::from_vector(e->lambda2);
      p.relative = e->qs;
      return p;
    }
    auto p = std::get<PairSampler<Scalar>>(coupling).draw(rng);
    if (p.m1.rows() != p.m2.rows()) throw std::invalid_argument("summand dimension mismatch");
    return p;
  }
};

// ---------------------------------------------------------------------------
// Fourth moments and p
// ---------------------------------------------------------------------------

/// (1/m) Tr[A^k] for k = 1..4 of a Hermitian matrix, without diagonalizing.
template <typename Scalar>
std::array<double, 4> trace_moments(const Matrix<Scalar>& a) {
  const double m = static_cast<double>(a.rows());
  const Matrix<Scalar> a2 = a * a;
  const double t1 = std::real(a.trace());
  const double t2 = std::real(a2.trace());
  const double t3 = std::real((a.transpose().array() * a2.array()).sum());
  const double t4 = a2.squaredNorm();
  return {t1 / m, t2 / m, t3 / m, t4 / m};
}

/// (1/m) E Tr[(M1 + M2)^4], averaged over `samples` draws (one draw when the
/// pair is deterministic). Draw i uses seed.child(i).
template <typename Scalar>
double exact_fourth_moment(const SummandPair<Scalar>& pair, int samples, RngSeed seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const int n = pair.deterministic() ? 1 : samples;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    Engine rng = make_engine(seed.child(static_cast<std::uint64_t>(i)));
    const MatrixPair<Scalar> p = pair.draw(rng);
    acc += trace_moments<Scalar>(p.m1 + p.m2)[3];
  }
  return acc / n;
}

/// Fourth moment of Lambda1 + Q^dag Lambda2 Q averaged over beta-Haar Q,
/// from the Haar moment table (exact at finite m).
double free_fourth_moment(const Spectrum& s1, const Spectrum& s2, Index m, int beta);

/// (1/m) E Tr[(Lambda1 Q^dag Lambda2 Q)^2] over beta-Haar Q, the crossing term
/// of the free fourth moment.
double free_crossing_term(const Spectrum& s1, const Spectrum& s2, Index m, int beta);

/// classical_moment(s1, s2, 4).
double classical_fourth_moment(const Spectrum& s1, const Spectrum& s2);

struct PEstimate {
  double raw = 0.0;
  double clamped = 0.0;
  bool out_of_range = false;
};

/// (m4c - m4) / (m4c - m4f). Raw and clamped values are both returned.
/// Throws NumericalDegeneracy when |m4c - m4f| < 1e-12 max(|m4c|, |m4f|).
PEstimate p_from_moments(double m4, double m4c, double m4f);

/// ipr_s / haar_ipr_closed(m, beta), or ipr_s itself in the m -> infinity form.
PEstimate p_from_ipr(double ipr_s, Index m, int beta, bool asymptotic = false);

/// (ell - 1)(m beta + 2) / [(ell - 1)(m beta + 2) + 2 (m - ell)] for a
/// diagonal Gaussian plus a block-diagonal G(O/U)E with ell x ell blocks.
double p_block_closed(Index m, Index ell, int beta);

/// (ell - 1) / (ell + 2): what the IPR route predicts for the block model,
/// which violates permutation invariance of the relative eigenvectors.
double block_ipr_mismatch(Index ell);

// ---------------------------------------------------------------------------
// Crossing terms
// ---------------------------------------------------------------------------

/// (1/m) Tr[(Lambda1 U^dag Lambda2 U)^2].
template <typename Scalar>
double crossing_term(const Spectrum& s1, const Spectrum& s2, const Matrix<Scalar>& u) {
  const Eigen::VectorXd l1 = s1.values();
  const Eigen::VectorXd l2 = s2.values();
  if (u.rows() != l1.size() || u.cols() != l2.size() || l1.size() != l2.size())
    throw std::invalid_argument("crossing_term: dimension mismatch");
  const Matrix<Scalar> c = l1.cast<Scalar>().asDiagonal() * (u.adjoint() * l2.cast<Scalar>().asDiagonal() * u);
  return std::real((c.transpose().array() * c.array()).sum()) / static_cast<double>(u.rows());
}

/// Tag selecting the exhaustive average over all m! permutation matrices.
struct ExhaustivePermutations {};

/// Permutation-averaged crossing term, exhaustive over all m! permutations.
/// Throws for m > 6.
double permutation_crossing_term(const Spectrum& s1, const Spectrum& s2);

/// phi[(L1 P^T L2 P)^2] - phi[(L1 U^dag L2 U)^2], permutation side exhaustive.
template <typename Scalar>
double crossing_term_gap(const Spectrum& s1, const Spectrum& s2, const Matrix<Scalar>& u) {
  return permutation_crossing_term(s1, s2) - crossing_term<Scalar>(s1, s2, u);
}

/// Both sides averaged over permutations; identically zero up to rounding.
double crossing_term_gap(const Spectrum& s1, const Spectrum& s2, ExhaustivePermutations);

struct MonteCarloValue {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Gap against the Haar-averaged crossing term, by Monte Carlo over Q.
/// The permutation side is exhaustive for m <= 6 and sampled with the same
/// number of draws otherwise.
MonteCarloValue crossing_term_gap_haar(const Spectrum& s1, const Spectrum& s2, int beta, int samples,
                                       RngSeed seed);

// ---------------------------------------------------------------------------
// End-to-end estimator
// ---------------------------------------------------------------------------

enum class PMethod { closed, moments, ipr };

std::string to_string(PMethod m);
PMethod parse_p_method(const std::string& s);

struct EstimateConfig {
  int samples = 200;
  RngSeed seed;
  /// Empty: closed form if the model has one, else moment matching.
  /// Moment matching uses the crossing traces,
  ///   p = E[Tr M1^2 M2^2 - Tr (M1 M2)^2] / E[Tr M1^2 M2^2 - Tr (L1 Q^dag L2 Q)^2],
  /// the fourth-moment ratio with the terms that match classically removed.
  std::optional<PMethod> method;
  bool asymptotic_ipr = false;
  /// Haar draws for the Monte Carlo free density.
  int free_samples = 200;
  std::optional<GridSpec> grid;
  std::size_t grid_points = 512;
  SmoothingSpec smoothing;
};

struct MomentReport {
  double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  double kappa2_1 = 0.0, kappa2_2 = 0.0;
  double m4_exact = 0.0, m4_classical = 0.0, m4_free = 0.0;
  /// Means of the per-draw crossing traces (see DrawSummary).
  double cross_classical = 0.0, cross_exact = 0.0, cross_free = 0.0;
  double ipr = 0.0;
  double p_raw = 0.0, p_clamped = 0.0, p_stderr = 0.0;
  /// p_moments: crossing-trace ratio. p_fourth_moment: (m4c - m4) / (m4c - m4f)
  /// over the full fourth moments, which agrees in expectation but carries
  /// extra zero-mean sampling noise from the non-crossing terms.
  std::optional<double> p_moments, p_fourth_moment, p_ipr, p_closed;
  PMethod p_method = PMethod::moments;
  int samples = 0;
  Index dimension = 0;
  int beta = 1;
  std::vector<std::string> warnings;
};

struct DrawSummary {
  Spectrum s1, s2;
  std::array<double, 4> exact_moments{};
  double m4_classical = 0.0;
  double m4_free = 0.0;
  /// (1/m) Tr[M1^2 M2^2], (1/m) Tr[(M1 M2)^2] and the Haar average of the latter.
  double cross_classical = 0.0;
  double cross_exact = 0.0;
  double cross_free = 0.0;
  double ipr = 0.0;
};

/// (1/m) Tr[A^2 B^2] and (1/m) Tr[(A B)^2]; O(m^2) when A is diagonal.
template <typename Scalar>
std::array<double, 2> crossing_traces(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  const double m = static_cast<double>(a.rows());
  if (Matrix<Scalar>(a.diagonal().asDiagonal()) == a) {
    const Eigen::VectorXd d = a.diagonal().real();
    const Eigen::MatrixXd b2 = b.cwiseAbs2();
    const double classical = (d.cwiseAbs2().asDiagonal() * b2).sum();
    const double exact = d.dot(b2 * d);
    return {classical / m, exact / m};
  }
  const Matrix<Scalar> a2 = a * a;
  const Matrix<Scalar> b2 = b * b;
  const Matrix<Scalar> ab = a * b;
  const double classical = std::real((a2.transpose().array() * b2.array()).sum());
  const double exact = std::real((ab.transpose().array() * ab.array()).sum());
  return {classical / m, exact / m};
}

/// Diagonalizes one draw as needed and computes its moment statistics.
template <typename Scalar>
DrawSummary summarize_draw(const MatrixPair<Scalar>& p) {
  DrawSummary d;
  const Index m = p.m1.rows();
  Matrix<Scalar> v1, v2;
  auto decompose = [](const Matrix<Scalar>& a, Matrix<Scalar>& vecs, bool want_vecs) {
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(a, want_vecs ? Eigen::ComputeEigenvectors
                                                                   : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverFailure("symmetric eigensolver failed");
    if (want_vecs) vecs = es.eigenvectors();
    return Spectrum::from_vector(es.eigenvalues());
  };
  const bool need_vecs = !p.relative.has_value();
  d.s1 = p.s1 && !need_vecs ? *p.s1 : decompose(p.m1, v1, need_vecs);
  d.s2 = p.s2 && !need_vecs ? *p.s2 : decompose(p.m2, v2, need_vecs);
  d.ipr = need_vecs ? ipr(Matrix<Scalar>(v2.adjoint() * v1)) : ipr(*p.relative);
  d.exact_moments = trace_moments<Scalar>(p.m1 + p.m2);
  d.m4_classical = classical_fourth_moment(d.s1, d.s2);
  d.m4_free = free_fourth_moment(d.s1, d.s2, m, beta_of_v<Scalar>);
  const auto cross = crossing_traces<Scalar>(p.m1, p.m2);
  d.cross_classical = cross[0];
  d.cross_exact = cross[1];
  d.cross_free = free_crossing_term(d.s1, d.s2, m, beta_of_v<Scalar>);
  return d;
}

/// Aggregates per-draw statistics into a report and selects p.
MomentReport build_report(const std::vector<DrawSummary>& draws, Index m, int beta,
                          std::optional<double> closed_form_p, const EstimateConfig& config);

/// Moment statistics and p, without densities.
template <typename Scalar>
MomentReport estimate_moments(const SummandPair<Scalar>& pair, const EstimateConfig& config) {
  if (config.samples < 1) throw std::invalid_argument("samples must be >= 1");
  const int n = pair.deterministic() ? 1 : config.samples;
  std::vector<DrawSummary> draws;
  draws.reserve(static_cast<std::size_t>(n));
  Index m = 0;
  for (int i = 0; i < n; ++i) {
    Engine rng = make_engine(config.seed.child(static_cast<std::uint64_t>(i)));
    const MatrixPair<Scalar> p = pair.draw(rng);
    m = p.m1.rows();
    draws.push_back(summarize_draw<Scalar>(p));
  }
  return build_report(draws, m, beta_of_v<Scalar>, pair.closed_form_p(), config);
}

struct EstimateResult {
  MomentReport report;
  DensityCurve exact;
  DensityCurve classical;
  DensityCurve free;
  DensityCurve mixed;
};

/// Full pipeline: moment report, exact / classical / Monte Carlo free
/// densities on a common grid, and their p-mixture.
template <typename Scalar>
EstimateResult estimate(const SummandPair<Scalar>& pair, const EstimateConfig& config);

extern template EstimateResult estimate<double>(const SummandPair<double>&, const EstimateConfig&);
extern template EstimateResult estimate<cplx>(const SummandPair<cplx>&, const EstimateConfig&);

}  // namespace freemix
