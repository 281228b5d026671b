#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "freemix/ensembles.hpp"
#include "freemix/mixture.hpp"
#include "freemix/spectrum.hpp"

namespace freemix {

/// Diagonal matrix with i.i.d. N(0, variance) entries.
MatrixSample<double> diag_gaussian(Index m, double variance, Engine& rng);

/// Block-diagonal matrix of m / ell independent sample_goe_block blocks.
template <typename Scalar>
MatrixSample<Scalar> block_goe(Index m, Index ell, Engine& rng);

/// Toeplitz matrix with entries rho^|i - j|, 0 < rho < 1.
MatrixSample<double> kms_matrix(Index m, double rho);

/// Nearest-neighbour hopping on a ring: ones on the first off-diagonals and
/// in the two corners. Equals 2I + L for the periodic Laplacian L.
MatrixSample<double> anderson_hopping(Index m);

// ---------------------------------------------------------------------------
// Spin chains
// ---------------------------------------------------------------------------

enum class LocalEnsemble {
  gue,
  goe,
  /// Haar eigenvectors, i.i.d. uniform {0, 1} eigenvalues.
  projector,
  /// Haar eigenvectors, i.i.d. uniform {-1, +1} eigenvalues.
  bernoulli,
  /// Caller-supplied terms.
  fixed,
};

std::string to_string(LocalEnsemble e);
LocalEnsemble parse_local_ensemble(const std::string& s);

/// H = sum_{k=1}^{n-1} I (x) H_{k,k+1} (x) I on n sites of local dimension d.
struct SpinChainSpec {
  int n = 3;
  int d = 5;
  LocalEnsemble ensemble = LocalEnsemble::bernoulli;
  /// Dyson index of the local terms; goe forces 1 and gue forces 2.
  int beta = 2;
  /// For LocalEnsemble::fixed: either one term reused on every bond or n - 1
  /// terms, each d^2 x d^2 Hermitian.
  std::vector<Matrix<cplx>> fixed_terms;
  std::uint64_t seed = 0;
  Index max_dimension = Index{1} << 14;

  Index dimension() const;
  /// Throws std::invalid_argument on n < 2, d < 2 or d^n above the cap.
  void validate() const;
  int effective_beta() const;
};

/// Local bond terms H_{k,k+1}, k = 1..n-1. Random term k draws from stream k.
template <typename Scalar>
std::vector<Matrix<Scalar>> spin_chain_terms(const SpinChainSpec& spec);

template <typename Scalar>
struct SpinChainHamiltonian {
  MatrixSample<Scalar> h;
  /// Sum over bonds k = 1, 3, 5, ...
  MatrixSample<Scalar> h_odd;
  /// Sum over bonds k = 2, 4, ...
  MatrixSample<Scalar> h_even;
};

template <typename Scalar>
SpinChainHamiltonian<Scalar> spin_chain_build(const SpinChainSpec& spec);

/// Odd/even splitting in the eigenbasis of each half, assembled from the
/// local d^2 x d^2 eigen-decompositions only.
///
/// With V_odd, V_even the Kronecker products of local eigenvector columns,
/// V_odd^dag H V_odd = diag(lambda_odd) + Qs^dag diag(lambda_even) Qs where
/// Qs = V_even^dag V_odd.
template <typename Scalar>
struct SpinChainSpectra {
  /// Diagonals in Kronecker order (unsorted), matching Qs.
  Eigen::VectorXd lambda_odd;
  Eigen::VectorXd lambda_even;
  Spectrum odd;
  Spectrum even;
  MatrixSample<Scalar> qs;
};

template <typename Scalar>
SpinChainSpectra<Scalar> spin_chain_spectra(const SpinChainSpec& spec);

// ---------------------------------------------------------------------------
// Named models
// ---------------------------------------------------------------------------

/// Parameters for the named models "diag-gauss", "block-goe", "kms",
/// "anderson" and "spin-chain". M1 is diag N(0, variance) in all but
/// spin-chain, where M1 and M2 are the odd and even halves of H.
struct ModelSpec {
  std::string name;
  Index m = 64;
  Index ell = 8;
  int beta = 1;
  double rho = 0.5;
  double variance = 1.0;
  int n = 3;
  int d = 5;
  LocalEnsemble ensemble = LocalEnsemble::bernoulli;
  /// diag-gauss only: "identity", "permutation" or "haar".
  std::string coupling = "haar";
  std::uint64_t seed = 0;
};

const std::vector<std::string>& model_names();

using AnyPair = std::variant<SummandPair<double>, SummandPair<cplx>>;

/// Builds the summand pair for a named model. Throws std::invalid_argument
/// for unknown names or invalid parameters.
AnyPair make_model(const ModelSpec& spec);

extern template MatrixSample<double> block_goe<double>(Index, Index, Engine&);
extern template MatrixSample<cplx> block_goe<cplx>(Index, Index, Engine&);
extern template std::vector<Matrix<double>> spin_chain_terms<double>(const SpinChainSpec&);
extern template std::vector<Matrix<cplx>> spin_chain_terms<cplx>(const SpinChainSpec&);
extern template SpinChainHamiltonian<double> spin_chain_build<double>(const SpinChainSpec&);
extern template SpinChainHamiltonian<cplx> spin_chain_build<cplx>(const SpinChainSpec&);
extern template SpinChainSpectra<double> spin_chain_spectra<double>(const SpinChainSpec&);
extern template SpinChainSpectra<cplx> spin_chain_spectra<cplx>(const SpinChainSpec&);

}  // namespace freemix
