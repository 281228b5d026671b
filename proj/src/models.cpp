#include "freemix/models.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace freemix {

MatrixSample<double> diag_gaussian(Index m, double variance, Engine& rng) {
  if (m < 1) throw std::invalid_argument("diag_gaussian needs m >= 1");
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw std::invalid_argument("diag_gaussian needs a positive variance");
  std::normal_distribution<double> n(0.0, std::sqrt(variance));
  Eigen::VectorXd d(m);
  for (Index i = 0; i < m; ++i) d(i) = n(rng);
  return {Matrix<double>(d.asDiagonal()), MatrixKind::hermitian};
}

template <typename Scalar>
MatrixSample<Scalar> block_goe(Index m, Index ell, Engine& rng) {
  if (ell < 1 || m < 1 || m % ell != 0) throw std::invalid_argument("block size must divide m");
  Matrix<Scalar> b = Matrix<Scalar>::Zero(m, m);
  for (Index k = 0; k < m; k += ell) b.block(k, k, ell, ell) = sample_goe_block<Scalar>(ell, rng).entries;
  return {std::move(b), MatrixKind::hermitian};
}

MatrixSample<double> kms_matrix(Index m, double rho) {
  if (m < 1) throw std::invalid_argument("kms_matrix needs m >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("kms_matrix needs 0 < rho < 1");
  Matrix<double> k(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) k(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  return {std::move(k), MatrixKind::hermitian};
}

MatrixSample<double> anderson_hopping(Index m) {
  if (m < 3) throw std::invalid_argument("anderson_hopping needs m >= 3");
  Matrix<double> a = Matrix<double>::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    a(i, (i + 1) % m) = 1.0;
    a((i + 1) % m, i) = 1.0;
  }
  return {std::move(a), MatrixKind::hermitian};
}

std::string to_string(LocalEnsemble e) {
  switch (e) {
    case LocalEnsemble::gue: return "gue";
    case LocalEnsemble::goe: return "goe";
    case LocalEnsemble::projector: return "projector";
    case LocalEnsemble::bernoulli: return "bernoulli";
    case LocalEnsemble::fixed: return "fixed";
  }
  return "unknown";
}

LocalEnsemble parse_local_ensemble(const std::string& s) {
  for (auto e : {LocalEnsemble::gue, LocalEnsemble::goe, LocalEnsemble::projector, LocalEnsemble::bernoulli,
                 LocalEnsemble::fixed})
    if (to_string(e) == s) return e;
  throw std::invalid_argument("unknown local ensemble '" + s + "'");
}

Index SpinChainSpec::dimension() const {
  Index dim = 1;
  for (int i = 0; i < n; ++i) {
    if (dim > max_dimension) break;
    dim *= d;
  }
  return dim;
}

void SpinChainSpec::validate() const {
  if (n < 2) throw std::invalid_argument("spin chain needs n >= 2 sites");
  if (d < 2) throw std::invalid_argument("spin chain needs local dimension d >= 2");
  if (dimension() > max_dimension)
    throw std::invalid_argument("spin chain dimension d^n exceeds the cap of " + std::to_string(max_dimension));
  if (ensemble == LocalEnsemble::fixed) {
    const auto count = static_cast<int>(fixed_terms.size());
    if (count != 1 && count != n - 1) throw std::invalid_argument("fixed ensemble needs 1 or n-1 local terms");
    const Index dd = static_cast<Index>(d) * d;
    for (const auto& t : fixed_terms) {
      if (t.rows() != dd || t.cols() != dd) throw std::invalid_argument("local terms must be d^2 x d^2");
      if (hermitian_defect(t) > 1e-12 * (1.0 + t.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("local terms must be Hermitian");
    }
  }
  if (ensemble != LocalEnsemble::goe && ensemble != LocalEnsemble::gue) check_beta(beta);
}

int SpinChainSpec::effective_beta() const {
  if (ensemble == LocalEnsemble::goe) return 1;
  if (ensemble == LocalEnsemble::gue) return 2;
  return beta;
}

template <typename Scalar>
std::vector<Matrix<Scalar>> spin_chain_terms(const SpinChainSpec& spec) {
  spec.validate();
  if (beta_of_v<Scalar> != spec.effective_beta())
    throw std::invalid_argument("scalar type does not match the spin chain's beta");
  const Index dd = static_cast<Index>(spec.d) * spec.d;
  std::vector<Matrix<Scalar>> terms;
  for (int k = 1; k < spec.n; ++k) {
    Engine rng = make_engine(RngSeed{spec.seed, static_cast<std::uint64_t>(k)});
    switch (spec.ensemble) {
      case LocalEnsemble::gue:
      case LocalEnsemble::goe:
        terms.push_back(sample_goe_block<Scalar>(dd, rng).entries);
        break;
      case LocalEnsemble::projector:
      case LocalEnsemble::bernoulli: {
        const Matrix<Scalar> v = sample_haar<Scalar>(dd, rng).entries;
        std::bernoulli_distribution coin(0.5);
        Eigen::VectorXd lam(dd);
        const double low = spec.ensemble == LocalEnsemble::projector ? 0.0 : -1.0;
        for (Index i = 0; i < dd; ++i) lam(i) = coin(rng) ? 1.0 : low;
        Matrix<Scalar> h = v * lam.cast<Scalar>().asDiagonal() * v.adjoint();
        h = (h + h.adjoint()).eval() / 2.0;
        terms.push_back(std::move(h));
        break;
      }
      case LocalEnsemble::fixed: {
        const Matrix<cplx>& t = spec.fixed_terms[spec.fixed_terms.size() == 1 ? 0 : static_cast<std::size_t>(k - 1)];
        if constexpr (is_complex_v<Scalar>) {
          terms.push_back(t);
        } else {
          if (t.imag().cwiseAbs().maxCoeff() != 0.0)
            throw std::invalid_argument("complex local term with beta = 1");
          terms.push_back(t.real());
        }
        break;
      }
    }
  }
  return terms;
}

namespace {

template <typename Scalar>
Matrix<Scalar> kron(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

template <typename Scalar>
Matrix<Scalar> identity(Index n) {
  return Matrix<Scalar>::Identity(n, n);
}

// Kronecker sum a (x) 1 + 1 (x) b of two diagonals.
Eigen::VectorXd kron_sum(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd c(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i)
    for (Index j = 0; j < b.size(); ++j) c(i * b.size() + j) = a(i) + b(j);
  return c;
}

Index ipow(Index base, int exp) {
  Index r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

template <typename Scalar>
SpinChainHamiltonian<Scalar> spin_chain_build(const SpinChainSpec& spec) {
  const auto terms = spin_chain_terms<Scalar>(spec);
  const Index dim = spec.dimension();
  Matrix<Scalar> odd = Matrix<Scalar>::Zero(dim, dim);
  Matrix<Scalar> even = Matrix<Scalar>::Zero(dim, dim);
  for (int k = 1; k < spec.n; ++k) {
    const Index left = ipow(spec.d, k - 1);
    const Index right = ipow(spec.d, spec.n - k - 1);
    const Matrix<Scalar> embedded =
        kron<Scalar>(kron<Scalar>(identity<Scalar>(left), terms[static_cast<std::size_t>(k - 1)]),
                     identity<Scalar>(right));
    (k % 2 == 1 ? odd : even) += embedded;
  }
  Matrix<Scalar> h = odd + even;
  return {{std::move(h), MatrixKind::hermitian},
          {std::move(odd), MatrixKind::hermitian},
          {std::move(even), MatrixKind::hermitian}};
}

template <typename Scalar>
SpinChainSpectra<Scalar> spin_chain_spectra(const SpinChainSpec& spec) {
  const auto terms = spin_chain_terms<Scalar>(spec);
  const Index d = spec.d;
  const int n = spec.n;

  Matrix<Scalar> v_odd = identity<Scalar>(1);
  Eigen::VectorXd l_odd = Eigen::VectorXd::Zero(1);
  // The even half starts with the lone first site.
  Matrix<Scalar> v_even = identity<Scalar>(d);
  Eigen::VectorXd l_even = Eigen::VectorXd::Zero(d);

  for (int k = 1; k < n; ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(terms[static_cast<std::size_t>(k - 1)]);
    if (es.info() != Eigen::Success) throw SolverFailure("local eigensolver failed");
    Matrix<Scalar>& v = k % 2 == 1 ? v_odd : v_even;
    Eigen::VectorXd& l = k % 2 == 1 ? l_odd : l_even;
    v = kron<Scalar>(v, es.eigenvectors());
    l = kron_sum(l, es.eigenvalues());
  }
  // A trailing unpaired site: the odd half when n is odd, the even half when n is even.
  Matrix<Scalar>& tail_v = n % 2 == 1 ? v_odd : v_even;
  Eigen::VectorXd& tail_l = n % 2 == 1 ? l_odd : l_even;
  tail_v = kron<Scalar>(tail_v, identity<Scalar>(d));
  tail_l = kron_sum(tail_l, Eigen::VectorXd::Zero(d));

  SpinChainSpectra<Scalar> out;
  out.lambda_odd = l_odd;
  out.lambda_even = l_even;
  out.odd = Spectrum::from_vector(l_odd);
  out.even = Spectrum::from_vector(l_even);
  out.qs = {v_even.adjoint() * v_odd, MatrixKind::haar};
  return out;
}

template MatrixSample<double> block_goe<double>(Index, Index, Engine&);
template MatrixSample<cplx> block_goe<cplx>(Index, Index, Engine&);
template std::vector<Matrix<double>> spin_chain_terms<double>(const SpinChainSpec&);
template std::vector<Matrix<cplx>> spin_chain_terms<cplx>(const SpinChainSpec&);
template SpinChainHamiltonian<double> spin_chain_build<double>(const SpinChainSpec&);
template SpinChainHamiltonian<cplx> spin_chain_build<cplx>(const SpinChainSpec&);
template SpinChainSpectra<double> spin_chain_spectra<double>(const SpinChainSpec&);
template SpinChainSpectra<cplx> spin_chain_spectra<cplx>(const SpinChainSpec&);

// ---------------------------------------------------------------------------

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names{"diag-gauss", "block-goe", "kms", "anderson", "spin-chain"};
  return names;
}

namespace {

Eigen::VectorXd gaussian_diagonal(Index m, double variance, Engine& rng) {
  return diag_gaussian(m, variance, rng).entries.diagonal();
}

template <typename Scalar>
SummandPair<Scalar> diag_gauss_model(const ModelSpec& spec) {
  const Index m = spec.m;
  const double var = spec.variance;
  const std::string coupling = spec.coupling;
  if (coupling != "identity" && coupling != "permutation" && coupling != "haar")
    throw std::invalid_argument("unknown coupling '" + coupling + "' (identity, permutation or haar)");
  if (m < 1) throw std::invalid_argument("diag-gauss needs m >= 1");
  if (!(var > 0.0)) throw std::invalid_argument("variance must be positive");
  PairSampler<Scalar> sampler;
  sampler.draw = [m, var, coupling](Engine& rng) {
    const Eigen::VectorXd d1 = gaussian_diagonal(m, var, rng);
    const Eigen::VectorXd d2 = gaussian_diagonal(m, var, rng);
    Matrix<Scalar> u;
    if (coupling == "identity")
      u = Matrix<Scalar>::Identity(m, m);
    else if (coupling == "permutation")
      u = sample_permutation<Scalar>(m, rng).entries;
    else
      u = sample_haar<Scalar>(m, rng).entries;
    MatrixPair<Scalar> p;
    p.m1 = d1.cast<Scalar>().asDiagonal();
    p.m2 = u.adjoint() * d2.cast<Scalar>().asDiagonal() * u;
    p.s1 = Spectrum::from_vector(d1);
    p.s2 = Spectrum::from_vector(d2);
    p.relative = std::move(u);
    return p;
  };
  return {std::move(sampler)};
}

template <typename Scalar>
SummandPair<Scalar> block_goe_model(const ModelSpec& spec) {
  const Index m = spec.m, ell = spec.ell;
  const double var = spec.variance;
  PairSampler<Scalar> sampler;
  sampler.closed_form_p = p_block_closed(m, ell, beta_of_v<Scalar>);
  if (!(var > 0.0)) throw std::invalid_argument("variance must be positive");
  sampler.draw = [m, ell, var](Engine& rng) {
    const Eigen::VectorXd d1 = gaussian_diagonal(m, var, rng);
    MatrixPair<Scalar> p;
    p.m1 = d1.cast<Scalar>().asDiagonal();
    p.m2 = block_goe<Scalar>(m, ell, rng).entries;
    p.s1 = Spectrum::from_vector(d1);
    return p;
  };
  return {std::move(sampler)};
}

// Diagonal Gaussian plus a fixed real symmetric M2, diagonalized once.
SummandPair<double> fixed_partner_model(Matrix<double> m2, double var) {
  if (!(var > 0.0)) throw std::invalid_argument("variance must be positive");
  Eigen::SelfAdjointEigenSolver<Matrix<double>> es(m2);
  if (es.info() != Eigen::Success) throw SolverFailure("symmetric eigensolver failed");
  auto shared = std::make_shared<const std::tuple<Matrix<double>, Spectrum, Matrix<double>>>(
      std::move(m2), Spectrum::from_vector(es.eigenvalues()), es.eigenvectors().adjoint());
  PairSampler<double> sampler;
  sampler.draw = [shared, var](Engine& rng) {
    const auto& [mat, spec2, rel] = *shared;
    const Eigen::VectorXd d1 = gaussian_diagonal(mat.rows(), var, rng);
    MatrixPair<double> p;
    p.m1 = d1.asDiagonal();
    p.m2 = mat;
    p.s1 = Spectrum::from_vector(d1);
    p.s2 = spec2;
    p.relative = rel;
    return p;
  };
  return {std::move(sampler)};
}

template <typename Scalar>
SummandPair<Scalar> spin_chain_model(const SpinChainSpec& chain) {
  SpinChainSpectra<Scalar> s = spin_chain_spectra<Scalar>(chain);
  return {EigenvectorCoupling<Scalar>{std::move(s.lambda_odd), std::move(s.lambda_even), std::move(s.qs.entries)}};
}

void require_real(const ModelSpec& spec) {
  if (spec.beta != 1) throw std::invalid_argument("model '" + spec.name + "' is real symmetric (beta = 1 only)");
}

}  // namespace

AnyPair make_model(const ModelSpec& spec) {
  if (spec.name == "diag-gauss")
    return dispatch_beta(spec.beta, [&](auto tag) -> AnyPair { return diag_gauss_model<decltype(tag)>(spec); });
  if (spec.name == "block-goe")
    return dispatch_beta(spec.beta, [&](auto tag) -> AnyPair { return block_goe_model<decltype(tag)>(spec); });
  if (spec.name == "kms") {
    require_real(spec);
    return fixed_partner_model(kms_matrix(spec.m, spec.rho).entries, spec.variance);
  }
  if (spec.name == "anderson") {
    require_real(spec);
    return fixed_partner_model(anderson_hopping(spec.m).entries, spec.variance);
  }
  if (spec.name == "spin-chain") {
    SpinChainSpec chain;
    chain.n = spec.n;
    chain.d = spec.d;
    chain.ensemble = spec.ensemble;
    chain.beta = spec.ensemble == LocalEnsemble::goe ? 1 : 2;
    chain.seed = spec.seed;
    if (spec.ensemble == LocalEnsemble::fixed)
      throw std::invalid_argument("fixed local terms are not available from a model name");
    if (chain.effective_beta() == 1) return spin_chain_model<double>(chain);
    return spin_chain_model<cplx>(chain);
  }
  std::string known;
  for (const auto& n : model_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown model '" + spec.name + "' (expected one of " + known + ")");
}

}  // namespace freemix
