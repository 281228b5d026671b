#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "freemix/models.hpp"

using namespace freemix;

namespace {

/// Plain nested-loop Kronecker product, independent of Eigen's module.
template <typename Scalar>
Matrix<Scalar> kron(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  Matrix<Scalar> c(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l) c(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return c;
}

template <typename Scalar>
Matrix<Scalar> dense_chain(const std::vector<Matrix<Scalar>>& terms, int n, Index d) {
  Index dim = 1;
  for (int i = 0; i < n; ++i) dim *= d;
  Matrix<Scalar> h = Matrix<Scalar>::Zero(dim, dim);
  for (int k = 1; k < n; ++k) {
    Matrix<Scalar> left = Matrix<Scalar>::Identity(1, 1);
    for (int i = 1; i < k; ++i) left = kron<Scalar>(left, Matrix<Scalar>::Identity(d, d));
    Matrix<Scalar> op = kron<Scalar>(left, terms[static_cast<std::size_t>(k - 1)]);
    for (int i = k + 2; i <= n; ++i) op = kron<Scalar>(op, Matrix<Scalar>::Identity(d, d));
    h += op;
  }
  return h;
}

template <typename Scalar>
Eigen::VectorXd sorted_eigenvalues(const Matrix<Scalar>& a) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Eigen::VectorXd sorted(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  return v;
}

template <typename Scalar>
double max_spectrum_gap(int n, int d, LocalEnsemble ensemble) {
  SpinChainSpec spec;
  spec.n = n;
  spec.d = d;
  spec.ensemble = ensemble;
  spec.seed = 31;
  const auto split = spin_chain_spectra<Scalar>(spec);
  const Matrix<Scalar> q = split.qs.entries;
  Matrix<Scalar> similar = q.adjoint() * split.lambda_even.template cast<Scalar>().asDiagonal() * q;
  similar.diagonal() += split.lambda_odd.template cast<Scalar>();
  const auto terms = spin_chain_terms<Scalar>(spec);
  const Eigen::VectorXd a = sorted_eigenvalues<Scalar>(similar);
  const Eigen::VectorXd b = sorted_eigenvalues<Scalar>(dense_chain<Scalar>(terms, n, d));
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("diagonal gaussian generator") {
  Engine rng = make_engine({1, 0});
  CHECK_THROWS_AS(diag_gaussian(4, 0.0, rng), std::invalid_argument);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  int count = 0;
  while (count < n) {
    const auto d = diag_gaussian(50, 2.5, rng).entries;
    CHECK(d.isDiagonal());
    for (Index i = 0; i < 50; ++i) {
      sum += d(i, i);
      sq += d(i, i) * d(i, i);
    }
    count += 50;
  }
  const double mean = sum / count, var = sq / count - mean * mean;
  CHECK(std::abs(mean) <= 3.0 * std::sqrt(2.5 / count));
  // The variance of a sample variance of normals is 2 sigma^4 / n.
  CHECK(std::abs(var - 2.5) <= 3.0 * std::sqrt(2.0 * 2.5 * 2.5 / count));
}

TEST_CASE("block goe generator") {
  Engine rng = make_engine({2, 0});
  const auto full = block_goe<double>(6, 6, rng).entries;
  CHECK(full.cwiseAbs().minCoeff() > 0.0);
  const auto b = block_goe<double>(12, 4, rng).entries;
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j)
      if (i / 4 != j / 4) CHECK(b(i, j) == 0.0);
  CHECK_THROWS_AS(block_goe<double>(10, 4, rng), std::invalid_argument);

  const Index m = 32, ell = 8;
  for (int beta : {1, 2}) {
    const int draws = 2000;
    std::vector<double> x(draws);
    for (int i = 0; i < draws; ++i) {
      const double frob = beta == 1 ? block_goe<double>(m, ell, rng).entries.squaredNorm()
                                    : block_goe<cplx>(m, ell, rng).entries.squaredNorm();
      x[static_cast<std::size_t>(i)] = frob / (m * m);
    }
    double mu = 0.0, ss = 0.0;
    for (double v : x) mu += v / draws;
    for (double v : x) ss += (v - mu) * (v - mu);
    const double se = std::sqrt(ss / (draws - 1) / draws);
    const double expected = (1.0 + (ell - 1) * beta / 2.0) / m;
    CHECK(std::abs(mu - expected) <= 3.0 * se);
  }
}

TEST_CASE("kms matrix") {
  const auto k = kms_matrix(64, 0.5).entries;
  CHECK((k.diagonal().array() == 1.0).all());
  CHECK(k(3, 7) == doctest::Approx(std::pow(0.5, 4)));
  CHECK(sorted_eigenvalues<double>(kms_matrix(2, 0.5).entries).isApprox(Eigen::Vector2d(0.5, 1.5)));
  CHECK(sorted_eigenvalues<double>(k).minCoeff() > 0.0);
  CHECK_THROWS_AS(kms_matrix(4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(kms_matrix(4, 0.0), std::invalid_argument);
}

TEST_CASE("anderson hopping matrix") {
  const Index m = 12;
  const auto a = anderson_hopping(m).entries;
  CHECK((a.rowwise().sum().array() == 2.0).all());
  Eigen::VectorXd expected(m);
  for (Index k = 0; k < m; ++k) expected(k) = 2.0 * std::cos(2.0 * std::numbers::pi * k / m);
  CHECK((sorted_eigenvalues<double>(a) - sorted(expected)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((sorted_eigenvalues<double>(anderson_hopping(4).entries) - Eigen::Vector4d(-2, 0, 0, 2)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(anderson_hopping(2), std::invalid_argument);
}

TEST_CASE("two-site chain has no even half") {
  SpinChainSpec spec;
  spec.n = 2;
  spec.d = 3;
  const auto h = spin_chain_build<cplx>(spec);
  CHECK(h.h_even.entries.cwiseAbs().maxCoeff() == 0.0);
  CHECK((h.h.entries - spin_chain_terms<cplx>(spec)[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hamiltonian is the sum of its halves") {
  for (auto ensemble : {LocalEnsemble::gue, LocalEnsemble::bernoulli, LocalEnsemble::projector}) {
    SpinChainSpec spec;
    spec.n = 4;
    spec.d = 2;
    spec.ensemble = ensemble;
    const auto h = spin_chain_build<cplx>(spec);
    CHECK((h.h.entries - (h.h_odd.entries + h.h_even.entries)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(hermitian_defect(h.h.entries) <= 1e-14);
  }
}

TEST_CASE("chain with fixed terms matches dense assembly") {
  Matrix<cplx> t1(4, 4), t2(4, 4);
  // Heisenberg exchange and a complex Hermitian bond.
  t1 << 1, 0, 0, 0, 0, -1, 2, 0, 0, 2, -1, 0, 0, 0, 0, 1;
  t2 << 0.5, 0, 0, cplx(0, 0.3), 0, -0.2, 0, 0, 0, 0, 0.1, 0, cplx(0, -0.3), 0, 0, 0.7;
  SpinChainSpec spec;
  spec.n = 3;
  spec.d = 2;
  spec.ensemble = LocalEnsemble::fixed;
  spec.fixed_terms = {t1, t2};
  const auto h = spin_chain_build<cplx>(spec);
  Matrix<cplx> expected = kron<cplx>(t1, Matrix<cplx>::Identity(2, 2)) + kron<cplx>(Matrix<cplx>::Identity(2, 2), t2);
  CHECK((h.h.entries - expected).cwiseAbs().maxCoeff() <= 1e-15);

  spec.fixed_terms = {t1};
  spec.beta = 1;
  const auto real = spin_chain_build<double>(spec);
  const Matrix<double> r1 = t1.real();
  CHECK((real.h.entries - (kron<double>(r1, Eigen::MatrixXd::Identity(2, 2)) +
                           kron<double>(Eigen::MatrixXd::Identity(2, 2), r1)))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  spec.fixed_terms = {t2};
  CHECK_THROWS_AS(spin_chain_build<double>(spec), std::invalid_argument);
  spec.fixed_terms = {t1, t1, t1};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("chain validation") {
  SpinChainSpec spec;
  spec.n = 1;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.n = 20;
  spec.d = 3;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.n = 3;
  CHECK(spec.dimension() == 27);
  spec.ensemble = LocalEnsemble::goe;
  CHECK(spec.effective_beta() == 1);
  CHECK_THROWS_AS(spin_chain_terms<cplx>(spec), std::invalid_argument);
  CHECK(parse_local_ensemble(to_string(LocalEnsemble::projector)) == LocalEnsemble::projector);
  CHECK_THROWS_AS(parse_local_ensemble("ising"), std::invalid_argument);
}

TEST_CASE("odd and even spectra from local pieces match dense solves") {
  for (auto [n, d] : {std::pair{2, 2}, std::pair{3, 2}, std::pair{4, 2}, std::pair{5, 2}, std::pair{6, 2},
                      std::pair{3, 3}, std::pair{3, 4}, std::pair{3, 5}}) {
    CAPTURE(n);
    CAPTURE(d);
    SpinChainSpec spec;
    spec.n = n;
    spec.d = d;
    spec.seed = 5;
    const auto split = spin_chain_spectra<cplx>(spec);
    const auto h = spin_chain_build<cplx>(spec);
    CHECK((sorted(split.lambda_odd) - sorted_eigenvalues<cplx>(h.h_odd.entries)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((sorted(split.lambda_even) - sorted_eigenvalues<cplx>(h.h_even.entries)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(orthonormality_defect(split.qs.entries) <= 1e-10);
  }
}

TEST_CASE("similarity transform reproduces the chain spectrum") {
  CHECK(max_spectrum_gap<cplx>(3, 5, LocalEnsemble::bernoulli) <= 1e-8);
  CHECK(max_spectrum_gap<cplx>(6, 2, LocalEnsemble::bernoulli) <= 1e-8);
  CHECK(max_spectrum_gap<cplx>(5, 2, LocalEnsemble::gue) <= 1e-8);
  CHECK(max_spectrum_gap<double>(4, 3, LocalEnsemble::goe) <= 1e-8);
}

TEST_CASE("named models") {
  CHECK(model_names().size() == 5);
  ModelSpec spec;
  spec.name = "nope";
  CHECK_THROWS_AS(make_model(spec), std::invalid_argument);

  spec.name = "block-goe";
  spec.m = 16;
  spec.ell = 4;
  const auto block = std::get<SummandPair<double>>(make_model(spec));
  CHECK(block.closed_form_p() == doctest::Approx(p_block_closed(16, 4, 1)));
  spec.beta = 2;
  CHECK(std::holds_alternative<SummandPair<cplx>>(make_model(spec)));
  spec.ell = 5;
  CHECK_THROWS_AS(make_model(spec), std::invalid_argument);

  spec = {};
  spec.name = "kms";
  spec.m = 10;
  const auto kms = std::get<SummandPair<double>>(make_model(spec));
  Engine rng = make_engine({3, 0});
  const auto p = kms.draw(rng);
  CHECK((p.m2 - kms_matrix(10, 0.5).entries).cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.m1.isDiagonal());
  REQUIRE(p.relative.has_value());
  CHECK(orthonormality_defect(*p.relative) <= 1e-12);
  spec.beta = 2;
  CHECK_THROWS_AS(make_model(spec), std::invalid_argument);

  spec = {};
  spec.name = "spin-chain";
  spec.ensemble = LocalEnsemble::fixed;
  CHECK_THROWS_AS(make_model(spec), std::invalid_argument);
  spec.ensemble = LocalEnsemble::goe;
  CHECK(std::holds_alternative<SummandPair<double>>(make_model(spec)));
  spec.ensemble = LocalEnsemble::bernoulli;
  const auto chain = std::get<SummandPair<cplx>>(make_model(spec));
  CHECK(chain.deterministic());
}

TEST_CASE("fixed partner models carry their eigenbasis") {
  for (const char* name : {"kms", "anderson"}) {
    ModelSpec spec;
    spec.name = name;
    spec.m = 12;
    const auto pair = std::get<SummandPair<double>>(make_model(spec));
    Engine rng = make_engine({9, 0});
    const auto p = pair.draw(rng);
    REQUIRE(p.relative.has_value());
    REQUIRE(p.s2.has_value());
    const Eigen::MatrixXd& q = *p.relative;
    Eigen::MatrixXd rebuilt = q.transpose() * p.s2->values().asDiagonal() * q;
    rebuilt.diagonal() += p.m1.diagonal();
    CHECK((rebuilt - (p.m1 + p.m2)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}
