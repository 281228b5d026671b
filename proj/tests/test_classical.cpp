#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "freemix/classical.hpp"
#include "freemix/ensembles.hpp"
#include "oracles.hpp"

using namespace freemix;

TEST_CASE("classical sum of two fair coins") {
  const Spectrum c = classical_sum(Spectrum::from_values({0.0, 1.0}), Spectrum::from_values({0.0, 1.0}), true);
  REQUIRE(c.size() == 3);
  CHECK(c.atoms()[0].value == 0.0);
  CHECK(c.atoms()[0].weight == doctest::Approx(0.25));
  CHECK(c.atoms()[1].value == 1.0);
  CHECK(c.atoms()[1].weight == doctest::Approx(0.5));
  CHECK(c.atoms()[2].weight == doctest::Approx(0.25));
  const Spectrum raw = classical_sum(Spectrum::from_values({0.0, 1.0}), Spectrum::from_values({0.0, 1.0}));
  CHECK(raw.size() == 4);
  CHECK(raw.dimension() == 4);
}

TEST_CASE("classical fourth moment of two symmetric signs") {
  const Spectrum pm = Spectrum::from_values({-1.0, 1.0});
  CHECK(classical_moment(pm, pm, 4) == doctest::Approx(8.0));
  CHECK(moment(classical_sum(pm, pm), 4) == doctest::Approx(8.0));
}

TEST_CASE("classical moments match the pairwise oracle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> a(1 + trial % 6), b(2 + trial % 5);
    for (double& x : a) x = u(rng);
    for (double& x : b) x = u(rng);
    const Spectrum sa = Spectrum::from_values(a), sb = Spectrum::from_values(b);
    const Spectrum sum = classical_sum(sa, sb);
    for (int n = 1; n <= 8; ++n) {
      const double ref = oracle::pairwise_moment(a, b, n);
      std::vector<double> aa(a), ab(b);
      for (double& x : aa) x = std::abs(x);
      for (double& x : ab) x = std::abs(x);
      const double tol = 1e-12 * std::max(1.0, oracle::pairwise_moment(aa, ab, n));
      CHECK(std::abs(classical_moment(sa, sb, n) - ref) <= tol);
      CHECK(std::abs(moment(sum, n) - ref) <= tol);
    }
  }
}

TEST_CASE("one sampled permutation pairs every atom once") {
  const Spectrum a = Spectrum::from_values({1.0, 2.0, 3.0, 4.0});
  const Spectrum b = Spectrum::from_values({10.0, 20.0, 30.0, 40.0});
  Engine rng = make_engine({4, 0});
  for (int i = 0; i < 20; ++i) {
    const Spectrum s = classical_sample_sum(a, b, rng);
    CHECK(s.size() == 4);
    CHECK(moment(s, 1) == doctest::Approx(27.5));
  }
  CHECK_THROWS_AS(classical_sample_sum(a, Spectrum::from_values({1.0}), rng), std::invalid_argument);
}

TEST_CASE("permutation average reproduces the classical moments exactly") {
  // Averaging Tr(L1 + P^T L2 P)^n over all m! permutations is the classical
  // moment for every n, not only up to the third.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int m = 2; m <= 5; ++m) {
    std::vector<double> a(static_cast<std::size_t>(m)), b(static_cast<std::size_t>(m));
    for (double& x : a) x = u(rng);
    for (double& x : b) x = u(rng);
    std::vector<Index> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::array<double, 7> acc{};
    int count = 0;
    do {
      ++count;
      for (int n = 1; n <= 6; ++n) {
        double t = 0.0;
        for (int i = 0; i < m; ++i)
          t += std::pow(a[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])], n);
        acc[static_cast<std::size_t>(n)] += t / m;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    const Spectrum sa = Spectrum::from_values(a), sb = Spectrum::from_values(b);
    for (int n = 1; n <= 6; ++n)
      CHECK(acc[static_cast<std::size_t>(n)] / count == doctest::Approx(classical_moment(sa, sb, n)).epsilon(1e-12));
  }
}

TEST_CASE("necklace counts match enumeration") {
  for (int n = 1; n <= 12; ++n)
    for (std::uint64_t k = 1; k <= 3; ++k)
      CHECK(necklace_count(n, k) == oracle::necklaces_by_enumeration(n, static_cast<int>(k)));
  CHECK(necklace_count(4, 2) == 6);
  CHECK(necklace_count(6, 2) == 14);
  CHECK_THROWS_AS(necklace_count(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(necklace_count(64, 1u << 20), std::overflow_error);
}

TEST_CASE("monomial classification") {
  const auto two = classify_monomials(2);
  CHECK(two.classical_monomials == 4);
  CHECK(two.crossing_monomials == 0);
  const auto three = classify_monomials(3);
  CHECK(three.crossing_monomials == 0);
  const auto four = classify_monomials(4);
  CHECK(four.classical_monomials == 14);
  CHECK(four.crossing_monomials == 2);
  for (int n = 1; n <= 14; ++n) {
    const auto c = classify_monomials(n);
    CHECK(c.classical_monomials + c.crossing_monomials == (std::uint64_t{1} << n));
    CHECK(c.classes == necklace_count(n, 2));
    if (n >= 2) CHECK(c.classical_monomials == static_cast<std::uint64_t>(n * (n - 1) + 2));
  }
  CHECK_THROWS_AS(classify_monomials(21), std::invalid_argument);
}

TEST_CASE("quoted classical count differs from enumeration past n = 3") {
  CHECK(classical_term_count_quoted(2) == 2);
  CHECK(classical_term_count_quoted(4) == 10);
  CHECK(classical_term_count_quoted(4) != classify_monomials(4).classical_monomials);
}
