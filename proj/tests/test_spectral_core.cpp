#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "freemix/density.hpp"
#include "freemix/io.hpp"
#include "freemix/spectrum.hpp"
#include "oracles.hpp"

using namespace freemix;

namespace {

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.5, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("spectrum keeps duplicates and sorts") {
  const Spectrum s = Spectrum::from_values({3.0, 1.0, 3.0, -2.0});
  REQUIRE(s.size() == 4);
  CHECK(s.dimension() == 4);
  CHECK(s.is_unweighted());
  CHECK(s.atoms()[0].value == -2.0);
  CHECK(s.atoms()[2].value == 3.0);
  CHECK(s.atoms()[3].value == 3.0);
  for (const Atom& a : s.atoms()) CHECK(a.weight == doctest::Approx(0.25));
  CHECK(s.merged().size() == 3);
}

TEST_CASE("weighted spectra validate their weights") {
  CHECK_THROWS_AS(Spectrum::from_atoms({{0.0, 0.5}, {1.0, 0.4}}), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum::from_atoms({{0.0, 1.2}, {1.0, -0.2}}), std::invalid_argument);
  const Spectrum s = Spectrum::from_atoms({{1.0, 0.75}, {0.0, 0.25}});
  CHECK_FALSE(s.is_unweighted());
  CHECK(s.min() == 0.0);
  CHECK(moment(s, 1) == doctest::Approx(0.75));
}

TEST_CASE("moment examples") {
  const Spectrum pm = Spectrum::from_values({1.0, -1.0});
  CHECK(moment(pm, 2) == doctest::Approx(1.0));
  CHECK(moment(pm, 1) == doctest::Approx(0.0));
  CHECK(moment(Spectrum::from_values({2.0}), 4) == doctest::Approx(16.0));
}

TEST_CASE("moments agree with direct power sums") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto v = random_values(rng, 1 + trial % 17);
    const Spectrum s = Spectrum::from_values(v);
    for (int k = 1; k <= 8; ++k) {
      const double ref = oracle::brute_moment(v, k);
      CHECK(std::abs(moment(s, k) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("kappa2 examples") {
  CHECK(kappa2(Spectrum::from_values({1.0, -1.0})) == doctest::Approx(2.0));
  CHECK(kappa2(Spectrum::from_values({4.0, 4.0, 4.0})) == 0.0);
  CHECK(kappa2(Spectrum::from_values({1.0, 2.0, 3.0})) == doctest::Approx(1.0));
  CHECK_THROWS(kappa2(Spectrum::from_values({1.0})));
  CHECK_THROWS(kappa2(Spectrum::from_atoms({{0.0, 0.25}, {1.0, 0.75}})));
}

TEST_CASE("kappa2 is m2 - m11 and vanishes only for constant spectra") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto v = random_values(rng, 2 + trial % 9);
    const double m = static_cast<double>(v.size());
    double m11 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j)
        if (i != j) m11 += v[i] * v[j];
    m11 /= m * (m - 1.0);
    const double k = kappa2(Spectrum::from_values(v));
    CHECK(k > 0.0);
    CHECK(k == doctest::Approx(oracle::brute_moment(v, 2) - m11).epsilon(1e-10));
  }
}

TEST_CASE("histogram puts a single atom in its bin") {
  const GridSpec g{-1.0, 1.0, 21};
  const auto c = density_from_spectrum(Spectrum::from_values({0.0}), g, {SmoothingKind::histogram, {}});
  CHECK(c.values()(10) == doctest::Approx(1.0 / g.step()));
  CHECK(c.values().sum() == doctest::Approx(c.values()(10)));
  CHECK(integral(c) == doctest::Approx(1.0));
}

TEST_CASE("gaussian smoothing of +-1 is symmetric with the closed-form centre value") {
  const GridSpec g{-4.0, 4.0, 401};
  const double h = 0.3;
  const Spectrum pm = Spectrum::from_values({1.0, -1.0});
  const DensityCurve raw(g, [&] {
    Eigen::VectorXd v(401);
    for (Index i = 0; i < 401; ++i) {
      const double x = g.at(static_cast<std::size_t>(i));
      v(i) = 0.5 * (std::exp(-0.5 * std::pow((x - 1) / h, 2)) + std::exp(-0.5 * std::pow((x + 1) / h, 2))) /
             (std::sqrt(2 * std::numbers::pi) * h);
    }
    return v;
  }());
  const auto c = density_from_spectrum(pm, g, {SmoothingKind::gaussian, h});
  for (Index i = 0; i < 401; ++i) CHECK(std::abs(c.values()(i) - c.values()(400 - i)) <= 1e-12);
  // The kernel sum is normalized on the grid; the grid captures essentially all of the mass.
  const double expected = 2.0 * 0.5 * std::exp(-1.0 / (2 * h * h)) / (std::sqrt(2 * std::numbers::pi) * h);
  CHECK(c.values()(200) == doctest::Approx(expected / integral(raw)).epsilon(1e-12));
  CHECK(integral(raw) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("density requires the grid to cover every atom") {
  CHECK_THROWS_AS(density_from_spectrum(Spectrum::from_values({0.0, 3.0}), GridSpec{-1.0, 1.0, 11}),
                  std::invalid_argument);
}

TEST_CASE("kernel density moments approach atom moments as the bandwidth shrinks") {
  const Spectrum s = Spectrum::from_values({-1.0, 0.2, 0.5, 1.7});
  const GridSpec g{-4.0, 5.0, 4001};
  for (int k = 1; k <= 2; ++k) {
    const double exact = moment(s, k);
    const double wide = std::abs(curve_moment(density_from_spectrum(s, g, {SmoothingKind::gaussian, 0.4}), k) - exact);
    const double narrow = std::abs(curve_moment(density_from_spectrum(s, g, {SmoothingKind::gaussian, 0.1}), k) - exact);
    CHECK(narrow < wide);
  }
}

TEST_CASE("mixing integrates to one and clamps out-of-range weights") {
  const GridSpec g{-3.0, 3.0, 301};
  const auto a = density_from_spectrum(Spectrum::from_values({-1.0, 0.0}), g);
  const auto b = density_from_spectrum(Spectrum::from_values({1.0, 2.0}), g);
  for (double p : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    const MixedDensity m = mix_densities(p, a, b);
    CHECK(std::abs(integral(m.curve) - 1.0) <= 1e-6);
    CHECK_FALSE(m.warning.has_value());
  }
  const MixedDensity over = mix_densities(2.0, a, b);
  CHECK(over.weight == 1.0);
  REQUIRE(over.warning.has_value());
  CHECK((over.curve.values() - a.values()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(mix_densities(-0.5, a, b).weight == 0.0);
  CHECK_THROWS_AS(mix_densities(0.5, a, density_from_spectrum(Spectrum::from_values({0.0}), GridSpec{-3, 3, 300})),
                  std::invalid_argument);
}

TEST_CASE("distances") {
  const GridSpec g{0.0, 4.0, 401};
  Eigen::VectorXd box1 = Eigen::VectorXd::Zero(401), box2 = Eigen::VectorXd::Zero(401);
  for (Index i = 0; i < 401; ++i) {
    const double x = g.at(static_cast<std::size_t>(i));
    if (x > 0.5 && x < 1.5) box1(i) = 1.0;
    if (x > 2.5 && x < 3.5) box2(i) = 1.0;
  }
  const auto a = DensityCurve::normalized(g, box1);
  const auto b = DensityCurve::normalized(g, box2);
  CHECK(l1_distance(a, a) == 0.0);
  CHECK(ks_distance(a, a) == 0.0);
  CHECK(l1_distance(a, b) == doctest::Approx(2.0));
  CHECK(ks_distance(a, b) == doctest::Approx(1.0));

  const GridSpec fine{-1.0, 1.0, 201};
  const auto left = density_from_spectrum(Spectrum::from_values({-0.5}), fine, {SmoothingKind::histogram, {}});
  const auto right = density_from_spectrum(Spectrum::from_values({0.5}), fine, {SmoothingKind::histogram, {}});
  CHECK(ks_distance(left, right) == doctest::Approx(1.0));
  CHECK_THROWS_AS(l1_distance(a, left), std::invalid_argument);
}

TEST_CASE("ks distance between a curve and atoms") {
  const GridSpec g{-3.0, 3.0, 601};
  const Spectrum s = Spectrum::from_values({-1.0, 1.0});
  const auto c = density_from_spectrum(s, g, {SmoothingKind::gaussian, 0.01});
  CHECK(ks_distance(c, s) == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("default grid pads the pooled atoms by three standard deviations") {
  const Spectrum s = Spectrum::from_values({-1.0, 1.0});
  const GridSpec g = default_grid(s);
  CHECK(g.points == 512);
  CHECK(g.xmin == doctest::Approx(-4.0));
  CHECK(g.xmax == doctest::Approx(4.0));
}

TEST_CASE("accumulated density matches the direct kernel estimate") {
  std::mt19937_64 rng(3);
  const auto v = random_values(rng, 400);
  const Spectrum s = Spectrum::from_values(v);
  const GridSpec g = default_grid(s, 800);
  DensityAccumulator acc(g);
  acc.add(s);
  const auto streamed = acc.finish();
  const auto direct = density_from_spectrum(s, g);
  CHECK(l1_distance(streamed, direct) < 1e-2);
  CHECK(std::abs(integral(streamed) - 1.0) <= 1e-12);
}

TEST_CASE("spectrum text format round trip") {
  std::istringstream plain("# comment\n1.5\n\n-2\n0.25\n");
  const Spectrum a = read_spectrum(plain);
  CHECK(a.size() == 3);
  CHECK(a.is_unweighted());
  std::istringstream weighted("0,0.25\n1,0.75\n");
  const Spectrum b = read_spectrum(weighted);
  CHECK(b.atoms()[1].weight == doctest::Approx(0.75));
  std::stringstream out;
  write_spectrum(out, b);
  const Spectrum c = read_spectrum(out);
  CHECK(c.atoms()[0].weight == b.atoms()[0].weight);
  std::istringstream mixed("1\n2,0.5\n");
  CHECK_THROWS_AS(read_spectrum(mixed), std::invalid_argument);
  std::istringstream junk("1\nabc\n");
  CHECK_THROWS_AS(read_spectrum(junk), std::invalid_argument);
}

TEST_CASE("density CSV round trip is exact") {
  const GridSpec g{-2.0, 3.0, 97};
  const auto c = density_from_spectrum(Spectrum::from_values({0.1, 0.7, 1.3}), g);
  std::stringstream buf;
  write_density_csv(buf, c);
  CHECK(buf.str().rfind("x,density\n", 0) == 0);
  const DensityCurve back = read_density_csv(buf);
  CHECK(back.grid().same_as(g));
  CHECK(back.values() == c.values());
  CHECK(std::abs(integral(back) - 1.0) <= 1e-6);
}

TEST_CASE("complex matrices serialize as re+imj") {
  Matrix<cplx> a(1, 2);
  a << cplx(1.0, -2.0), cplx(0.5, 0.0);
  std::ostringstream out;
  write_matrix_csv(out, a);
  CHECK(out.str() == "1-2j,0.5+0j\n");
}
