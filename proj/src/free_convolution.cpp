#include "freemix/free_convolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace freemix {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr long double kEpsLong = std::numeric_limits<long double>::epsilon();

struct Grouped {
  std::vector<double> value;
  std::vector<double> weight;
};

/// Distinct atom values with summed weights; zero-weight atoms dropped.
Grouped group_atoms(const Spectrum& s) {
  Grouped g;
  for (const Atom& a : s.atoms()) {
    if (a.weight == 0.0) continue;
    if (!g.value.empty() && g.value.back() == a.value) {
      g.weight.back() += a.weight;
    } else {
      g.value.push_back(a.value);
      g.weight.push_back(a.weight);
    }
  }
  return g;
}

/// The pole equation sum_i c_i / (w - v_i) = alpha with c_i = w_i v_i.
struct PoleEquation {
  std::vector<double> v;
  std::vector<double> c;
  double alpha = 0.0;

  PoleEquation(const Spectrum& s, double z, int folds) {
    if (folds < 2) throw std::invalid_argument("pole equation needs N >= 2");
    const Grouped g = group_atoms(s);
    const double n = folds;
    alpha = -(n - 1.0) / n;
    v.reserve(g.value.size());
    c.reserve(g.value.size());
    for (std::size_t i = 0; i < g.value.size(); ++i) {
      const double denom = n * g.value[i] - z;
      const double scale = std::max({1.0, std::abs(z), std::abs(n * g.value[i])});
      if (std::abs(denom) <= 4.0 * kEps * scale)
        throw PoleCollision("z coincides with a pole N*lambda_i");
      v.push_back((n - 1.0) / denom);
      c.push_back(g.weight[i] * v.back());
    }
  }

  std::size_t size() const { return v.size(); }

  Root value(Root w) const {
    Root acc = 0.0L;
    for (std::size_t i = 0; i < v.size(); ++i) acc += static_cast<long double>(c[i]) / (w - static_cast<long double>(v[i]));
    return acc - static_cast<long double>(alpha);
  }

  Root derivative(Root w) const {
    Root acc = 0.0L;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Root d = w - static_cast<long double>(v[i]);
      acc -= static_cast<long double>(c[i]) / (d * d);
    }
    return acc;
  }

  double residual(Root w) const {
    return static_cast<double>(std::abs(value(w)) / std::abs(static_cast<long double>(alpha)));
  }

  /// Eigenvalues of diag(v) + (1/alpha) 1 c^T after the diagonal similarity
  /// S = diag(sqrt|c_i|), which turns the update into (1/alpha) a b^T with
  /// |a_i| = |b_i| = sqrt|c_i|.
  std::vector<cplx> companion_eigenvalues() const {
    const auto m = static_cast<Index>(v.size());
    Eigen::VectorXd a(m), b(m);
    for (Index i = 0; i < m; ++i) {
      const double r = std::sqrt(std::abs(c[static_cast<std::size_t>(i)]));
      a(i) = r;
      b(i) = c[static_cast<std::size_t>(i)] < 0 ? -r : r;
    }
    Eigen::MatrixXd mat = (a * b.transpose()) / alpha;
    for (Index i = 0; i < m; ++i) mat(i, i) += v[static_cast<std::size_t>(i)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(mat, false);
    if (es.info() != Eigen::Success) throw SolverFailure("nonsymmetric eigensolver did not converge");
    std::vector<cplx> out(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return out;
  }

  /// Newton on a real root, carried relative to the nearest pole so roots
  /// squeezed against a pole keep full relative accuracy.
  long double polish_real(long double w) const {
    std::size_t k = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (std::abs(w - v[i]) < std::abs(w - v[k])) k = i;
    long double tau = w - v[k];
    auto f = [&](long double t) {
      long double acc = -static_cast<long double>(alpha);
      for (std::size_t i = 0; i < v.size(); ++i)
        acc += static_cast<long double>(c[i]) / ((static_cast<long double>(v[k]) - v[i]) + t);
      return acc;
    };
    auto df = [&](long double t) {
      long double acc = 0.0L;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const long double d = (static_cast<long double>(v[k]) - v[i]) + t;
        acc -= static_cast<long double>(c[i]) / (d * d);
      }
      return acc;
    };
    long double best = std::abs(f(tau));
    for (int it = 0; it < 60; ++it) {
      const long double d = df(tau);
      if (d == 0.0L || !std::isfinite(d)) break;
      const long double next = tau - f(tau) / d;
      // Never hop across the pole the root is attached to.
      if (!std::isfinite(next) || (next != 0.0L && tau != 0.0L && std::signbit(next) != std::signbit(tau)))
        break;
      const long double fn = std::abs(f(next));
      if (!(fn < best)) break;
      const bool done = std::abs(next - tau) <= 2.0L * kEpsLong * std::abs(next);
      tau = next;
      best = fn;
      if (done) break;
    }
    return static_cast<long double>(v[k]) + tau;
  }

  Root polish_complex(Root w) const {
    long double best = std::abs(value(w));
    for (int it = 0; it < 60; ++it) {
      const Root d = derivative(w);
      if (d == Root(0.0L) || !std::isfinite(std::abs(d))) break;
      const Root next = w - value(w) / d;
      const long double fn = std::abs(value(next));
      if (!(fn < best)) break;
      const bool done = std::abs(next - w) <= 2.0L * kEpsLong * std::abs(next);
      w = next;
      best = fn;
      if (done) break;
    }
    return w;
  }
};

struct RootScan {
  std::vector<Root> roots;
  int n_complex = 0;
  double max_residual = 0.0;
};

RootScan scan_roots(const Spectrum& s, double z, int folds, double tol) {
  const PoleEquation eq(s, z, folds);
  RootScan scan;
  for (cplx guess : eq.companion_eigenvalues()) {
    Root w(guess.real(), guess.imag());
    if (is_complex_root(w, tol)) {
      w = eq.polish_complex(w);
      if (is_complex_root(w, tol)) {
        ++scan.n_complex;
      } else {
        w = eq.polish_real(w.real());
      }
    } else {
      w = eq.polish_real(w.real());
    }
    scan.max_residual = std::max(scan.max_residual, eq.residual(w));
    scan.roots.push_back(w);
  }
  return scan;
}

}  // namespace

cplx cauchy_transform(const Spectrum& s, cplx z) {
  cplx acc = 0.0;
  for (const Atom& a : s.atoms()) {
    const cplx d = z - a.value;
    if (std::abs(d) <= 4.0 * kEps * std::max(1.0, std::abs(a.value)))
      throw PoleCollision("Cauchy transform evaluated on an atom");
    acc += a.weight / d;
  }
  return acc;
}

std::vector<Root> nfold_roots(const Spectrum& s, double z, int folds) {
  if (folds < 2) throw std::invalid_argument("nfold_roots needs N >= 2");
  return scan_roots(s, z, folds, kComplexRootTolerance).roots;
}

double nfold_residual(const Spectrum& s, double z, int folds, Root w) {
  return PoleEquation(s, z, folds).residual(w);
}

cplx nfold_cauchy_transform(const Spectrum& s, double z, int folds) {
  if (folds == 1) return cauchy_transform(s, cplx(z, 0.0));
  const RootScan scan = scan_roots(s, z, folds, kComplexRootTolerance);
  if (scan.n_complex > 0) {
    const auto it = std::min_element(scan.roots.begin(), scan.roots.end(),
                                     [](const Root& a, const Root& b) { return a.imag() < b.imag(); });
    return {static_cast<double>(it->real()), static_cast<double>(it->imag())};
  }
  const double target = 1.0 / (z - folds * mean(s));
  const auto it = std::min_element(scan.roots.begin(), scan.roots.end(), [&](const Root& a, const Root& b) {
    return std::abs(a.real() - target) < std::abs(b.real() - target);
  });
  return {static_cast<double>(it->real()), 0.0};
}

double nfold_free_density_at(const Spectrum& s, double x, int folds, double root_tolerance) {
  if (folds < 2) throw std::invalid_argument("pointwise density needs N >= 2; N = 1 is the base itself");
  const RootScan scan = scan_roots(s, x, folds, root_tolerance);
  if (scan.n_complex > 2) throw SolverFailure("more than one complex-conjugate root pair");
  double best = 0.0;
  for (const Root& w : scan.roots)
    if (is_complex_root(w, root_tolerance)) best = std::max(best, static_cast<double>(w.imag()));
  return best / std::numbers::pi;
}

namespace {

Eigen::VectorXd poisson_smooth(const GridSpec& grid, const Eigen::VectorXd& f, double eta) {
  const Eigen::VectorXd x = grid.abscissae();
  const double h = grid.step();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f.size());
  for (Index i = 0; i < f.size(); ++i) {
    for (Index j = 0; j < f.size(); ++j) {
      const double d = x(i) - x(j);
      const double wj = (j == 0 || j == f.size() - 1) ? 0.5 * h : h;
      out(i) += wj * f(j) * (eta / std::numbers::pi) / (d * d + eta * eta);
    }
  }
  return out;
}

}  // namespace

FreeDensityResult nfold_free_density(const FreeSumQuery& q) {
  if (q.folds < 1) throw std::invalid_argument("free sum needs N >= 1");
  q.grid.validate();
  FreeDensityResult out;
  if (q.folds == 1) {
    out.curve = density_from_spectrum(q.base, q.grid, q.smoothing);
    out.pointwise = out.curve.values();
    out.raw_integral = integral(out.curve);
    return out;
  }

  const auto n = static_cast<Index>(q.grid.points);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  out.diagnostics.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    PointDiagnostics& d = out.diagnostics[static_cast<std::size_t>(i)];
    d.x = q.grid.at(static_cast<std::size_t>(i));
    try {
      const RootScan scan = scan_roots(q.base, d.x, q.folds, q.root_tolerance);
      d.n_complex = scan.n_complex;
      d.n_real = static_cast<int>(scan.roots.size()) - scan.n_complex;
      d.max_residual = scan.max_residual;
      if (scan.n_complex > 2) throw SolverFailure("more than one complex-conjugate root pair");
      double best = 0.0;
      for (const Root& w : scan.roots)
        if (is_complex_root(w, q.root_tolerance)) best = std::max(best, static_cast<double>(w.imag()));
      f(i) = best / std::numbers::pi;
    } catch (const PoleCollision& e) {
      d.skipped = true;
      d.error = e.what();
    } catch (const SolverFailure& e) {
      d.skipped = true;
      d.error = e.what();
    }
  }
  if (q.eta > 0.0) f = poisson_smooth(q.grid, f, q.eta);
  out.raw_integral = trapezoid(q.grid, f);
  out.pointwise = f;
  out.curve = DensityCurve::normalized(q.grid, std::move(f));
  return out;
}

cplx r_transform_probe(const Spectrum& s, cplx w) {
  if (w == cplx(0.0)) throw std::invalid_argument("R-transform probe needs w != 0");
  const Grouped g = group_atoms(s);
  const auto m = static_cast<Index>(g.value.size());
  Eigen::VectorXd r(m);
  for (Index i = 0; i < m; ++i) r(i) = std::sqrt(g.weight[static_cast<std::size_t>(i)]);
  Eigen::MatrixXcd mat = (r * r.transpose()).cast<cplx>() / w;
  for (Index i = 0; i < m; ++i) mat(i, i) += g.value[static_cast<std::size_t>(i)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(mat, false);
  if (es.info() != Eigen::Success) throw SolverFailure("complex eigensolver did not converge");

  const cplx target = 1.0 / w + mean(s);
  cplx best = es.eigenvalues()(0);
  for (Index i = 1; i < m; ++i)
    if (std::abs(es.eigenvalues()(i) - target) < std::abs(best - target)) best = es.eigenvalues()(i);
  if (!(std::abs(best - target) < 0.5 / std::abs(w)))
    throw NumericalDegeneracy("no inverse-Cauchy root on the z ~ 1/w branch");
  return best - 1.0 / w;
}

template <typename Scalar>
Spectrum free_sum_mc(const Spectrum& s1, const Spectrum& s2, int samples, RngSeed seed) {
  if (s1.size() != s2.size()) throw std::invalid_argument("free_sum_mc: size mismatch");
  if (!s1.is_unweighted() || !s2.is_unweighted())
    throw std::invalid_argument("free_sum_mc needs unweighted spectra");
  if (samples < 1) throw std::invalid_argument("free_sum_mc needs samples >= 1");
  const auto m = static_cast<Index>(s1.size());
  std::vector<Spectrum> parts;
  parts.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    Engine rng = make_engine(seed.child(static_cast<std::uint64_t>(i)));
    const auto q = sample_haar<Scalar>(m, rng);
    parts.push_back(conjugated_sum<Scalar>(s1, s2, q.entries));
  }
  return pool(parts);
}

template Spectrum free_sum_mc<double>(const Spectrum&, const Spectrum&, int, RngSeed);
template Spectrum free_sum_mc<cplx>(const Spectrum&, const Spectrum&, int, RngSeed);

Spectrum free_sum_mc(const Spectrum& s1, const Spectrum& s2, int beta, int samples, RngSeed seed) {
  return dispatch_beta(beta, [&](auto tag) {
    return free_sum_mc<decltype(tag)>(s1, s2, samples, seed);
  });
}

}  // namespace freemix
