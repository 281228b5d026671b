#include "freemix/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace freemix {

double GridSpec::at(std::size_t i) const {
  if (i + 1 == points) return xmax;
  return xmin + static_cast<double>(i) * step();
}

Eigen::VectorXd GridSpec::abscissae() const {
  Eigen::VectorXd x(static_cast<Index>(points));
  for (std::size_t i = 0; i < points; ++i) x(static_cast<Index>(i)) = at(i);
  return x;
}

void GridSpec::validate() const {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (!std::isfinite(xmin) || !std::isfinite(xmax) || !(xmax > xmin))
    throw std::invalid_argument("grid needs finite xmin < xmax");
}

bool GridSpec::same_as(const GridSpec& other) const {
  const double scale = std::max({1.0, std::abs(xmin), std::abs(xmax)});
  return points == other.points && std::abs(xmin - other.xmin) <= 1e-12 * scale &&
         std::abs(xmax - other.xmax) <= 1e-12 * scale;
}

GridSpec default_grid(std::span<const Spectrum> spectra, std::size_t points) {
  if (spectra.empty()) throw std::invalid_argument("default_grid needs a spectrum");
  double lo = spectra.front().min();
  double hi = spectra.front().max();
  for (const Spectrum& s : spectra) {
    lo = std::min(lo, s.min());
    hi = std::max(hi, s.max());
  }
  const Spectrum pooled = pool(spectra);
  double sigma = std::sqrt(population_variance(pooled));
  if (!(sigma > 0.0)) sigma = std::max(1.0, std::abs(lo)) * 0.1;
  GridSpec g{lo - 3.0 * sigma, hi + 3.0 * sigma, points};
  g.validate();
  return g;
}

GridSpec default_grid(const Spectrum& s, std::size_t points) {
  return default_grid(std::span<const Spectrum>(&s, 1), points);
}

double silverman_bandwidth(const Spectrum& s) {
  double sum_w2 = 0.0;
  for (const Atom& a : s.atoms()) sum_w2 += a.weight * a.weight;
  const double n = 1.0 / sum_w2;
  double sigma = std::sqrt(population_variance(s));
  if (!(sigma > 0.0)) sigma = std::max(1.0, std::abs(s.min())) * 1e-2;
  return 1.06 * sigma * std::pow(n, -0.2);
}

DensityCurve::DensityCurve(GridSpec grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  if (values_.size() != static_cast<Index>(grid_.points))
    throw std::invalid_argument("density values do not match grid size");
  for (Index i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_(i)) || values_(i) < 0.0)
      throw std::invalid_argument("density values must be finite and nonnegative");
}

DensityCurve DensityCurve::normalized(GridSpec grid, Eigen::VectorXd values) {
  DensityCurve c(grid, std::move(values));
  const double total = integral(c);
  if (!(total > 0.0)) throw NumericalDegeneracy("density has zero mass on the grid");
  c.values_ /= total;
  return c;
}

double trapezoid(const GridSpec& grid, const Eigen::VectorXd& values) {
  const Index n = values.size();
  return grid.step() * (values.sum() - 0.5 * (values(0) + values(n - 1)));
}

double integral(const DensityCurve& c) { return trapezoid(c.grid(), c.values()); }

double curve_moment(const DensityCurve& c, int k) {
  const Eigen::VectorXd x = c.abscissae();
  Eigen::VectorXd f = c.values();
  for (Index i = 0; i < f.size(); ++i) f(i) *= std::pow(x(i), k);
  return trapezoid(c.grid(), f) / integral(c);
}

Eigen::VectorXd cdf(const DensityCurve& c) {
  const Eigen::VectorXd& f = c.values();
  const double h = c.grid().step();
  Eigen::VectorXd F(f.size());
  F(0) = 0.0;
  for (Index i = 1; i < f.size(); ++i) F(i) = F(i - 1) + 0.5 * h * (f(i - 1) + f(i));
  const double total = F(f.size() - 1);
  if (!(total > 0.0)) throw NumericalDegeneracy("density has zero mass on the grid");
  return F / total;
}

DensityCurve density_from_spectrum(const Spectrum& s, const GridSpec& grid,
                                   const SmoothingSpec& smoothing) {
  grid.validate();
  if (s.min() < grid.xmin || s.max() > grid.xmax)
    throw std::invalid_argument("grid does not cover every atom");

  const auto n = static_cast<Index>(grid.points);
  const double h = grid.step();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);

  if (smoothing.kind == SmoothingKind::histogram) {
    for (const Atom& a : s.atoms()) {
      auto i = static_cast<Index>(std::llround((a.value - grid.xmin) / h));
      i = std::clamp<Index>(i, 0, n - 1);
      f(i) += a.weight / h;
    }
    return DensityCurve::normalized(grid, std::move(f));
  }

  const double bw = smoothing.bandwidth.value_or(silverman_bandwidth(s));
  if (!(bw > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * bw);
  const double reach = 12.0 * bw;
  for (const Atom& a : s.atoms()) {
    const auto lo = std::max<Index>(0, static_cast<Index>(std::floor((a.value - reach - grid.xmin) / h)));
    const auto hi = std::min<Index>(n - 1, static_cast<Index>(std::ceil((a.value + reach - grid.xmin) / h)));
    for (Index i = lo; i <= hi; ++i) {
      const double u = (grid.at(static_cast<std::size_t>(i)) - a.value) / bw;
      f(i) += a.weight * norm * std::exp(-0.5 * u * u);
    }
  }
  return DensityCurve::normalized(grid, std::move(f));
}

MixedDensity mix_densities(double p, const DensityCurve& free, const DensityCurve& classical) {
  if (!std::isfinite(p)) throw std::invalid_argument("mixing weight must be finite");
  if (!free.grid().same_as(classical.grid())) throw std::invalid_argument("grid mismatch");
  MixedDensity out;
  out.weight = std::clamp(p, 0.0, 1.0);
  if (out.weight != p)
    out.warning = "mixing weight " + std::to_string(p) + " clamped to " + std::to_string(out.weight);
  Eigen::VectorXd f = out.weight * free.values() + (1.0 - out.weight) * classical.values();
  out.curve = DensityCurve::normalized(free.grid(), std::move(f));
  return out;
}

double l1_distance(const DensityCurve& a, const DensityCurve& b) {
  if (!a.grid().same_as(b.grid())) throw std::invalid_argument("grid mismatch");
  return trapezoid(a.grid(), (a.values() - b.values()).cwiseAbs());
}

double ks_distance(const DensityCurve& a, const DensityCurve& b) {
  if (!a.grid().same_as(b.grid())) throw std::invalid_argument("grid mismatch");
  return (cdf(a) - cdf(b)).cwiseAbs().maxCoeff();
}

double ks_distance(const DensityCurve& a, const Spectrum& s) {
  const Eigen::VectorXd F = cdf(a);
  const GridSpec& g = a.grid();
  const double h = g.step();
  auto curve_cdf = [&](double x) {
    if (x <= g.xmin) return 0.0;
    if (x >= g.xmax) return 1.0;
    const double t = (x - g.xmin) / h;
    const auto i = std::min<Index>(static_cast<Index>(t), F.size() - 2);
    const double frac = t - static_cast<double>(i);
    return F(i) + frac * (F(i + 1) - F(i));
  };
  double best = 0.0;
  double below = 0.0;
  const auto& atoms = s.atoms();
  for (std::size_t i = 0; i < atoms.size();) {
    const double x = atoms[i].value;
    double mass = 0.0;
    while (i < atoms.size() && atoms[i].value == x) mass += atoms[i++].weight;
    const double fc = curve_cdf(x);
    best = std::max({best, std::abs(fc - below), std::abs(fc - (below + mass))});
    below += mass;
  }
  return best;
}

DensityAccumulator::DensityAccumulator(GridSpec grid) : grid_(grid) {
  grid_.validate();
  mass_ = Eigen::VectorXd::Zero(static_cast<Index>(grid_.points));
}

void DensityAccumulator::add(double x, double weight) {
  if (x < grid_.xmin || x > grid_.xmax) throw std::invalid_argument("grid does not cover every atom");
  const double t = (x - grid_.xmin) / grid_.step();
  const auto i = std::min<Index>(static_cast<Index>(t), mass_.size() - 2);
  const double frac = t - static_cast<double>(i);
  mass_(i) += weight * (1.0 - frac);
  mass_(i + 1) += weight * frac;
  sum_w_ += weight;
  sum_wx_ += weight * x;
  sum_wxx_ += weight * x * x;
  sum_ww_ += weight * weight;
}

void DensityAccumulator::add(const Spectrum& s, double scale) {
  for (const Atom& a : s.atoms()) add(a.value, a.weight * scale);
}

DensityCurve DensityAccumulator::finish(const SmoothingSpec& smoothing) const {
  if (!(sum_w_ > 0.0)) throw NumericalDegeneracy("no mass accumulated");
  const double h = grid_.step();
  const Index n = mass_.size();
  if (smoothing.kind == SmoothingKind::histogram) return DensityCurve::normalized(grid_, mass_ / h);

  double bw = 0.0;
  if (smoothing.bandwidth) {
    bw = *smoothing.bandwidth;
  } else {
    const double mu = sum_wx_ / sum_w_;
    double sigma = std::sqrt(std::max(0.0, sum_wxx_ / sum_w_ - mu * mu));
    if (!(sigma > 0.0)) sigma = std::max(1.0, std::abs(mu)) * 1e-2;
    const double n_eff = sum_w_ * sum_w_ / sum_ww_;
    bw = 1.06 * sigma * std::pow(n_eff, -0.2);
  }
  if (!(bw > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");

  const auto reach = static_cast<Index>(std::ceil(12.0 * bw / h));
  Eigen::VectorXd kernel(reach + 1);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * bw);
  for (Index k = 0; k <= reach; ++k) {
    const double u = static_cast<double>(k) * h / bw;
    kernel(k) = norm * std::exp(-0.5 * u * u);
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  for (Index j = 0; j < n; ++j) {
    if (mass_(j) == 0.0) continue;
    const Index lo = std::max<Index>(0, j - reach);
    const Index hi = std::min<Index>(n - 1, j + reach);
    for (Index i = lo; i <= hi; ++i) f(i) += mass_(j) * kernel(std::abs(i - j));
  }
  return DensityCurve::normalized(grid_, std::move(f));
}

}  // namespace freemix
