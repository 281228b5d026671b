#include "freemix/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace freemix {

namespace {

bool by_value(const Atom& a, const Atom& b) { return a.value < b.value; }

}  // namespace

Spectrum Spectrum::from_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("spectrum needs at least one atom");
  std::sort(values.begin(), values.end());
  Spectrum s;
  const double w = 1.0 / static_cast<double>(values.size());
  s.atoms_.reserve(values.size());
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite eigenvalue");
    s.atoms_.push_back({v, w});
  }
  s.dimension_ = values.size();
  s.unweighted_ = true;
  return s;
}

Spectrum Spectrum::from_atoms(std::vector<Atom> atoms, std::size_t dimension) {
  if (atoms.empty()) throw std::invalid_argument("spectrum needs at least one atom");
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.value) || !std::isfinite(a.weight))
      throw std::invalid_argument("non-finite atom");
    if (a.weight < 0.0) throw std::invalid_argument("negative atom weight");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("atom weights must sum to 1");
  std::stable_sort(atoms.begin(), atoms.end(), by_value);

  Spectrum s;
  s.atoms_ = std::move(atoms);
  s.dimension_ = dimension == 0 ? s.atoms_.size() : dimension;
  const double w = 1.0 / static_cast<double>(s.atoms_.size());
  s.unweighted_ = std::all_of(s.atoms_.begin(), s.atoms_.end(), [w](const Atom& a) {
    return std::abs(a.weight - w) <= 1e-15 * (1.0 + w) + 4e-16;
  });
  return s;
}

Eigen::VectorXd Spectrum::values() const {
  Eigen::VectorXd v(static_cast<Index>(atoms_.size()));
  for (std::size_t i = 0; i < atoms_.size(); ++i) v(static_cast<Index>(i)) = atoms_[i].value;
  return v;
}

Eigen::VectorXd Spectrum::weights() const {
  Eigen::VectorXd v(static_cast<Index>(atoms_.size()));
  for (std::size_t i = 0; i < atoms_.size(); ++i) v(static_cast<Index>(i)) = atoms_[i].weight;
  return v;
}

Spectrum Spectrum::shifted(double c) const {
  Spectrum s = *this;
  for (Atom& a : s.atoms_) a.value += c;
  return s;
}

Spectrum Spectrum::scaled(double c) const {
  Spectrum s = *this;
  for (Atom& a : s.atoms_) a.value *= c;
  if (c < 0) std::reverse(s.atoms_.begin(), s.atoms_.end());
  return s;
}

Spectrum Spectrum::merged(double tol) const {
  std::vector<Atom> out;
  out.reserve(atoms_.size());
  for (const Atom& a : atoms_) {
    if (!out.empty() && std::abs(a.value - out.back().value) <= tol * (1.0 + std::abs(a.value))) {
      out.back().weight += a.weight;
    } else {
      out.push_back(a);
    }
  }
  Spectrum s;
  s.atoms_ = std::move(out);
  s.dimension_ = dimension_;
  s.unweighted_ = s.atoms_.size() == atoms_.size() && unweighted_;
  return s;
}

Spectrum pool(std::span<const Spectrum> parts) {
  if (parts.empty()) throw std::invalid_argument("pool of zero spectra");
  std::vector<Atom> atoms;
  std::size_t total = 0;
  for (const Spectrum& p : parts) total += p.size();
  atoms.reserve(total);
  const double share = 1.0 / static_cast<double>(parts.size());
  for (const Spectrum& p : parts)
    for (const Atom& a : p.atoms()) atoms.push_back({a.value, a.weight * share});

  // Renormalize away the rounding accumulated across many tiny weights.
  const double sum = std::accumulate(atoms.begin(), atoms.end(), 0.0,
                                     [](double acc, const Atom& a) { return acc + a.weight; });
  for (Atom& a : atoms) a.weight /= sum;
  return Spectrum::from_atoms(std::move(atoms), parts.front().dimension());
}

double moment(const Spectrum& s, int k) {
  if (k < 0) throw std::invalid_argument("moment order must be nonnegative");
  double acc = 0.0;
  for (const Atom& a : s.atoms()) {
    double p = 1.0;
    for (int j = 0; j < k; ++j) p *= a.value;
    acc += a.weight * p;
  }
  return acc;
}

double mean(const Spectrum& s) { return moment(s, 1); }

double population_variance(const Spectrum& s) {
  const double mu = mean(s);
  double acc = 0.0;
  for (const Atom& a : s.atoms()) acc += a.weight * (a.value - mu) * (a.value - mu);
  return acc;
}

double kappa2(const Spectrum& s) {
  if (s.size() < 2) throw std::invalid_argument("kappa2 needs m >= 2");
  if (!s.is_unweighted()) throw std::invalid_argument("kappa2 needs an unweighted spectrum");
  const double m = static_cast<double>(s.size());
  const double mu = mean(s);
  double ss = 0.0;
  for (const Atom& a : s.atoms()) ss += (a.value - mu) * (a.value - mu);
  return ss / (m - 1.0);
}

}  // namespace freemix
