#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "freemix/common.hpp"

namespace freemix {

struct Atom {
  double value;
  double weight;
};

/// Finite weighted set of eigenvalue atoms, sorted ascending.
///
/// Duplicates are never merged: the matrix dimension m enters the moment
/// formulas explicitly, so an m x m matrix always yields m atoms. Weights
/// sum to one within 1e-12.
class Spectrum {
 public:
  Spectrum() = default;

  /// Unweighted spectrum: every value gets weight 1/m.
  static Spectrum from_values(std::vector<double> values);

  template <typename Derived>
  static Spectrum from_vector(const Eigen::MatrixBase<Derived>& v) {
    std::vector<double> values(static_cast<std::size_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i) values[static_cast<std::size_t>(i)] = v(i);
    return from_values(std::move(values));
  }

  /// Weighted spectrum. Throws if weights are negative or do not sum to one.
  /// `dimension` defaults to the atom count.
  static Spectrum from_atoms(std::vector<Atom> atoms, std::size_t dimension = 0);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  /// Underlying matrix dimension m.
  std::size_t dimension() const noexcept { return dimension_; }

  /// True when every atom carries weight 1/size().
  bool is_unweighted() const noexcept { return unweighted_; }

  double min() const { return atoms_.front().value; }
  double max() const { return atoms_.back().value; }

  Eigen::VectorXd values() const;
  Eigen::VectorXd weights() const;

  Spectrum shifted(double c) const;
  Spectrum scaled(double c) const;

  /// Collapses atoms whose values differ by at most `tol` (relative to
  /// 1 + |value|) into one atom carrying the summed weight.
  Spectrum merged(double tol = 1e-12) const;

 private:
  std::vector<Atom> atoms_;
  std::size_t dimension_ = 0;
  bool unweighted_ = true;
};

/// Mixture of spectra with equal weight per part (e.g. eigenvalues pooled
/// over Monte Carlo draws).
Spectrum pool(std::span<const Spectrum> parts);

/// Sum of w_i * lambda_i^k.
double moment(const Spectrum& s, int k);

double mean(const Spectrum& s);
double population_variance(const Spectrum& s);

/// m2 - m_{1,1} where m_{1,1} = sum_{i != j} lambda_i lambda_j / (m(m-1)).
/// Equals m/(m-1) times the population variance. Requires an unweighted
/// spectrum with at least two atoms.
double kappa2(const Spectrum& s);

}  // namespace freemix
