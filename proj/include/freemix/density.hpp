#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "freemix/spectrum.hpp"

namespace freemix {

/// Uniform grid [xmin, xmax] with `points` abscissae (endpoints included).
struct GridSpec {
  double xmin = -1.0;
  double xmax = 1.0;
  std::size_t points = 512;

  double step() const { return (xmax - xmin) / static_cast<double>(points - 1); }
  double at(std::size_t i) const;
  Eigen::VectorXd abscissae() const;
  void validate() const;
  bool same_as(const GridSpec& other) const;
};

/// [min atom - 3 sigma, max atom + 3 sigma] over the pooled atoms, 512 points.
GridSpec default_grid(std::span<const Spectrum> spectra, std::size_t points = 512);
GridSpec default_grid(const Spectrum& s, std::size_t points = 512);

enum class SmoothingKind { gaussian, histogram };

struct SmoothingSpec {
  SmoothingKind kind = SmoothingKind::gaussian;
  /// Kernel bandwidth; Silverman's rule when empty. Ignored for histograms.
  std::optional<double> bandwidth;
};

/// 1.06 * sigma * n^(-1/5) with n the effective sample size 1 / sum(w^2).
double silverman_bandwidth(const Spectrum& s);

/// Probability density sampled on a uniform grid.
class DensityCurve {
 public:
  DensityCurve() = default;
  /// Takes values as given (must be finite and nonnegative).
  DensityCurve(GridSpec grid, Eigen::VectorXd values);

  /// Same as the constructor, then rescales so the trapezoid integral is 1.
  static DensityCurve normalized(GridSpec grid, Eigen::VectorXd values);

  const GridSpec& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::VectorXd abscissae() const { return grid_.abscissae(); }

 private:
  GridSpec grid_;
  Eigen::VectorXd values_;
};

double trapezoid(const GridSpec& grid, const Eigen::VectorXd& values);
double integral(const DensityCurve& c);

/// Trapezoid quadrature of x^k f(x), divided by the curve's integral.
double curve_moment(const DensityCurve& c, int k);

/// Cumulative trapezoid integral normalized to end at 1.
Eigen::VectorXd cdf(const DensityCurve& c);

DensityCurve density_from_spectrum(const Spectrum& s, const GridSpec& grid,
                                   const SmoothingSpec& smoothing = {});

/// Streams weighted atoms onto a grid by linear binning, for atom sets too
/// large to hold (e.g. the m^2-atom classical product measure pooled over
/// many draws). Gaussian smoothing is then a discrete convolution on the
/// grid; the bandwidth defaults to Silverman's rule over the streamed atoms.
class DensityAccumulator {
 public:
  explicit DensityAccumulator(GridSpec grid);

  /// Atoms outside the grid throw, as in density_from_spectrum.
  void add(double x, double weight);
  void add(const Spectrum& s, double scale = 1.0);

  double total_weight() const { return sum_w_; }
  DensityCurve finish(const SmoothingSpec& smoothing = {}) const;

 private:
  GridSpec grid_;
  Eigen::VectorXd mass_;
  double sum_w_ = 0.0, sum_wx_ = 0.0, sum_wxx_ = 0.0, sum_ww_ = 0.0;
};

struct MixedDensity {
  DensityCurve curve;
  /// Weight actually applied to the free curve, in [0, 1].
  double weight = 0.0;
  /// Set when the requested weight was outside [0, 1] and got clamped.
  std::optional<std::string> warning;
};

/// p * free + (1 - p) * classical, renormalized.
MixedDensity mix_densities(double p, const DensityCurve& free, const DensityCurve& classical);

/// Trapezoid integral of |a - b|.
double l1_distance(const DensityCurve& a, const DensityCurve& b);

/// Max |CDF_a - CDF_b| over the grid.
double ks_distance(const DensityCurve& a, const DensityCurve& b);

/// Max |CDF_a - F_s| where F_s is the empirical CDF of the atoms; the curve
/// CDF is linearly interpolated between grid points.
double ks_distance(const DensityCurve& a, const Spectrum& s);

}  // namespace freemix
