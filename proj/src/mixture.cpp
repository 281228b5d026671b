#include "freemix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace freemix {

namespace {

struct PowerSums {
  double s1 = 0.0;
  double s2 = 0.0;
};

PowerSums power_sums(const Spectrum& s) {
  PowerSums p;
  for (const Atom& a : s.atoms()) {
    p.s1 += a.value;
    p.s2 += a.value * a.value;
  }
  return p;
}

void check_unweighted_pair(const Spectrum& s1, const Spectrum& s2, Index m) {
  if (m < 2) throw std::invalid_argument("free moments need m >= 2");
  if (static_cast<Index>(s1.size()) != m || static_cast<Index>(s2.size()) != m)
    throw std::invalid_argument("spectra must have exactly m atoms");
  if (!s1.is_unweighted() || !s2.is_unweighted())
    throw std::invalid_argument("free moments need unweighted spectra");
}

double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double mu = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

PEstimate make_estimate(double raw) {
  PEstimate p;
  p.raw = raw;
  p.clamped = std::clamp(raw, 0.0, 1.0);
  p.out_of_range = p.clamped != raw;
  return p;
}

}  // namespace

double free_crossing_term(const Spectrum& s1, const Spectrum& s2, Index m, int beta) {
  check_unweighted_pair(s1, s2, m);
  const PowerSums a = power_sums(s1);
  const PowerSums b = power_sums(s2);
  const HaarCrossMoments cross = haar_cross_moments(m, beta);
  const double e4 = haar_fourth_moment(m, beta);
  // Off-diagonal pair sums: sum_{i != k} lambda_i lambda_k.
  const double off1 = a.s1 * a.s1 - a.s2;
  const double off2 = b.s1 * b.s1 - b.s2;
  const double total = cross.e_cross * off1 * off2   // i != k, j != p
                       + cross.e22 * a.s2 * off2     // i == k, j != p
                       + cross.e22 * off1 * b.s2     // i != k, j == p
                       + e4 * a.s2 * b.s2;           // i == k, j == p
  return total / static_cast<double>(m);
}

double free_fourth_moment(const Spectrum& s1, const Spectrum& s2, Index m, int beta) {
  const double crossing = free_crossing_term(s1, s2, m, beta);
  return moment(s1, 4) + moment(s2, 4) + 4.0 * moment(s1, 3) * moment(s2, 1) +
         4.0 * moment(s1, 1) * moment(s2, 3) + 4.0 * moment(s1, 2) * moment(s2, 2) + 2.0 * crossing;
}

double classical_fourth_moment(const Spectrum& s1, const Spectrum& s2) {
  return classical_moment(s1, s2, 4);
}

PEstimate p_from_moments(double m4, double m4c, double m4f) {
  const double denom = m4c - m4f;
  const double scale = std::max(std::abs(m4c), std::abs(m4f));
  if (!(std::abs(denom) >= 1e-12 * scale) || scale == 0.0)
    throw NumericalDegeneracy("summand effectively classical-free indistinguishable");
  return make_estimate((m4c - m4) / denom);
}

PEstimate p_from_ipr(double ipr_s, Index m, int beta, bool asymptotic) {
  if (m < 2) throw std::invalid_argument("p_from_ipr needs m >= 2");
  if (asymptotic) return make_estimate(ipr_s);
  return make_estimate(ipr_s / haar_ipr_closed(m, beta));
}

double p_block_closed(Index m, Index ell, int beta) {
  check_beta(beta);
  if (ell < 1 || m < 1 || m % ell != 0) throw std::invalid_argument("block size must divide m");
  const double md = static_cast<double>(m);
  const double l = static_cast<double>(ell);
  const double num = (l - 1.0) * (md * beta + 2.0);
  const double den = num + 2.0 * (md - l);
  if (den == 0.0) throw NumericalDegeneracy("block model p undefined for m = ell = 1");
  return num / den;
}

double block_ipr_mismatch(Index ell) {
  if (ell < 1) throw std::invalid_argument("block size must be >= 1");
  const double l = static_cast<double>(ell);
  return (l - 1.0) / (l + 2.0);
}

double permutation_crossing_term(const Spectrum& s1, const Spectrum& s2) {
  const Index m = static_cast<Index>(s1.size());
  if (static_cast<Index>(s2.size()) != m) throw std::invalid_argument("dimension mismatch");
  if (m > 6) throw std::invalid_argument("exhaustive permutation averaging limited to m <= 6");
  const Eigen::VectorXd l1 = s1.values();
  const Eigen::VectorXd l2 = s2.values();
  std::vector<Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Index{0});
  double acc = 0.0;
  long count = 0;
  do {
    double t = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double d = l1(i) * l2(perm[static_cast<std::size_t>(i)]);
      t += d * d;
    }
    acc += t / static_cast<double>(m);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc / static_cast<double>(count);
}

double crossing_term_gap(const Spectrum& s1, const Spectrum& s2, ExhaustivePermutations) {
  const Index m = static_cast<Index>(s1.size());
  const double target = permutation_crossing_term(s1, s2);
  std::vector<Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Index{0});
  double acc = 0.0;
  long count = 0;
  do {
    acc += crossing_term<double>(s1, s2, permutation_matrix<double>(perm).entries);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return target - acc / static_cast<double>(count);
}

MonteCarloValue crossing_term_gap_haar(const Spectrum& s1, const Spectrum& s2, int beta, int samples,
                                       RngSeed seed) {
  if (samples < 2) throw std::invalid_argument("crossing_term_gap_haar needs samples >= 2");
  const Index m = static_cast<Index>(s1.size());
  std::vector<double> haar(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    Engine rng = make_engine(seed.child(static_cast<std::uint64_t>(i)));
    haar[static_cast<std::size_t>(i)] = dispatch_beta(beta, [&](auto tag) {
      using S = decltype(tag);
      return crossing_term<S>(s1, s2, sample_haar<S>(m, rng).entries);
    });
  }
  const double haar_mean = std::accumulate(haar.begin(), haar.end(), 0.0) / samples;
  const double haar_se = sample_sd(haar) / std::sqrt(static_cast<double>(samples));

  double perm_mean = 0.0;
  double perm_se = 0.0;
  if (m <= 6) {
    perm_mean = permutation_crossing_term(s1, s2);
  } else {
    const RngSeed pseed{splitmix64(seed.seed ^ 0x5045524DULL), seed.stream};
    std::vector<double> perm(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
      Engine rng = make_engine(pseed.child(static_cast<std::uint64_t>(i)));
      perm[static_cast<std::size_t>(i)] = crossing_term<double>(s1, s2, sample_permutation(m, rng).entries);
    }
    perm_mean = std::accumulate(perm.begin(), perm.end(), 0.0) / samples;
    perm_se = sample_sd(perm) / std::sqrt(static_cast<double>(samples));
  }
  return {perm_mean - haar_mean, std::hypot(perm_se, haar_se)};
}

std::string to_string(PMethod m) {
  switch (m) {
    case PMethod::closed: return "closed";
    case PMethod::moments: return "moments";
    case PMethod::ipr: return "ipr";
  }
  return "unknown";
}

PMethod parse_p_method(const std::string& s) {
  if (s == "closed") return PMethod::closed;
  if (s == "moments") return PMethod::moments;
  if (s == "ipr") return PMethod::ipr;
  throw std::invalid_argument("unknown p method '" + s + "' (expected closed, moments or ipr)");
}

MomentReport build_report(const std::vector<DrawSummary>& draws, Index m, int beta,
                          std::optional<double> closed_form_p, const EstimateConfig& config) {
  if (draws.empty()) throw std::invalid_argument("no draws to report");
  MomentReport r;
  const auto n = static_cast<double>(draws.size());
  r.samples = static_cast<int>(draws.size());
  r.dimension = m;
  r.beta = beta;

  std::vector<double> a(draws.size()), b(draws.size()), iprs(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const DrawSummary& d = draws[i];
    r.m1 += d.exact_moments[0] / n;
    r.m2 += d.exact_moments[1] / n;
    r.m3 += d.exact_moments[2] / n;
    r.m4 += d.exact_moments[3] / n;
    r.m4_classical += d.m4_classical / n;
    r.m4_free += d.m4_free / n;
    r.cross_classical += d.cross_classical / n;
    r.cross_exact += d.cross_exact / n;
    r.cross_free += d.cross_free / n;
    r.ipr += d.ipr / n;
    if (m >= 2) {
      r.kappa2_1 += kappa2(d.s1) / n;
      r.kappa2_2 += kappa2(d.s2) / n;
    }
    a[i] = d.cross_classical - d.cross_exact;
    b[i] = d.cross_classical - d.cross_free;
    iprs[i] = d.ipr;
  }
  r.m4_exact = r.m4;

  std::optional<PEstimate> moments_p;
  std::string degeneracy;
  try {
    moments_p = p_from_moments(r.cross_exact, r.cross_classical, r.cross_free);
    r.p_moments = moments_p->raw;
  } catch (const NumericalDegeneracy& e) {
    degeneracy = e.what();
  }
  try {
    r.p_fourth_moment = p_from_moments(r.m4, r.m4_classical, r.m4_free).raw;
  } catch (const NumericalDegeneracy&) {
  }
  std::optional<PEstimate> ipr_p;
  if (m >= 2) {
    ipr_p = p_from_ipr(r.ipr, m, beta, config.asymptotic_ipr);
    r.p_ipr = ipr_p->raw;
  }
  r.p_closed = closed_form_p;

  PMethod method = config.method.value_or(closed_form_p ? PMethod::closed : PMethod::moments);
  r.p_method = method;
  PEstimate chosen;
  switch (method) {
    case PMethod::closed:
      if (!closed_form_p) throw std::invalid_argument("model has no closed-form p");
      chosen = make_estimate(*closed_form_p);
      r.p_stderr = 0.0;
      break;
    case PMethod::moments: {
      if (!moments_p) throw NumericalDegeneracy(degeneracy);
      chosen = *moments_p;
      const double denom = r.cross_classical - r.cross_free;
      std::vector<double> resid(draws.size());
      for (std::size_t i = 0; i < draws.size(); ++i) resid[i] = a[i] - chosen.raw * b[i];
      r.p_stderr = sample_sd(resid) / (std::sqrt(n) * std::abs(denom));
      break;
    }
    case PMethod::ipr:
      if (!ipr_p) throw std::invalid_argument("IPR route needs m >= 2");
      chosen = *ipr_p;
      r.p_stderr = sample_sd(iprs) / std::sqrt(n) /
                   (config.asymptotic_ipr ? 1.0 : haar_ipr_closed(m, beta));
      break;
  }
  r.p_raw = chosen.raw;
  r.p_clamped = chosen.clamped;
  if (chosen.out_of_range)
    r.warnings.push_back("p_raw = " + std::to_string(chosen.raw) + " outside [0, 1]; clamped to " +
                         std::to_string(chosen.clamped));
  return r;
}

template <typename Scalar>
EstimateResult estimate(const SummandPair<Scalar>& pair, const EstimateConfig& config) {
  if (config.samples < 1) throw std::invalid_argument("samples must be >= 1");
  if (config.free_samples < 1) throw std::invalid_argument("free_samples must be >= 1");
  const int n = pair.deterministic() ? 1 : config.samples;

  std::vector<DrawSummary> draws;
  std::vector<Spectrum> exact;
  draws.reserve(static_cast<std::size_t>(n));
  exact.reserve(static_cast<std::size_t>(n));
  Index m = 0;
  for (int i = 0; i < n; ++i) {
    Engine rng = make_engine(config.seed.child(static_cast<std::uint64_t>(i)));
    const MatrixPair<Scalar> p = pair.draw(rng);
    m = p.m1.rows();
    draws.push_back(summarize_draw<Scalar>(p));
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(p.m1 + p.m2, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverFailure("symmetric eigensolver failed");
    exact.push_back(Spectrum::from_vector(es.eigenvalues()));
  }

  EstimateResult out;
  out.report = build_report(draws, m, beta_of_v<Scalar>, pair.closed_form_p(), config);

  const Spectrum exact_pool = pool(exact);

  // A deterministic pair with equal spectra is a two-fold free self-sum and
  // has an analytic free density; everything else goes through Haar draws.
  const Spectrum& first1 = draws.front().s1;
  const Spectrum& first2 = draws.front().s2;
  const bool self_fold = pair.deterministic() && first1.size() == first2.size() &&
                         (first1.values() - first2.values()).cwiseAbs().maxCoeff() <=
                             1e-12 * (1.0 + first1.values().cwiseAbs().maxCoeff());

  std::optional<Spectrum> free_pool;
  if (!self_fold) {
    const RngSeed free_seed{splitmix64(config.seed.seed ^ 0x46524545ULL), config.seed.stream};
    std::vector<Spectrum> parts;
    parts.reserve(static_cast<std::size_t>(config.free_samples));
    for (int j = 0; j < config.free_samples; ++j) {
      const DrawSummary& d = draws[static_cast<std::size_t>(j % n)];
      Engine rng = make_engine(free_seed.child(static_cast<std::uint64_t>(j)));
      const auto q = sample_haar<Scalar>(m, rng);
      parts.push_back(conjugated_sum<Scalar>(d.s1, d.s2, q.entries));
    }
    free_pool = pool(parts);
  }

  GridSpec grid;
  if (config.grid) {
    grid = *config.grid;
  } else {
    std::vector<Spectrum> span_of{exact_pool};
    if (free_pool) span_of.push_back(*free_pool);
    grid = default_grid(span_of, config.grid_points);
    double lo = grid.xmin, hi = grid.xmax;
    const double pad = 3.0 * std::sqrt(population_variance(exact_pool));
    for (const DrawSummary& d : draws) {
      lo = std::min(lo, d.s1.min() + d.s2.min() - pad);
      hi = std::max(hi, d.s1.max() + d.s2.max() + pad);
    }
    if (self_fold) {
      // Free self-sum support lies within [2 min, 2 max].
      lo = std::min(lo, 2.0 * first1.min() - pad);
      hi = std::max(hi, 2.0 * first1.max() + pad);
    }
    grid = GridSpec{lo, hi, config.grid_points};
  }

  out.exact = density_from_spectrum(exact_pool, grid, config.smoothing);

  DensityAccumulator classical(grid);
  for (const DrawSummary& d : draws)
    for (const Atom& x : d.s1.atoms())
      for (const Atom& y : d.s2.atoms()) classical.add(x.value + y.value, x.weight * y.weight / n);
  out.classical = classical.finish(config.smoothing);

  if (self_fold) {
    FreeSumQuery q;
    q.base = first1;
    q.folds = 2;
    q.grid = grid;
    out.free = nfold_free_density(q).curve;
  } else {
    out.free = density_from_spectrum(*free_pool, grid, config.smoothing);
  }

  out.mixed = mix_densities(out.report.p_clamped, out.free, out.classical).curve;
  return out;
}

template EstimateResult estimate<double>(const SummandPair<double>&, const EstimateConfig&);
template EstimateResult estimate<cplx>(const SummandPair<cplx>&, const EstimateConfig&);

}  // namespace freemix
