#pragma once

#include <cstdint>

#include "freemix/random.hpp"
#include "freemix/spectrum.hpp"

namespace freemix {

/// Expected spectrum of Lambda1 + Pi^T Lambda2 Pi over uniform permutations:
/// every pairwise sum lambda_i + mu_j with weight w_i v_j. Exact weights are
/// kept unless `merge` is set, in which case atoms equal within 1e-12 fuse.
Spectrum classical_sum(const Spectrum& s1, const Spectrum& s2, bool merge = false);

/// One draw of the permutation: lambda_i + mu_pi(i), weight 1/m. Both spectra
/// must be unweighted with the same atom count.
Spectrum classical_sample_sum(const Spectrum& s1, const Spectrum& s2, Engine& rng);

/// sum_j C(n, j) m_j(s1) m_{n-j}(s2), the n-th moment of classical_sum.
double classical_moment(const Spectrum& s1, const Spectrum& s2, int n);

/// Number of length-n words over k letters up to rotation,
/// (1/n) sum_{d | n} phi(d) k^(n/d). Throws std::overflow_error past 64 bits.
std::uint64_t necklace_count(int n, std::uint64_t k);

struct MonomialClasses {
  /// Words in two letters whose trace reduces to tr(A^j B^(n-j)): the word is
  /// cyclically one block of each letter (or a single letter).
  std::uint64_t classical_monomials = 0;
  std::uint64_t crossing_monomials = 0;
  /// Rotation classes among all 2^n words.
  std::uint64_t classes = 0;
};

/// Enumerates all 2^n words of the expansion of (A + B)^n. n <= 20.
MonomialClasses classify_monomials(int n);

/// (n - 1)^2 + 1, the commonly quoted closed-form count of classical terms.
/// Disagrees with the enumerated classical_monomials (n(n-1) + 2);
/// both are exposed and neither is adjusted to match the other.
std::uint64_t classical_term_count_quoted(int n);

}  // namespace freemix
