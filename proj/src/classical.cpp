#include "freemix/classical.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "freemix/ensembles.hpp"

namespace freemix {

Spectrum classical_sum(const Spectrum& s1, const Spectrum& s2, bool merge) {
  std::vector<Atom> atoms;
  atoms.reserve(s1.size() * s2.size());
  for (const Atom& a : s1.atoms())
    for (const Atom& b : s2.atoms()) atoms.push_back({a.value + b.value, a.weight * b.weight});

  double total = 0.0;
  for (const Atom& a : atoms) total += a.weight;
  for (Atom& a : atoms) a.weight /= total;

  Spectrum out = Spectrum::from_atoms(std::move(atoms), s1.dimension() * s2.dimension());
  return merge ? out.merged(1e-12) : out;
}

Spectrum classical_sample_sum(const Spectrum& s1, const Spectrum& s2, Engine& rng) {
  if (s1.size() != s2.size()) throw std::invalid_argument("classical_sample_sum: size mismatch");
  if (!s1.is_unweighted() || !s2.is_unweighted())
    throw std::invalid_argument("classical_sample_sum needs unweighted spectra");
  const auto perm = random_permutation(static_cast<Index>(s1.size()), rng);
  std::vector<double> values(s1.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = s1.atoms()[i].value + s2.atoms()[static_cast<std::size_t>(perm[i])].value;
  return Spectrum::from_values(std::move(values));
}

double classical_moment(const Spectrum& s1, const Spectrum& s2, int n) {
  if (n < 1) throw std::invalid_argument("classical_moment needs n >= 1");
  double acc = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= n; ++j) {
    acc += binom * moment(s1, j) * moment(s2, n - j);
    binom = binom * (n - j) / (j + 1);
  }
  return acc;
}

namespace {

std::uint64_t euler_phi(std::uint64_t n) {
  std::uint64_t result = n;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("necklace count exceeds 64 bits");
  return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("necklace count exceeds 64 bits");
  return r;
}

std::uint64_t checked_pow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r = checked_mul(r, base);
  return r;
}

std::uint32_t rotate(std::uint32_t w, int n) {
  const std::uint32_t mask = (n == 32) ? ~0u : ((1u << n) - 1u);
  return ((w >> 1) | ((w & 1u) << (n - 1))) & mask;
}

std::uint32_t min_rotation(std::uint32_t w, int n) {
  std::uint32_t best = w;
  for (int r = 1; r < n; ++r) {
    w = rotate(w, n);
    best = std::min(best, w);
  }
  return best;
}

/// Letter changes going once around the cyclic word.
int cyclic_changes(std::uint32_t w, int n) {
  int changes = 0;
  for (int i = 0; i < n; ++i) {
    const std::uint32_t a = (w >> i) & 1u;
    const std::uint32_t b = (w >> ((i + 1) % n)) & 1u;
    changes += (a != b);
  }
  return changes;
}

}  // namespace

std::uint64_t necklace_count(int n, std::uint64_t k) {
  if (n < 1 || k < 1) throw std::invalid_argument("necklace_count needs n, k >= 1");
  std::uint64_t acc = 0;
  for (int d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    acc = checked_add(acc, checked_mul(euler_phi(static_cast<std::uint64_t>(d)), checked_pow(k, n / d)));
  }
  return acc / static_cast<std::uint64_t>(n);
}

MonomialClasses classify_monomials(int n) {
  if (n < 1) throw std::invalid_argument("classify_monomials needs n >= 1");
  if (n > 20) throw std::invalid_argument("classify_monomials enumerates 2^n words; n <= 20");
  MonomialClasses out;
  const std::uint32_t words = 1u << n;
  for (std::uint32_t w = 0; w < words; ++w) {
    if (cyclic_changes(w, n) <= 2)
      ++out.classical_monomials;
    else
      ++out.crossing_monomials;
    if (min_rotation(w, n) == w) ++out.classes;
  }
  return out;
}

std::uint64_t classical_term_count_quoted(int n) {
  if (n < 1) throw std::invalid_argument("classical_term_count_quoted needs n >= 1");
  const auto k = static_cast<std::uint64_t>(n - 1);
  return k * k + 1;
}

}  // namespace freemix
