#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "excavator/common.hpp"

namespace excavator {

using Vector = std::vector<double>;

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Anything that can turn a token sequence into one vector per token.
template <typename P>
concept TokenVectorProvider = requires(const P& p, std::span<const std::string> tokens) {
  { p.dimension() } -> std::convertible_to<std::size_t>;
  { p.embed(tokens) } -> std::same_as<std::vector<Vector>>;
};

// Deterministic stand-in for a contextual encoder: each token is the
// normalized sum of seeded random projections of its character trigrams
// (with boundary markers). Tokens are embedded independently of context.
class HashedNgramProvider {
 public:
  explicit HashedNgramProvider(std::size_t dimension = 64, std::uint64_t seed = 17)
      : dim_(dimension), seed_(seed) {}

  std::size_t dimension() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }

  Vector embed_token(std::string_view token) const {
    Vector v(dim_, 0.0);
    const std::string padded = "<" + to_lower(token) + ">";
    const std::size_t n = 3;
    auto add = [&](std::string_view gram) {
      std::uint64_t state = fnv1a64(gram, seed_);
      for (std::size_t d = 0; d < dim_; ++d) {
        // Uniform in [-1, 1) from the top 53 bits.
        double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
        v[d] += 2.0 * u - 1.0;
      }
    };
    if (padded.size() <= n) {
      add(padded);
    } else {
      for (std::size_t i = 0; i + n <= padded.size(); ++i) add(std::string_view(padded).substr(i, n));
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double& x : v) x /= norm;
    return v;
  }

  std::vector<Vector> embed(std::span<const std::string> tokens) const {
    std::vector<Vector> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(embed_token(t));
    return out;
  }

  // Phrase vector: mean of its token vectors.
  Vector embed_phrase(std::span<const std::string> tokens) const {
    Vector acc(dim_, 0.0);
    if (tokens.empty()) return acc;
    for (const auto& t : tokens) {
      auto v = embed_token(t);
      for (std::size_t d = 0; d < dim_; ++d) acc[d] += v[d];
    }
    for (double& x : acc) x /= static_cast<double>(tokens.size());
    return acc;
  }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

static_assert(TokenVectorProvider<HashedNgramProvider>);

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Cosine similarity; 0 when either vector is zero.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  double na = std::sqrt(dot(a, a));
  double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

}  // namespace excavator
