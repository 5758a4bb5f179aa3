#pragma once

// Constructions of exactly t-wise independent variable families
// (degree-(t-1) polynomials over a prime field) and of dependent
// ensembles that t-agree with a dependency graph while being genuinely
// correlated across its edges.
//
// Sampling is pure: a family is immutable once its coefficients are
// fixed, and every randomized operation takes an explicit 64-bit seed.
// Monte Carlo trial seeds are derived as a pure function of
// (master_seed, trial_index), so results never depend on scheduling.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "depbound/graph.hpp"

namespace depbound {

/// Thrown when an exhaustive-enumeration oracle would exceed its seed
/// budget; distinct from a negative verification result.
struct budget_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultSeedBudget = 10'000'000;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-trial seed as a pure function of the master seed and trial index.
inline constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(master_seed ^ splitmix64(index));
}

/// Uniform draw in [0, bound) by masked rejection. Unlike
/// std::uniform_int_distribution this is pinned to one algorithm, so
/// seeded runs reproduce bit-for-bit on any platform.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bound must be positive");
  std::uint64_t mask = bound - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  while (true) {
    const std::uint64_t x = rng() & mask;
    if (x < bound) return x;
  }
}

/// Horner evaluation of a coefficient vector (c_0, ..., c_{t-1}) at x in
/// F_prime. Products stay below 2^64 for prime < 2^32.
inline std::uint64_t poly_eval(std::span<const std::uint64_t> coeffs, std::uint64_t x,
                               std::uint64_t prime) {
  std::uint64_t acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = (acc * x + *it) % prime;
  return acc;
}

inline bool is_prime(std::uint64_t x) {
  if (x < 2) return false;
  for (std::uint64_t d = 2; d * d <= x; ++d)
    if (x % d == 0) return false;
  return true;
}

inline std::uint64_t next_prime_at_least(std::uint64_t x) {
  while (!is_prime(x)) ++x;
  return x;
}

/// Shape of a polynomial family: m variables of independence order t over
/// the field F_prime. The m evaluation points must be distinct and the
/// Vandermonde argument needs t distinct points, so prime >= max(m, t);
/// automatic selection leaves extra headroom with prime >= max(m, 2t).
struct FamilyParams {
  std::size_t m = 1;
  int t = 1;
  std::uint64_t prime = 2;

  void validate() const {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (t < 1) throw std::invalid_argument("t must be >= 1");
    if (!is_prime(prime)) throw std::invalid_argument("modulus must be prime");
    if (prime < m || prime < static_cast<std::uint64_t>(t))
      throw std::invalid_argument("prime must be >= max(m, t)");
    if (prime > (1ULL << 31)) throw std::invalid_argument("prime too large (limit 2^31)");
  }

  /// Smallest prime admissible for (m, t).
  static FamilyParams choose(std::size_t m, int t) {
    if (m < 1 || t < 1) throw std::invalid_argument("m and t must be >= 1");
    const std::uint64_t lo = std::max<std::uint64_t>(m, 2 * static_cast<std::uint64_t>(t));
    return FamilyParams{m, t, next_prime_at_least(lo)};
  }

  /// Number of seeds (coefficient vectors), prime^t; throws budget_error
  /// beyond `budget` so oracles refuse rather than silently sample.
  std::uint64_t seed_space_size(std::uint64_t budget = kDefaultSeedBudget) const {
    std::uint64_t s = 1;
    for (int i = 0; i < t; ++i) {
      if (s > budget / prime) throw budget_error("seed space prime^t exceeds exhaustive budget");
      s *= prime;
    }
    if (s > budget) throw budget_error("seed space prime^t exceeds exhaustive budget");
    return s;
  }
};

/// One joint sample of m variables: Y_i = poly(i)/prime with a uniformly
/// drawn degree-(t-1) coefficient vector. Over a random seed the Y_i are
/// exactly t-wise independent with uniform marginals on the 1/prime grid.
class TwiseFamily {
 public:
  TwiseFamily(std::size_t m, int t, std::uint64_t rng_seed)
      : TwiseFamily(FamilyParams::choose(m, t), rng_seed) {}

  TwiseFamily(FamilyParams params, std::uint64_t rng_seed) : params_(params) {
    params_.validate();
    std::mt19937_64 rng(rng_seed);
    coeffs_.reserve(static_cast<std::size_t>(params_.t));
    for (int i = 0; i < params_.t; ++i) coeffs_.push_back(uniform_below(rng, params_.prime));
  }

  TwiseFamily(FamilyParams params, std::vector<std::uint64_t> coeffs)
      : params_(params), coeffs_(std::move(coeffs)) {
    params_.validate();
    if (coeffs_.size() != static_cast<std::size_t>(params_.t))
      throw std::invalid_argument("seed must have exactly t coefficients");
    for (std::uint64_t c : coeffs_)
      if (c >= params_.prime) throw std::invalid_argument("coefficient out of field range");
  }

  const FamilyParams& params() const { return params_; }
  std::size_t size() const { return params_.m; }
  int order() const { return params_.t; }
  std::uint64_t prime() const { return params_.prime; }
  const std::vector<std::uint64_t>& coefficients() const { return coeffs_; }

  /// poly(x_i) in F_prime, where x_i = i is the i-th field point.
  std::uint64_t field_value(std::size_t i) const {
    if (i >= params_.m) throw std::out_of_range("variable index out of range");
    return poly_eval(coeffs_, static_cast<std::uint64_t>(i), params_.prime);
  }

  /// Y_i on the uniform grid {0, 1/prime, ..., (prime-1)/prime}.
  double sample_uniform(std::size_t i) const {
    return static_cast<double>(field_value(i)) / static_cast<double>(params_.prime);
  }

  /// Threshold Bernoulli with exact success probability p_num/prime.
  int sample_bernoulli(std::size_t i, std::uint64_t p_num) const {
    if (p_num > params_.prime) throw std::invalid_argument("p_num must be in [0, prime]");
    return field_value(i) < p_num ? 1 : 0;
  }

 private:
  FamilyParams params_;
  std::vector<std::uint64_t> coeffs_;
};

/// Visits every coefficient vector of the family's seed space exactly
/// once (prime^t calls). Throws budget_error if that exceeds `budget`.
template <typename Fn>
void for_each_seed(const FamilyParams& params, Fn&& fn,
                   std::uint64_t budget = kDefaultSeedBudget) {
  params.validate();
  const std::uint64_t total = params.seed_space_size(budget);
  std::vector<std::uint64_t> coeffs(static_cast<std::size_t>(params.t), 0);
  for (std::uint64_t s = 0; s < total; ++s) {
    fn(std::span<const std::uint64_t>(coeffs));
    for (std::size_t pos = 0; pos < coeffs.size(); ++pos) {
      if (++coeffs[pos] < params.prime) break;
      coeffs[pos] = 0;
    }
  }
}

/// Closest exact rational p_num/prime to a requested real bias p;
/// ties round up. Callers should report the realized p_num/prime.
inline std::uint64_t closest_bernoulli_numerator(double p, std::uint64_t prime) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be in [0,1]");
  const double scaled = p * static_cast<double>(prime);
  auto p_num = static_cast<std::uint64_t>(scaled + 0.5);
  return p_num > prime ? prime : p_num;
}

enum class FlipPattern { none, alternating };

inline std::string to_string(FlipPattern f) {
  return f == FlipPattern::none ? "none" : "alternating";
}

inline FlipPattern flip_pattern_from_string(const std::string& s) {
  if (s == "none") return FlipPattern::none;
  if (s == "alternating") return FlipPattern::alternating;
  throw std::invalid_argument("flips must be 'none' or 'alternating'");
}

/// Construction recipe for a clique-block ensemble; doubles as the
/// reproducibility descriptor written next to experiment outputs.
struct CliqueEnsembleSpec {
  std::size_t blocks = 1;
  std::size_t block_size = 1;
  int t = 1;
  std::uint64_t prime = 0;                // 0 = smallest admissible prime
  std::optional<std::uint64_t> p_num;     // empty = uniform-valued ensemble
  FlipPattern flips = FlipPattern::none;
  std::uint64_t master_seed = 0;
};

/// Descriptor text format: one key=value line per field, in a fixed
/// order, so experiment outputs can echo their exact configuration.
inline void write_ensemble_descriptor(std::ostream& out, const CliqueEnsembleSpec& spec) {
  out << "blocks=" << spec.blocks << '\n';
  out << "block_size=" << spec.block_size << '\n';
  out << "t=" << spec.t << '\n';
  out << "prime=" << spec.prime << '\n';
  out << "p_num=" << (spec.p_num ? std::to_string(*spec.p_num) : std::string("none")) << '\n';
  out << "flips=" << to_string(spec.flips) << '\n';
  out << "master_seed=" << spec.master_seed << '\n';
}

inline CliqueEnsembleSpec parse_ensemble_descriptor(std::istream& in) {
  CliqueEnsembleSpec spec;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("descriptor line must be key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "blocks") spec.blocks = std::stoull(value);
    else if (key == "block_size") spec.block_size = std::stoull(value);
    else if (key == "t") spec.t = std::stoi(value);
    else if (key == "prime") spec.prime = std::stoull(value);
    else if (key == "p_num") spec.p_num = value == "none" ? std::nullopt : std::optional<std::uint64_t>(std::stoull(value));
    else if (key == "flips") spec.flips = flip_pattern_from_string(value);
    else if (key == "master_seed") spec.master_seed = std::stoull(value);
    else throw std::invalid_argument("unknown descriptor key: " + key);
  }
  return spec;
}

inline CliqueEnsembleSpec parse_ensemble_descriptor(const std::string& text) {
  std::istringstream in(text);
  return parse_ensemble_descriptor(in);
}

/// Maps each vertex of a dependency graph onto one index of a t-wise
/// family, optionally flipped (w -> prime-1-w at the field level, which
/// preserves every marginal). Vertices of one clique block share an
/// index, so adjacent variables are strongly correlated, while any
/// independent set touches distinct indices and stays t-wise independent:
/// the ensemble t-agrees with the graph.
class DependentEnsemble {
 public:
  struct VertexSource {
    std::size_t index = 0;
    bool flip = false;
  };

  DependentEnsemble(DependencyGraph graph, FamilyParams family, std::vector<VertexSource> vertex_map,
                    std::optional<std::uint64_t> p_num, std::uint64_t master_seed = 0)
      : graph_(std::move(graph)),
        family_(family),
        vertex_map_(std::move(vertex_map)),
        p_num_(p_num),
        master_seed_(master_seed) {
    family_.validate();
    if (vertex_map_.size() != graph_.vertex_count())
      throw std::invalid_argument("vertex map size must match graph");
    for (const auto& src : vertex_map_)
      if (src.index >= family_.m) throw std::invalid_argument("vertex maps outside family");
    if (p_num_ && *p_num_ > family_.prime)
      throw std::invalid_argument("p_num must be in [0, prime]");
  }

  const DependencyGraph& graph() const { return graph_; }
  const FamilyParams& family() const { return family_; }
  const std::vector<VertexSource>& vertex_map() const { return vertex_map_; }
  std::optional<std::uint64_t> bernoulli_numerator() const { return p_num_; }
  bool is_bernoulli() const { return p_num_.has_value(); }
  std::uint64_t master_seed() const { return master_seed_; }
  std::size_t vertex_count() const { return graph_.vertex_count(); }

  /// Field value feeding vertex v, flip applied.
  std::uint64_t vertex_field_value(const TwiseFamily& fam, std::size_t v) const {
    const VertexSource& src = vertex_map_.at(v);
    std::uint64_t w = fam.field_value(src.index);
    if (src.flip) w = family_.prime - 1 - w;
    return w;
  }

  double vertex_value(const TwiseFamily& fam, std::size_t v) const {
    const std::uint64_t w = vertex_field_value(fam, v);
    if (p_num_) return w < *p_num_ ? 1.0 : 0.0;
    return static_cast<double>(w) / static_cast<double>(family_.prime);
  }

  /// Integer numerator of X = sum of vertex values over denominator
  /// value_denominator(); exact oracles work on these.
  std::uint64_t sum_numerator(const TwiseFamily& fam) const {
    std::uint64_t num = 0;
    for (std::size_t v = 0; v < vertex_count(); ++v) {
      const std::uint64_t w = vertex_field_value(fam, v);
      num += p_num_ ? (w < *p_num_ ? 1 : 0) : w;
    }
    return num;
  }

  std::uint64_t value_denominator() const { return p_num_ ? 1 : family_.prime; }

  /// Exact E[X]: n * p_num/prime for Bernoulli values, n(prime-1)/(2 prime)
  /// for grid-uniform values.
  double mean() const {
    const double n = static_cast<double>(vertex_count());
    const double p = static_cast<double>(family_.prime);
    if (p_num_) return n * static_cast<double>(*p_num_) / p;
    return n * (p - 1.0) / (2.0 * p);
  }

  /// X = sum of all vertex values under a fresh family seed.
  double draw_sum(std::uint64_t rng_seed) const {
    const TwiseFamily fam(family_, rng_seed);
    const std::uint64_t num = sum_numerator(fam);
    return static_cast<double>(num) / static_cast<double>(value_denominator());
  }

 private:
  DependencyGraph graph_;
  FamilyParams family_;
  std::vector<VertexSource> vertex_map_;
  std::optional<std::uint64_t> p_num_;
  std::uint64_t master_seed_;
};

inline DependentEnsemble make_clique_ensemble(const CliqueEnsembleSpec& spec) {
  if (spec.blocks < 1 || spec.block_size < 1)
    throw std::invalid_argument("blocks and block_size must be >= 1");
  FamilyParams params = spec.prime == 0
                            ? FamilyParams::choose(spec.blocks, spec.t)
                            : FamilyParams{spec.blocks, spec.t, spec.prime};
  params.validate();
  DependencyGraph g = make_clique_blocks(spec.blocks, spec.block_size);
  std::vector<DependentEnsemble::VertexSource> map(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const std::size_t block = v / spec.block_size;
    const std::size_t offset = v % spec.block_size;
    map[v] = {block, spec.flips == FlipPattern::alternating && offset % 2 == 1};
  }
  return DependentEnsemble(std::move(g), params, std::move(map), spec.p_num, spec.master_seed);
}

inline DependentEnsemble make_clique_ensemble(std::size_t num_blocks, std::size_t block_size, int t,
                                              std::optional<std::uint64_t> p_num,
                                              std::uint64_t master_seed,
                                              FlipPattern flips = FlipPattern::none) {
  return make_clique_ensemble(CliqueEnsembleSpec{num_blocks, block_size, t, 0, p_num, flips, master_seed});
}

/// Nonempty independent sets of g with at most max_size vertices, in
/// lexicographic vertex order.
template <typename Fn>
void for_each_independent_set(const DependencyGraph& g, std::size_t max_size, Fn&& fn) {
  std::vector<std::size_t> current;
  auto recurse = [&](auto&& self, std::size_t next) -> void {
    if (!current.empty()) fn(std::span<const std::size_t>(current));
    if (current.size() == max_size) return;
    for (std::size_t v = next; v < g.vertex_count(); ++v) {
      bool compatible = true;
      for (std::size_t u : current) {
        if (g.has_edge(u, v)) {
          compatible = false;
          break;
        }
      }
      if (!compatible) continue;
      current.push_back(v);
      self(self, v + 1);
      current.pop_back();
    }
  };
  recurse(recurse, 0);
}

/// Exhaustive check that the ensemble t-agrees with its graph: for every
/// independent set S with |S| <= min(t, max_check_size), the joint
/// distribution of {X_i : i in S} over all prime^t seeds factorizes into
/// its marginals with exact integer counts. Throws budget_error when the
/// seed space is too large to enumerate.
inline bool verify_t_agreement(const DependentEnsemble& e, std::size_t max_check_size,
                               std::uint64_t budget = kDefaultSeedBudget) {
  const FamilyParams& params = e.family();
  params.seed_space_size(budget);  // refuse before any work
  const std::uint64_t p = params.prime;
  const std::size_t set_cap = std::min<std::size_t>(max_check_size, static_cast<std::size_t>(params.t));
  if (set_cap == 0) return true;

  // Values are keyed as small integers: the (possibly flipped) field
  // value for uniform ensembles, the Bernoulli bit otherwise. Each
  // variable is a function of one uniform field coordinate, so its
  // marginal count over the seed space is n_v(key) * prime^(t-1), and
  // factorization reduces to exact integer count identities.
  const std::uint64_t key_range = e.is_bernoulli() ? 2 : p;
  const auto key_of = [&](std::span<const std::uint64_t> coeffs, std::size_t v) -> std::uint64_t {
    const auto& src = e.vertex_map()[v];
    std::uint64_t w = poly_eval(coeffs, static_cast<std::uint64_t>(src.index), p);
    if (src.flip) w = p - 1 - w;  // field bijection, marginal preserved
    return e.is_bernoulli() ? (w < *e.bernoulli_numerator() ? 1 : 0) : w;
  };
  const auto marginal_count = [&](std::uint64_t key) -> std::uint64_t {
    if (!e.is_bernoulli()) return 1;
    return key == 1 ? *e.bernoulli_numerator() : p - *e.bernoulli_numerator();
  };

  bool all_pass = true;
  for_each_independent_set(e.graph(), set_cap, [&](std::span<const std::size_t> set) {
    if (!all_pass) return;
    const std::size_t s = set.size();
    std::size_t cells = 1;
    for (std::size_t i = 0; i < s; ++i) cells *= static_cast<std::size_t>(key_range);
    std::vector<std::uint64_t> joint(cells, 0);
    for_each_seed(
        params,
        [&](std::span<const std::uint64_t> coeffs) {
          std::size_t cell = 0;
          for (std::size_t v : set)
            cell = cell * static_cast<std::size_t>(key_range) +
                   static_cast<std::size_t>(key_of(coeffs, v));
          joint[cell]++;
        },
        budget);

    // Product measure in exact counts: cnt(keys) == prime^(t-s) * prod n_v(key_v).
    std::uint64_t scale = 1;
    for (std::size_t i = s; i < static_cast<std::size_t>(params.t); ++i) scale *= p;
    for (std::size_t cell = 0; cell < cells && all_pass; ++cell) {
      std::uint64_t expected = scale;
      std::size_t rem = cell;
      for (std::size_t i = s; i-- > 0;) {
        expected *= marginal_count(rem % key_range);
        rem /= static_cast<std::size_t>(key_range);
      }
      if (joint[cell] != expected) all_pass = false;
    }
  });
  return all_pass;
}

}  // namespace depbound
