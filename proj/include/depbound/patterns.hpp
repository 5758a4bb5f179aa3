#pragma once

// Hidden-pattern statistics: occurrence counting of a fixed word in a
// random string, and the tail bound applied to contiguous (window)
// occurrences, whose dependency graph is the window overlap graph.
//
// The count of length-d windows matching a word is a sum of indicator
// variables; windows at non-overlapping positions read disjoint letters,
// so with t-wise independent letters those indicators are floor(t/d)-wise
// independent and the combined tail bound applies with chi <= d (times
// the letter-level chromatic number when the letters themselves follow a
// dependency graph).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "depbound/bounds.hpp"
#include "depbound/graph.hpp"
#include "depbound/sampler.hpp"
#include "depbound/verify.hpp"

namespace depbound {

/// Number of positions i with s[i..i+d-1] = w; overlapping occurrences
/// all count. Zero when w is longer than s.
inline std::uint64_t count_window_occurrences(std::string_view s, std::string_view w) {
  if (w.empty() || w.size() > s.size()) return 0;
  std::uint64_t count = 0;
  for (std::size_t i = 0; i + w.size() <= s.size(); ++i)
    if (s.substr(i, w.size()) == w) count++;
  return count;
}

/// Number of increasing index tuples i_1 < ... < i_d with
/// s[i_1]...s[i_d] = w, by the standard O(n d) dynamic program.
inline std::uint64_t count_subsequence_occurrences(std::string_view s, std::string_view w) {
  const std::size_t d = w.size();
  if (d == 0) return 1;
  // ways[j] = matchings of the first j letters of w into the prefix read so far
  std::vector<std::uint64_t> ways(d + 1, 0);
  ways[0] = 1;
  for (char c : s)
    for (std::size_t j = d; j-- > 0;)
      if (w[j] == c) ways[j + 1] += ways[j];
  return ways[d];
}

/// A pattern experiment: word w over alphabet letters 'a', 'b', ... in a
/// random string of length n. letter_chi is the chromatic number of the
/// letter-level dependency graph (1 = t-wise independent letters).
struct PatternInstance {
  std::size_t alphabet_size = 2;
  std::string word;
  std::size_t n = 1;
  std::size_t letter_chi = 1;

  std::size_t word_length() const { return word.size(); }
  std::size_t window_count() const { return n >= word.size() ? n - word.size() + 1 : 0; }

  void validate() const {
    if (alphabet_size < 2 || alphabet_size > 26)
      throw std::invalid_argument("alphabet size must be in [2, 26]");
    if (word.empty() || word.size() > n)
      throw std::invalid_argument("word length must be in [1, n]");
    if (letter_chi < 1) throw std::invalid_argument("letter_chi must be >= 1");
    for (char c : word)
      if (c < 'a' || static_cast<std::size_t>(c - 'a') >= alphabet_size)
        throw std::invalid_argument("word letter outside alphabet");
  }
};

/// Effective bound parameters for the window-count statistic.
struct WindowBoundPlan {
  std::size_t n_windows = 0;
  int t_eff = 2;     // largest even order <= floor(t_letters / d)
  std::size_t chi = 1;
};

inline WindowBoundPlan plan_window_bound(const PatternInstance& p, int t_letters) {
  p.validate();
  if (t_letters < 1) throw std::invalid_argument("t must be >= 1");
  const std::size_t d = p.word_length();
  // Each indicator reads d letters, so t-wise independent letters give
  // floor(t/d)-wise independent indicators on non-overlapping windows.
  const int t_prime = static_cast<int>(static_cast<std::size_t>(t_letters) / d);
  const int t_eff = t_prime - (t_prime % 2);
  if (t_eff < 2)
    throw std::invalid_argument("insufficient independence order: floor(t/d) < 2");
  WindowBoundPlan plan;
  plan.n_windows = p.window_count();
  plan.t_eff = t_eff;
  plan.chi = std::min(d * p.letter_chi, plan.n_windows);
  return plan;
}

/// Tail bound on the window-occurrence count at absolute deviation a,
/// given letters of independence order t_letters.
inline BoundResult window_count_bound(const PatternInstance& p, double a, int t_letters) {
  const WindowBoundPlan plan = plan_window_bound(p, t_letters);
  return combined_tail_bound(TailQuery{plan.n_windows, plan.t_eff, a, plan.chi});
}

// ---------------------------------------------------------------------------
// Random strings from polynomial families

/// Letter at field value w: floor(w * alphabet / prime), in [0, alphabet).
inline std::size_t letter_from_field(std::uint64_t w, std::size_t alphabet, std::uint64_t prime) {
  return static_cast<std::size_t>(w * alphabet / prime);
}

/// Number of field values mapping to `letter` (exact marginal numerator
/// over prime).
inline std::uint64_t letter_field_count(std::size_t letter, std::size_t alphabet,
                                        std::uint64_t prime) {
  const auto lo = (static_cast<std::uint64_t>(letter) * prime + alphabet - 1) / alphabet;
  const auto hi = ((static_cast<std::uint64_t>(letter) + 1) * prime + alphabet - 1) / alphabet;
  return hi - lo;
}

inline FamilyParams letter_family_params(const PatternInstance& p, int t_letters) {
  return FamilyParams::choose(p.n, t_letters);
}

inline std::string sample_string(const PatternInstance& p, const TwiseFamily& family) {
  std::string s(p.n, 'a');
  for (std::size_t i = 0; i < p.n; ++i)
    s[i] = static_cast<char>(
        'a' + letter_from_field(family.field_value(i), p.alphabet_size, family.prime()));
  return s;
}

/// Exact per-window match probability: letters inside one window are
/// jointly independent whenever t_letters >= d.
inline double window_match_probability(const PatternInstance& p, std::uint64_t prime) {
  double prob = 1.0;
  for (char c : p.word)
    prob *= static_cast<double>(letter_field_count(static_cast<std::size_t>(c - 'a'),
                                                   p.alphabet_size, prime)) /
            static_cast<double>(prime);
  return prob;
}

inline double expected_window_count(const PatternInstance& p, std::uint64_t prime) {
  return static_cast<double>(p.window_count()) * window_match_probability(p, prime);
}

enum class PatternMode { window, subsequence };

/// Per-trial occurrence counts over `trials` independent strings; trial i
/// uses the family seeded by derive_seed(master_seed, i).
inline std::vector<std::uint64_t> sample_pattern_counts(const PatternInstance& p, PatternMode mode,
                                                        int t_letters, std::uint64_t trials,
                                                        std::uint64_t master_seed,
                                                        unsigned threads = 1) {
  p.validate();
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const FamilyParams params = letter_family_params(p, t_letters);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(trials), 0);
  const unsigned workers = std::max(
      1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(trials, 64))));
  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      const TwiseFamily family(params, derive_seed(master_seed, i));
      const std::string s = sample_string(p, family);
      counts[i] = mode == PatternMode::window ? count_window_occurrences(s, p.word)
                                              : count_subsequence_occurrences(s, p.word);
    }
  };
  if (workers == 1) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(run_range, w * chunk, std::min<std::uint64_t>(trials, (w + 1) * chunk));
    for (auto& th : pool) th.join();
  }
  return counts;
}

/// Window-mode Monte Carlo experiment: tail frequencies of
/// |count - mu| >= a against the window bound, the refined
/// coloring-composition bound, the Bernoulli corollary (indicators are
/// Be(p_match) on a graph of degree <= 2(d-1)), and the Chernoff
/// reference. Emits the same CSV schema as the ensemble experiments.
inline ExperimentReport window_tail_report(const PatternInstance& p, int t_letters,
                                           std::vector<double> a_grid,
                                           std::span<const std::uint64_t> counts) {
  const WindowBoundPlan plan = plan_window_bound(p, t_letters);
  if (counts.empty()) throw std::invalid_argument("need at least one trial count");
  const FamilyParams params = letter_family_params(p, t_letters);
  const double mu = expected_window_count(p, params.prime);
  std::sort(a_grid.begin(), a_grid.end());

  const DependencyGraph overlap = make_window_overlap_graph(p.n, p.word_length());
  const ColorClassSizes classes = greedy_coloring(overlap).class_sizes();
  const double p_match = window_match_probability(p, params.prime);

  ExperimentReport report;
  for (double a : a_grid) {
    const double a_pos = a > 0.0 ? a : std::numeric_limits<double>::min();
    std::uint64_t exceed = 0;
    for (std::uint64_t c : counts)
      if (std::abs(static_cast<double>(c) - mu) >= a) exceed++;
    const BoundResult theorem =
        combined_tail_bound(TailQuery{plan.n_windows, plan.t_eff, a_pos, plan.chi});
    const BoundResult refined =
        markov_tail_from_moment(refined_moment_bound(classes, plan.t_eff), plan.t_eff, a_pos);
    std::optional<BoundResult> corollary;
    if (p_match > 0.0 && p_match < 1.0) {
      const double a_rel = a_pos / (p_match * static_cast<double>(plan.n_windows));
      corollary = bernoulli_tail_bound(BernoulliQuery{plan.n_windows, overlap.max_degree(),
                                                      plan.t_eff, p_match, a_rel},
                                       TailSide::upper);
    }
    const BoundResult chernoff = chernoff_tail(plan.n_windows, a_pos);
    report.rows.push_back(make_tail_row(a, exceed, counts.size(), theorem, refined, corollary,
                                        chernoff));
  }
  return report;
}

}  // namespace depbound
