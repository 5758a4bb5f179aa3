#pragma once

// Closed-form tail and moment bounds for sums of [0,1]-valued random
// variables whose dependencies follow a graph with bounded chromatic
// number, while independent sets remain t-wise independent.
//
// All bounds are evaluated in natural-log space: the linear quantities
// (n*t*chi)^(t/2) overflow double precision already for moderate t, so
// log_value is the primary representation and the linear value is
// materialized on demand.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace depbound {

/// A bound carried in log-space. `value` may exceed 1 (vacuous) or
/// overflow to +inf; `clamped` is the [0,1] view usable as a probability.
struct BoundResult {
  double log_value = 0.0;
  double value = 1.0;
  double clamped = 1.0;
  bool vacuous = true;

  static BoundResult from_log(double log_value) {
    BoundResult r;
    r.log_value = log_value;
    r.value = std::exp(log_value);
    r.clamped = r.value < 1.0 ? r.value : 1.0;
    r.vacuous = log_value >= 0.0;
    return r;
  }
};

inline void require_even_order(int t) {
  if (t < 2 || t % 2 != 0)
    throw std::invalid_argument("t must be a positive even integer");
}

/// Deviation query for the dependency-graph tail bound: sum of n
/// variables in [0,1], independence order t (even), absolute deviation a,
/// chromatic number (or any upper bound) chi.
struct TailQuery {
  std::size_t n = 1;
  int t = 2;
  double a = 1.0;
  std::size_t chi = 1;

  void validate() const {
    require_even_order(t);
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(a > 0.0)) throw std::invalid_argument("a must be > 0");
    if (chi < 1 || chi > n) throw std::invalid_argument("chi must be in [1, n]");
  }
};

/// Relative-deviation query for Bernoulli(p) sums on a graph of maximum
/// degree d. The event is X >= (1+a)pn (or X <= (1-a)pn).
struct BernoulliQuery {
  std::size_t n = 1;
  std::size_t d = 0;
  int t = 2;
  double p = 0.5;
  double a = 1.0;

  void validate() const {
    require_even_order(t);
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie strictly inside (0,1)");
    if (!(a > 0.0)) throw std::invalid_argument("a must be > 0");
  }
};

enum class TailSide { upper, lower };

/// Sizes |V_1|,...,|V_k| of the color classes of a proper coloring.
struct ColorClassSizes {
  std::vector<std::size_t> sizes;

  std::size_t total() const {
    std::size_t n = 0;
    for (std::size_t s : sizes) n += s;
    return n;
  }

  void validate() const {
    if (sizes.empty()) throw std::invalid_argument("class-size list must be nonempty");
    for (std::size_t s : sizes)
      if (s < 1) throw std::invalid_argument("class sizes must be >= 1");
  }
};

/// Moment bound for a sum Y of m t-wise independent [0,1] variables:
///   E[(Y-mu)^t] < 2 * e^(1/(6t)) * sqrt(pi t) * (m t / e)^(t/2).
inline BoundResult moment_bound_twise(std::size_t m, int t) {
  require_even_order(t);
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  const double td = t;
  const double lv = std::log(2.0) + 1.0 / (6.0 * td) + 0.5 * std::log(std::numbers::pi * td) +
                    0.5 * td * (std::log(static_cast<double>(m)) + std::log(td) - 1.0);
  return BoundResult::from_log(lv);
}

/// Two-sided Chernoff reference: Pr[|Y-mu| > a] < 2 e^(-a^2 / 2m) for a
/// sum of m independent [0,1] variables.
inline BoundResult chernoff_tail(std::size_t m, double a) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (a < 0.0) throw std::invalid_argument("a must be >= 0");
  return BoundResult::from_log(std::log(2.0) - a * a / (2.0 * static_cast<double>(m)));
}

/// Headline tail bound: Pr[|X-mu| >= a] < 2 sqrt(pi t) (sqrt(n t chi)/a)^t.
inline BoundResult combined_tail_bound(const TailQuery& q) {
  q.validate();
  const double td = q.t;
  const double lv = std::log(2.0) + 0.5 * std::log(std::numbers::pi * td) +
                    td * (0.5 * std::log(static_cast<double>(q.n) * td * static_cast<double>(q.chi)) -
                          std::log(q.a));
  return BoundResult::from_log(lv);
}

/// Bernoulli corollary: Pr[X >= (1+a)pn] < 2 sqrt(pi t) (sqrt((d+1)t)/(a p sqrt(n)))^t.
/// The same expression bounds the lower tail; `side` only labels the event.
inline BoundResult bernoulli_tail_bound(const BernoulliQuery& q, TailSide side) {
  (void)side;  // the bound is side-independent
  q.validate();
  const double td = q.t;
  const double lv = std::log(2.0) + 0.5 * std::log(std::numbers::pi * td) +
                    td * (0.5 * std::log(static_cast<double>(q.d + 1) * td) - std::log(q.a) -
                          std::log(q.p) - 0.5 * std::log(static_cast<double>(q.n)));
  return BoundResult::from_log(lv);
}

/// Headline moment bound after the Cauchy-Schwarz step:
///   E[(X-mu)^t] < 2 sqrt(pi t) (k n t)^(t/2)
/// for n variables split into k color classes.
inline BoundResult headline_moment_bound(std::size_t k, std::size_t n, int t) {
  require_even_order(t);
  if (k < 1 || n < 1) throw std::invalid_argument("k and n must be >= 1");
  const double td = t;
  const double lv = std::log(2.0) + 0.5 * std::log(std::numbers::pi * td) +
                    0.5 * td * std::log(static_cast<double>(k) * static_cast<double>(n) * td);
  return BoundResult::from_log(lv);
}

/// Moment bound with the Jensen weights left in place of the headline
/// constant:
///   E[(X-mu)^t] < 2 e^(1/(6t)) sqrt(pi t) (t/e)^(t/2) (sum_j sqrt(|V_j|))^t.
/// Always at most headline_moment_bound(k, n, t) for classes summing to n.
inline BoundResult refined_moment_bound(const ColorClassSizes& classes, int t) {
  require_even_order(t);
  classes.validate();
  double sum_sqrt = 0.0;
  for (std::size_t s : classes.sizes) sum_sqrt += std::sqrt(static_cast<double>(s));
  const double td = t;
  const double lv = std::log(2.0) + 1.0 / (6.0 * td) + 0.5 * std::log(std::numbers::pi * td) +
                    0.5 * td * (std::log(td) - 1.0) + td * std::log(sum_sqrt);
  return BoundResult::from_log(lv);
}

/// Markov step: Pr[|X-mu| >= a] <= E[(X-mu)^t] / a^t for even t.
inline BoundResult markov_tail_from_moment(const BoundResult& moment_bound, int t, double a) {
  require_even_order(t);
  if (!(a > 0.0)) throw std::invalid_argument("a must be > 0");
  return BoundResult::from_log(moment_bound.log_value - t * std::log(a));
}

struct OptimalOrder {
  int t_best;
  BoundResult bound;
};

/// Scans even t in {2, 4, ..., t_max} and returns the order minimizing the
/// tail bound. With `jensen_refinement` present the refined-moment/Markov
/// composition is minimized instead of the headline bound. Ties break
/// toward smaller t, which demands less independence from the input.
inline OptimalOrder optimize_t(std::size_t n, std::size_t chi, double a, int t_max,
                               const std::optional<ColorClassSizes>& jensen_refinement = {}) {
  if (t_max < 2) throw std::invalid_argument("t_max must be >= 2");
  if (t_max % 2 != 0) throw std::invalid_argument("t_max must be even");
  std::optional<OptimalOrder> best;
  for (int t = 2; t <= t_max; t += 2) {
    BoundResult b;
    if (jensen_refinement)
      b = markov_tail_from_moment(refined_moment_bound(*jensen_refinement, t), t, a);
    else
      b = combined_tail_bound(TailQuery{n, t, a, chi});
    if (!best || b.log_value < best->bound.log_value) best = OptimalOrder{t, b};
  }
  return *best;
}

}  // namespace depbound
