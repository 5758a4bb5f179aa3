#pragma once

// Oracles and estimators that certify the bound inequalities at desk
// scale: exact moments by seed-space enumeration (rational arithmetic),
// Monte Carlo tail estimates with 3-sigma domination checks, and the
// integral identities behind the moment bound's proof.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "depbound/bounds.hpp"
#include "depbound/graph.hpp"
#include "depbound/sampler.hpp"

namespace depbound {

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Exact moments by exhaustive seed enumeration

enum class MomentMethod { exhaustive, monte_carlo };

/// E[(Y-mu)^t] next to the bounds that must dominate it. For the
/// exhaustive method the moment is computed in exact rational arithmetic
/// and `exact_fraction` holds the reduced value.
///
/// twise_bound is the plain t-wise-independence moment bound on all n
/// variables taken as one class; it is a reference column for ensembles,
/// whose dependent sums may legitimately exceed it. refined_bound and
/// headline_bound are the bounds that must dominate.
struct MomentReport {
  int t = 2;
  MomentMethod method = MomentMethod::exhaustive;
  double moment = 0.0;
  std::string exact_fraction;
  BoundResult twise_bound;     // 2 e^(1/(6t)) sqrt(pi t) (n t / e)^(t/2)
  BoundResult refined_bound;   // class-decomposed bound; equals twise_bound when k = 1
  BoundResult headline_bound;  // 2 sqrt(pi t) (k n t)^(t/2)
};

namespace detail {

// Central t-th moment of a sum whose per-seed value is num(coeffs)/den:
//   E[(Y-mu)^t] = sum_s (num_s Q - N)^t / (den^t Q^(t+1)),  Q = prime^t seeds.
template <typename NumFn>
MomentReport exact_moment_impl(const FamilyParams& params, int t_moment, std::uint64_t den,
                               NumFn&& num_fn, const ColorClassSizes& classes,
                               std::uint64_t budget) {
  require_even_order(t_moment);
  namespace mp = boost::multiprecision;
  const std::uint64_t seeds = params.seed_space_size(budget);

  // Two passes over the seed space: totals first, then centered powers.
  mp::cpp_int total = 0;
  for_each_seed(
      params, [&](std::span<const std::uint64_t> coeffs) { total += num_fn(coeffs); }, budget);

  const mp::cpp_int q = seeds;
  mp::cpp_int numerator = 0;
  for_each_seed(
      params,
      [&](std::span<const std::uint64_t> coeffs) {
        mp::cpp_int diff = mp::cpp_int(num_fn(coeffs)) * q - total;
        mp::cpp_int term = 1;
        for (int i = 0; i < t_moment; ++i) term *= diff;
        numerator += term;  // term >= 0 since t is even
      },
      budget);
  mp::cpp_int denominator = 1;
  for (int i = 0; i < t_moment; ++i) denominator *= den;
  for (int i = 0; i < t_moment + 1; ++i) denominator *= q;

  const mp::cpp_rational exact(numerator, denominator);
  MomentReport report;
  report.t = t_moment;
  report.method = MomentMethod::exhaustive;
  report.moment = exact.convert_to<double>();
  report.exact_fraction = exact.str();
  report.twise_bound = moment_bound_twise(classes.total(), t_moment);
  report.refined_bound = refined_moment_bound(classes, t_moment);
  report.headline_bound = headline_moment_bound(classes.sizes.size(), classes.total(), t_moment);
  return report;
}

}  // namespace detail

/// Exact central moment of Y = sum of all m grid-uniform family values.
/// With a single color class the refined bound coincides with the
/// t-wise-independence moment bound it must stay below.
inline MomentReport exact_moment(const FamilyParams& params, int t_moment,
                                 std::uint64_t budget = kDefaultSeedBudget) {
  ColorClassSizes classes{{params.m}};
  return detail::exact_moment_impl(
      params, t_moment, params.prime,
      [&](std::span<const std::uint64_t> coeffs) {
        std::uint64_t num = 0;
        for (std::size_t i = 0; i < params.m; ++i)
          num += poly_eval(coeffs, static_cast<std::uint64_t>(i), params.prime);
        return num;
      },
      classes, budget);
}

inline MomentReport exact_moment(const TwiseFamily& family, int t_moment,
                                 std::uint64_t budget = kDefaultSeedBudget) {
  return exact_moment(family.params(), t_moment, budget);
}

/// Exact central moment of X = sum over the ensemble's vertices; the
/// dominating bounds use the greedy coloring of its dependency graph.
inline MomentReport exact_moment(const DependentEnsemble& e, int t_moment,
                                 std::uint64_t budget = kDefaultSeedBudget) {
  const ColorClassSizes classes = greedy_coloring(e.graph()).class_sizes();
  const FamilyParams params = e.family();
  return detail::exact_moment_impl(
      params, t_moment, e.value_denominator(),
      [&](std::span<const std::uint64_t> coeffs) {
        std::uint64_t num = 0;
        for (const auto& src : e.vertex_map()) {
          std::uint64_t w = poly_eval(coeffs, static_cast<std::uint64_t>(src.index), params.prime);
          if (src.flip) w = params.prime - 1 - w;
          num += e.is_bernoulli() ? (w < *e.bernoulli_numerator() ? 1 : 0) : w;
        }
        return num;
      },
      classes, budget);
}

/// Monte Carlo counterpart of exact_moment (analytic mean, estimated
/// expectation); useful where the seed space is out of budget.
inline MomentReport estimate_moment(const DependentEnsemble& e, int t_moment, std::uint64_t trials,
                                    std::uint64_t master_seed) {
  require_even_order(t_moment);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const double mu = e.mean();
  double acc = 0.0;
  for (std::uint64_t i = 0; i < trials; ++i)
    acc += std::pow(e.draw_sum(derive_seed(master_seed, i)) - mu, t_moment);
  const ColorClassSizes classes = greedy_coloring(e.graph()).class_sizes();
  MomentReport report;
  report.t = t_moment;
  report.method = MomentMethod::monte_carlo;
  report.moment = acc / static_cast<double>(trials);
  report.twise_bound = moment_bound_twise(classes.total(), t_moment);
  report.refined_bound = refined_moment_bound(classes, t_moment);
  report.headline_bound = headline_moment_bound(classes.sizes.size(), classes.total(), t_moment);
  return report;
}

/// Exact tail probabilities Pr[|X - mu| >= a] by seed enumeration, one
/// entry per grid point (same order as a_grid).
inline std::vector<double> exact_tail(const DependentEnsemble& e, std::span<const double> a_grid,
                                      std::uint64_t budget = kDefaultSeedBudget) {
  const FamilyParams params = e.family();
  const std::uint64_t seeds = params.seed_space_size(budget);
  const std::uint64_t den = e.value_denominator();
  const double mu = e.mean();
  std::vector<std::uint64_t> hits(a_grid.size(), 0);
  for_each_seed(
      params,
      [&](std::span<const std::uint64_t> coeffs) {
        std::uint64_t num = 0;
        for (const auto& src : e.vertex_map()) {
          std::uint64_t w = poly_eval(coeffs, static_cast<std::uint64_t>(src.index), params.prime);
          if (src.flip) w = params.prime - 1 - w;
          num += e.is_bernoulli() ? (w < *e.bernoulli_numerator() ? 1 : 0) : w;
        }
        const double dev = std::abs(static_cast<double>(num) / static_cast<double>(den) - mu);
        for (std::size_t i = 0; i < a_grid.size(); ++i)
          if (dev >= a_grid[i]) hits[i]++;
      },
      budget);
  std::vector<double> out(a_grid.size());
  for (std::size_t i = 0; i < a_grid.size(); ++i)
    out[i] = static_cast<double>(hits[i]) / static_cast<double>(seeds);
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo tail reports

/// One grid point of an experiment: the empirical tail frequency with its
/// binomial standard error next to every applicable bound.
struct TailRow {
  double a = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  BoundResult theorem;
  BoundResult refined;
  std::optional<BoundResult> corollary;
  BoundResult chernoff;
  bool violation = false;
};

struct ExperimentReport {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<TailRow> rows;

  std::size_t violation_count() const {
    std::size_t v = 0;
    for (const auto& row : rows) v += row.violation ? 1 : 0;
    return v;
  }
};

/// Assembles a row from an exceedance count; flags a violation when the
/// empirical frequency exceeds any applicable bound by more than 3 sigma.
inline TailRow make_tail_row(double a, std::uint64_t exceed_count, std::uint64_t trials,
                             BoundResult theorem, BoundResult refined,
                             std::optional<BoundResult> corollary, BoundResult chernoff) {
  TailRow row;
  row.a = a;
  row.empirical = static_cast<double>(exceed_count) / static_cast<double>(trials);
  row.std_error = std::sqrt(row.empirical * (1.0 - row.empirical) / static_cast<double>(trials));
  row.theorem = theorem;
  row.refined = refined;
  row.corollary = corollary;
  row.chernoff = chernoff;
  double tightest = std::min(theorem.value, refined.value);
  if (corollary) tightest = std::min(tightest, corollary->value);
  row.violation = row.empirical - 3.0 * row.std_error > tightest;
  return row;
}

namespace detail {

inline std::vector<std::uint64_t> count_exceedances(const DependentEnsemble& e,
                                                    std::span<const double> a_grid,
                                                    std::uint64_t trials, std::uint64_t master_seed,
                                                    unsigned threads) {
  const double mu = e.mean();
  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(trials, 64))));
  std::vector<std::vector<std::uint64_t>> partial(workers,
                                                  std::vector<std::uint64_t>(a_grid.size(), 0));
  // Trial seeds depend only on (master_seed, index): totals are identical
  // for any worker count.
  auto run_range = [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      const double dev = std::abs(e.draw_sum(derive_seed(master_seed, i)) - mu);
      for (std::size_t j = 0; j < a_grid.size(); ++j)
        if (dev >= a_grid[j]) partial[w][j]++;
    }
  };
  if (workers == 1) {
    run_range(0, 0, trials);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = w * chunk;
      const std::uint64_t end = std::min<std::uint64_t>(trials, begin + chunk);
      pool.emplace_back(run_range, w, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  std::vector<std::uint64_t> counts(a_grid.size(), 0);
  for (const auto& part : partial)
    for (std::size_t j = 0; j < a_grid.size(); ++j) counts[j] += part[j];
  return counts;
}

}  // namespace detail

/// Monte Carlo tail frequencies of |X - mu| >= a over an ascending a-grid
/// with the theorem, refined, corollary (Bernoulli ensembles), and
/// Chernoff-reference bounds attached. mu is analytic, never estimated.
inline ExperimentReport estimate_tail(const DependentEnsemble& e, std::vector<double> a_grid,
                                      std::uint64_t trials, std::uint64_t master_seed,
                                      unsigned threads = 1) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int t = e.family().t;
  require_even_order(t);
  std::sort(a_grid.begin(), a_grid.end());
  for (double a : a_grid)
    if (!(a >= 0.0)) throw std::invalid_argument("a-grid entries must be >= 0");

  const std::size_t n = e.vertex_count();
  const Coloring coloring = greedy_coloring(e.graph());
  const ColorClassSizes classes = coloring.class_sizes();
  const std::vector<std::uint64_t> counts =
      detail::count_exceedances(e, a_grid, trials, master_seed, threads);

  ExperimentReport report;
  for (std::size_t i = 0; i < a_grid.size(); ++i) {
    const double a = a_grid[i];
    // Degenerate a = 0 rows keep the almost-sure event well-defined.
    const double a_pos = a > 0.0 ? a : std::numeric_limits<double>::min();
    const BoundResult theorem = combined_tail_bound(TailQuery{n, t, a_pos, coloring.k});
    const BoundResult refined =
        markov_tail_from_moment(refined_moment_bound(classes, t), t, a_pos);
    std::optional<BoundResult> corollary;
    if (e.is_bernoulli()) {
      const std::uint64_t p_num = *e.bernoulli_numerator();
      if (p_num > 0 && p_num < e.family().prime) {
        const double p =
            static_cast<double>(p_num) / static_cast<double>(e.family().prime);
        const double a_rel = a_pos / (p * static_cast<double>(n));
        corollary = bernoulli_tail_bound(
            BernoulliQuery{n, e.graph().max_degree(), t, p, a_rel}, TailSide::upper);
      }
    }
    const BoundResult chernoff = chernoff_tail(n, a_pos);
    report.rows.push_back(make_tail_row(a, counts[i], trials, theorem, refined, corollary, chernoff));
  }
  return report;
}

/// CSV schema shared by all experiment outputs. Config entries are echoed
/// first as `# key=value` comment lines; rows are in ascending a order.
inline void write_csv(std::ostream& out, const ExperimentReport& report) {
  for (const auto& [key, value] : report.config) out << "# " << key << '=' << value << '\n';
  out << "a,empirical,stderr,bound_theorem,bound_refined,bound_corollary,bound_chernoff,"
         "vacuous,violation\n";
  for (const TailRow& row : report.rows) {
    out << format_number(row.a) << ',' << format_number(row.empirical) << ','
        << format_number(row.std_error) << ',' << format_number(row.theorem.value) << ','
        << format_number(row.refined.value) << ','
        << (row.corollary ? format_number(row.corollary->value) : std::string()) << ','
        << format_number(row.chernoff.value) << ',' << (row.theorem.vacuous ? 1 : 0) << ','
        << (row.violation ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Identity checks behind the moment bound's proof

/// Finite distribution on nonnegative reals.
struct DiscreteDistribution {
  std::vector<double> values;
  std::vector<double> probs;

  void validate() const {
    if (values.empty() || values.size() != probs.size())
      throw std::invalid_argument("distribution needs matching nonempty values/probs");
    double total = 0.0;
    for (double v : values)
      if (v < 0.0) throw std::invalid_argument("support must be nonnegative");
    for (double p : probs) {
      if (p < 0.0) throw std::invalid_argument("probabilities must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
  }
};

/// Checks E[Z] = integral_0^inf Pr[Z >= x] dx by exact piecewise
/// evaluation of the right-hand side.
inline bool integral_identity_check(const DiscreteDistribution& dist) {
  dist.validate();
  std::vector<std::pair<double, double>> atoms(dist.values.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) atoms[i] = {dist.values[i], dist.probs[i]};
  std::sort(atoms.begin(), atoms.end());

  double expectation = 0.0;
  for (const auto& [v, p] : atoms) expectation += v * p;

  // Pr[Z >= x] is the suffix mass at the next atom, constant between atoms.
  double integral = 0.0;
  double tail = 1.0;
  double prev = 0.0;
  for (const auto& [v, p] : atoms) {
    integral += (v - prev) * tail;
    tail -= p;
    prev = v;
  }
  return std::abs(expectation - integral) <= 1e-12 * std::max(1.0, std::abs(expectation));
}

/// For each even t: the factorial-side Stirling bound
///   (t/2)! <= e^(1/(6t)) sqrt(pi t) (t/(2e))^(t/2)
/// and the Gamma identity integral_0^inf x^(t/2-1) e^-x dx = (t/2-1)!
/// (quadrature vs exact factorial, relative error <= 1e-8).
inline bool stirling_gamma_check(std::span<const int> t_grid) {
  for (int t : t_grid) {
    require_even_order(t);
    const double td = t;
    const double half = td / 2.0;
    const double log_factorial = std::lgamma(half + 1.0);
    const double log_bound =
        1.0 / (6.0 * td) + 0.5 * std::log(std::numbers::pi * td) + half * (std::log(half) - 1.0);
    if (log_factorial > log_bound) return false;

    boost::math::quadrature::exp_sinh<double> integrator;
    // x^k e^-x evaluated in log space: the naive product hits inf * 0 at
    // the far tail of the double-exponential abscissas.
    const double k = half - 1.0;
    const double quad = integrator.integrate(
        [&](double x) { return k == 0.0 ? std::exp(-x) : std::exp(k * std::log(x) - x); });
    const double exact = std::tgamma(half);  // (t/2-1)! for integer t/2
    if (std::abs(quad - exact) > 1e-8 * exact) return false;
  }
  return true;
}

/// Change-of-variables step inside the moment bound's proof:
///   2 integral_0^inf e^(-x^(2/t)/(2m)) dx
///     = 2 (t/2) (2m)^(t/2) integral_0^inf x^(t/2-1) e^-x dx,
/// verified by quadrature on both sides (relative error <= 1e-6).
inline bool chernoff_consistency_check(std::span<const std::size_t> m_grid,
                                       std::span<const int> t_grid) {
  for (std::size_t m : m_grid) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    for (int t : t_grid) {
      require_even_order(t);
      const double td = t;
      const double md = static_cast<double>(m);
      boost::math::quadrature::exp_sinh<double> integrator;
      const double lhs = 2.0 * integrator.integrate([&](double x) {
        return std::exp(-std::pow(x, 2.0 / td) / (2.0 * md));
      });
      const double k = td / 2.0 - 1.0;
      const double gamma_integral = integrator.integrate(
          [&](double x) { return k == 0.0 ? std::exp(-x) : std::exp(k * std::log(x) - x); });
      const double rhs = 2.0 * (td / 2.0) * std::pow(2.0 * md, td / 2.0) * gamma_integral;
      if (std::abs(lhs - rhs) > 1e-6 * std::max(lhs, rhs)) return false;
    }
  }
  return true;
}

}  // namespace depbound
