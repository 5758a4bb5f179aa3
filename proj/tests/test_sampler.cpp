#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>
#include <vector>

#include "depbound/sampler.hpp"

using namespace depbound;

namespace {

// Exhaustive joint distribution of the family values at the given
// indices: counts per value tuple over all prime^t seeds.
std::map<std::vector<std::uint64_t>, std::uint64_t> joint_counts(
    const FamilyParams& params, const std::vector<std::size_t>& indices) {
  std::map<std::vector<std::uint64_t>, std::uint64_t> counts;
  for_each_seed(params, [&](std::span<const std::uint64_t> coeffs) {
    std::vector<std::uint64_t> key;
    key.reserve(indices.size());
    for (std::size_t i : indices)
      key.push_back(poly_eval(coeffs, static_cast<std::uint64_t>(i), params.prime));
    counts[key]++;
  });
  return counts;
}

// Exhaustive covariance of the Bernoulli values at two vertices.
double exhaustive_covariance(const DependentEnsemble& e, std::size_t u, std::size_t v) {
  const FamilyParams params = e.family();
  double sum_u = 0.0, sum_v = 0.0, sum_uv = 0.0;
  std::uint64_t seeds = 0;
  for_each_seed(params, [&](std::span<const std::uint64_t> coeffs) {
    const TwiseFamily fam(params, std::vector<std::uint64_t>(coeffs.begin(), coeffs.end()));
    const double xu = e.vertex_value(fam, u);
    const double xv = e.vertex_value(fam, v);
    sum_u += xu;
    sum_v += xv;
    sum_uv += xu * xv;
    seeds++;
  });
  const double n = static_cast<double>(seeds);
  return sum_uv / n - (sum_u / n) * (sum_v / n);
}

}  // namespace

TEST_CASE("family construction is deterministic and picks the smallest prime") {
  const TwiseFamily a(5, 2, 42), b(5, 2, 42);
  REQUIRE(a.coefficients() == b.coefficients());
  REQUIRE(a.prime() == 5);  // max(5, 4) -> 5 already prime

  REQUIRE(TwiseFamily(5, 3, 1).prime() == 7);   // max(5, 6) -> 7
  REQUIRE(TwiseFamily(1, 1, 1).prime() == 2);
  REQUIRE(TwiseFamily(8, 2, 1).prime() == 11);  // next prime >= 8

  const TwiseFamily c(5, 2, 43);
  REQUIRE(a.coefficients() != c.coefficients());  // different seed, different family

  REQUIRE_THROWS_AS(FamilyParams({5, 2, 6}).validate(), std::invalid_argument);
  REQUIRE_THROWS_AS(FamilyParams({5, 2, 3}).validate(), std::invalid_argument);
  REQUIRE_THROWS_AS(TwiseFamily(FamilyParams{2, 2, 5}, {1, 2, 3}), std::invalid_argument);
  REQUIRE_THROWS_AS(TwiseFamily(FamilyParams{2, 2, 5}, {1, 7}), std::invalid_argument);
}

TEST_CASE("degenerate families") {
  SECTION("t = 1 is a constant polynomial: all values equal") {
    const TwiseFamily f(4, 1, 99);
    for (std::size_t i = 1; i < 4; ++i) REQUIRE(f.field_value(i) == f.field_value(0));
  }

  SECTION("zero coefficients give the zero variable") {
    const TwiseFamily f(FamilyParams{4, 2, 5}, {0, 0});
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(f.sample_uniform(i) == 0.0);
  }

  SECTION("index range is enforced") {
    const TwiseFamily f(4, 2, 7);
    REQUIRE_THROWS_AS(f.field_value(4), std::out_of_range);
    REQUIRE_THROWS_AS(f.sample_bernoulli(0, f.prime() + 1), std::invalid_argument);
  }
}

TEST_CASE("pairs from a t=2 family are exactly uniform over all seeds") {
  const FamilyParams params{5, 2, 5};
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i + 1; j < 5; ++j) {
      const auto counts = joint_counts(params, {i, j});
      REQUIRE(counts.size() == 25);  // all 25 value pairs reached
      for (const auto& [key, count] : counts) REQUIRE(count == 1);
    }
  }
}

TEST_CASE("exact t-wise independence across the small-prime grid", "[property]") {
  // For prime <= 7, t <= 3, m = prime: every size-t subset's joint
  // distribution over all prime^t seeds is the uniform product (each
  // value tuple hit exactly once, as #seeds = #tuples).
  for (std::uint64_t prime : {2ULL, 3ULL, 5ULL, 7ULL}) {
    for (int t = 1; t <= 3 && static_cast<std::uint64_t>(t) <= prime; ++t) {
      const FamilyParams params{static_cast<std::size_t>(prime), t, prime};
      std::vector<std::size_t> subset(static_cast<std::size_t>(t));
      auto check_subsets = [&](auto&& self, std::size_t depth, std::size_t start) -> void {
        if (depth == subset.size()) {
          const auto counts = joint_counts(params, subset);
          std::uint64_t cells = 1;
          for (int i = 0; i < t; ++i) cells *= prime;
          REQUIRE(counts.size() == cells);
          for (const auto& [key, count] : counts) REQUIRE(count == 1);
          return;
        }
        for (std::size_t i = start; i < params.m; ++i) {
          subset[depth] = i;
          self(self, depth + 1, i + 1);
        }
      };
      check_subsets(check_subsets, 0, 0);
    }
  }
}

TEST_CASE("triples from a t=2 family are not 3-wise independent") {
  const FamilyParams params{5, 2, 5};
  const auto counts = joint_counts(params, {0, 1, 2});
  // 25 seeds cannot cover 125 cells; a degree-1 polynomial pins the third
  // value once two are fixed.
  REQUIRE(counts.size() == 25);
  for (const auto& [key, count] : counts) REQUIRE(count == 1);
}

TEST_CASE("threshold Bernoulli marginals and pairs are exact") {
  const FamilyParams params{5, 2, 5};
  const std::uint64_t p_num = 2;

  std::uint64_t ones = 0, pairs11 = 0, seeds = 0;
  for_each_seed(params, [&](std::span<const std::uint64_t> coeffs) {
    const TwiseFamily fam(params, std::vector<std::uint64_t>(coeffs.begin(), coeffs.end()));
    ones += fam.sample_bernoulli(0, p_num);
    pairs11 += fam.sample_bernoulli(1, p_num) * fam.sample_bernoulli(3, p_num);
    seeds++;
  });
  REQUIRE(seeds == 25);
  REQUIRE(ones == 10);     // P(1) = 2/5 exactly
  REQUIRE(pairs11 == 4);   // P(1,1) = 4/25 exactly

  SECTION("degenerate thresholds") {
    const TwiseFamily fam(5, 2, 7);
    for (std::size_t i = 0; i < 5; ++i) {
      REQUIRE(fam.sample_bernoulli(i, 0) == 0);
      REQUIRE(fam.sample_bernoulli(i, fam.prime()) == 1);
    }
  }
}

TEST_CASE("uniform samples stay on the [0,1) grid") {
  const TwiseFamily f(7, 3, 5);
  for (std::size_t i = 0; i < 7; ++i) {
    const double y = f.sample_uniform(i);
    REQUIRE(y >= 0.0);
    REQUIRE(y < 1.0);
    REQUIRE(std::abs(y * static_cast<double>(f.prime()) -
                     static_cast<double>(f.field_value(i))) < 1e-9);  // on the 1/prime grid
  }
}

TEST_CASE("clique ensembles") {
  SECTION("block_size = 1 has no edges and trivially t-agrees") {
    const DependentEnsemble e = make_clique_ensemble(4, 1, 2, 2, 11);
    REQUIRE(e.graph().edge_count() == 0);
    REQUIRE(verify_t_agreement(e, 2));
  }

  SECTION("shared block value: adjacent Bernoulli pair has correlation 1") {
    const DependentEnsemble e = make_clique_ensemble(2, 2, 2, 2, 5, FlipPattern::none);
    const double cov = exhaustive_covariance(e, 0, 1);
    const double p = 2.0 / static_cast<double>(e.family().prime);
    REQUIRE(std::abs(cov - p * (1.0 - p)) < 1e-12);  // Cov = Var => correlation 1
  }

  SECTION("alternating flip with p = 1/2 gives correlation -1") {
    // prime 2 realizes p_num/prime = 1/2 exactly (t = 1, one block)
    const DependentEnsemble e =
        make_clique_ensemble(CliqueEnsembleSpec{1, 2, 1, 2, 1, FlipPattern::alternating, 3});
    const double cov = exhaustive_covariance(e, 0, 1);
    REQUIRE(std::abs(cov - (-0.25)) < 1e-12);  // -Var for a fair bit
  }

  SECTION("alternating flip is negatively correlated for any bias") {
    const DependentEnsemble e =
        make_clique_ensemble(2, 2, 2, 2, 5, FlipPattern::alternating);
    REQUIRE(exhaustive_covariance(e, 0, 1) < 0.0);
  }

  SECTION("dependence witness: |covariance| at least 0.9 of theoretical") {
    // shared pair: Cov = p(1-p); flipped pair with 2 p_num <= prime: Cov = -p^2
    for (FlipPattern flips : {FlipPattern::none, FlipPattern::alternating}) {
      const DependentEnsemble e = make_clique_ensemble(3, 2, 2, 2, 17, flips);
      const double p = 2.0 / static_cast<double>(e.family().prime);
      const double expected = flips == FlipPattern::none ? p * (1.0 - p) : p * p;
      bool witness = false;
      for (std::size_t v = 0; v < e.vertex_count() && !witness; ++v)
        for (std::size_t u : e.graph().neighbors(v))
          if (std::abs(exhaustive_covariance(e, v, u)) >= 0.9 * expected) {
            witness = true;
            break;
          }
      REQUIRE(witness);
    }
  }
}

TEST_CASE("draw_sum") {
  SECTION("blocks move together: sums are multiples of block_size") {
    const DependentEnsemble e = make_clique_ensemble(4, 3, 2, 3, 21);
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
      const double x = e.draw_sum(derive_seed(21, trial));
      REQUIRE(x == 3.0 * std::floor(x / 3.0 + 0.5));
    }
  }

  SECTION("p_num = prime forces X = n") {
    const DependentEnsemble e = make_clique_ensemble(3, 2, 2, 5 /* = prime */, 9);
    REQUIRE(e.family().prime == 5);
    for (std::uint64_t trial = 0; trial < 20; ++trial)
      REQUIRE(e.draw_sum(derive_seed(9, trial)) == 6.0);
  }

  SECTION("exhaustive mean equals n * p_num / prime") {
    const DependentEnsemble e = make_clique_ensemble(3, 2, 2, 2, 1, FlipPattern::alternating);
    const FamilyParams params = e.family();
    double total = 0.0;
    std::uint64_t seeds = 0;
    for_each_seed(params, [&](std::span<const std::uint64_t> coeffs) {
      const TwiseFamily fam(params, std::vector<std::uint64_t>(coeffs.begin(), coeffs.end()));
      total += static_cast<double>(e.sum_numerator(fam));
      seeds++;
    });
    REQUIRE(total / static_cast<double>(seeds) == 6.0 * 2.0 / 5.0);
    REQUIRE(e.mean() == 6.0 * 2.0 / 5.0);
  }

  SECTION("determinism: same seed, same sum") {
    const DependentEnsemble e = make_clique_ensemble(5, 3, 4, 3, 77);
    for (std::uint64_t s : {0ULL, 1ULL, 987654321ULL})
      REQUIRE(e.draw_sum(s) == e.draw_sum(s));
  }
}

TEST_CASE("t-agreement verification") {
  SECTION("clique ensembles pass") {
    REQUIRE(verify_t_agreement(make_clique_ensemble(3, 2, 2, 2, 4), 2));
    REQUIRE(verify_t_agreement(make_clique_ensemble(2, 3, 2, 1, 4, FlipPattern::alternating), 2));
    REQUIRE(verify_t_agreement(make_clique_ensemble(3, 1, 2, std::nullopt, 4), 2));  // uniform
  }

  SECTION("adversarial ensemble fails: edgeless graph sharing a family index") {
    const FamilyParams params = FamilyParams::choose(2, 2);
    std::vector<DependentEnsemble::VertexSource> map{{0, false}, {0, false}};
    const DependentEnsemble bad(DependencyGraph(2), params, std::move(map), 2);
    REQUIRE_FALSE(verify_t_agreement(bad, 2));
  }

  SECTION("singleton-only checks always pass") {
    const FamilyParams params = FamilyParams::choose(2, 2);
    std::vector<DependentEnsemble::VertexSource> map{{0, false}, {0, false}};
    const DependentEnsemble bad(DependencyGraph(2), params, std::move(map), 2);
    REQUIRE(verify_t_agreement(bad, 1));
  }

  SECTION("budget exceeded is an explicit signal, not false") {
    const DependentEnsemble e = make_clique_ensemble(3, 2, 8, 2, 4);  // 17^8 seeds
    REQUIRE_THROWS_AS(verify_t_agreement(e, 2), budget_error);
  }
}

TEST_CASE("ensemble descriptor round trip") {
  CliqueEnsembleSpec spec;
  spec.blocks = 20;
  spec.block_size = 5;
  spec.t = 4;
  spec.prime = 23;
  spec.p_num = 12;
  spec.flips = FlipPattern::alternating;
  spec.master_seed = 20260810;

  std::ostringstream out;
  write_ensemble_descriptor(out, spec);
  const CliqueEnsembleSpec back = parse_ensemble_descriptor(out.str());
  REQUIRE(back.blocks == spec.blocks);
  REQUIRE(back.block_size == spec.block_size);
  REQUIRE(back.t == spec.t);
  REQUIRE(back.prime == spec.prime);
  REQUIRE(back.p_num == spec.p_num);
  REQUIRE(back.flips == spec.flips);
  REQUIRE(back.master_seed == spec.master_seed);

  REQUIRE(parse_ensemble_descriptor("p_num=none\n").p_num == std::nullopt);
  REQUIRE_THROWS_AS(parse_ensemble_descriptor("nonsense\n"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_ensemble_descriptor("frobs=3\n"), std::invalid_argument);
}

TEST_CASE("seed utilities") {
  REQUIRE(derive_seed(1, 2) == derive_seed(1, 2));
  REQUIRE(derive_seed(1, 2) != derive_seed(1, 3));
  REQUIRE(derive_seed(1, 2) != derive_seed(2, 2));

  std::mt19937_64 rng(7);
  for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 23ULL, 1000003ULL}) {
    for (int i = 0; i < 200; ++i) REQUIRE(uniform_below(rng, bound) < bound);
  }

  REQUIRE(is_prime(2));
  REQUIRE(is_prime(23));
  REQUIRE_FALSE(is_prime(1));
  REQUIRE_FALSE(is_prime(21));
  REQUIRE(next_prime_at_least(20) == 23);
  REQUIRE(next_prime_at_least(5) == 5);
}
