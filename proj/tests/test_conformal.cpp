#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <vector>

#include "confgate/conformal.hpp"
#include "confgate/errors.hpp"
#include "confgate/rng.hpp"

using namespace confgate;

namespace {

ResidualBag bag_of(std::vector<double> values, int batch_id = 0) {
  ResidualBag bag;
  bag.batch_ids.assign(values.size(), batch_id);
  bag.values = std::move(values);
  bag.base_size = 1;
  return bag;
}

std::vector<ResidualBag> bags_of(const std::vector<std::vector<double>>& vs) {
  std::vector<ResidualBag> bags;
  for (std::size_t j = 0; j < vs.size(); ++j) {
    bags.push_back(bag_of(vs[j], static_cast<int>(j)));
  }
  return bags;
}

// Cluster mass just above the bbucp quantile level, rare severe outliers
// above it: the regime where a one-batch split quantile is whipped around by
// outliers while the pooled adjusted quantile stays inside the cluster.
std::vector<ResidualBag> heavy_tailed_bags(SplitMix64& rng, std::size_t j,
                                           std::size_t i) {
  std::vector<std::vector<double>> values(j, std::vector<double>(i));
  for (auto& bag : values) {
    for (double& v : bag) {
      if (rng.next_double() < 0.94) {
        v = 0.1 + 0.2 * rng.next_double();
      } else {
        v = 0.6 + 0.35 * rng.next_double();
      }
    }
  }
  return bags_of(values);
}

}  // namespace

TEST_CASE("quantile follows the ceil(level*m) convention") {
  const auto bag = bag_of({0.1, 0.2, 0.3, 0.4});
  CHECK(quantile(bag, 0.5) == 0.2);
  CHECK(quantile(bag, 1.0) == 0.4);
  CHECK(quantile(bag_of({0.7}), 0.3) == 0.7);
  CHECK(quantile(bag_of({0.7}), 1.0) == 0.7);
  CHECK_THROWS_AS(quantile(bag_of({}), 0.5), EmptyBag);
  CHECK_THROWS_AS(quantile(bag, 0.0), InvalidConfig);
}

TEST_CASE("split_ucp index arithmetic") {
  const auto nine = bag_of({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  const auto gate = split_ucp(nine, 0.2);  // k = ceil(0.8 * 10) = 8
  CHECK(gate.q == 0.8);
  CHECK(gate.method == GateMethod::split);
  CHECK(gate.alpha == 0.2);

  // k = ceil(0.9 * 5) = 5 > 4: degenerate full-space gate
  CHECK(split_ucp(bag_of({0.1, 0.2, 0.3, 0.4}), 0.1).q == kResidualBound);

  // alpha near 1: k = 1, the minimum
  CHECK(split_ucp(nine, 0.999).q == 0.1);

  CHECK_THROWS_AS(split_ucp(bag_of({}), 0.2), EmptyBag);
}

TEST_CASE("split_ucp degenerates whenever |I2|+1 <= 1/alpha") {
  SplitMix64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t m = 1 + rng.next_below(30);
    const double alpha = 0.01 + 0.3 * rng.next_double();
    std::vector<double> values(m);
    for (double& v : values) v = rng.next_double();
    const auto gate = split_ucp(bag_of(values), alpha);
    const double k = std::ceil((1.0 - alpha) * static_cast<double>(m + 1) - 1e-9);
    if (k > static_cast<double>(m)) {
      CHECK(gate.q == kResidualBound);
    } else {
      CHECK(gate.q <= kResidualBound);
    }
  }
}

TEST_CASE("full_ucp_pvalue ranks the candidate against the pool") {
  const auto pool = bag_of({0.1, 0.2, 0.3});
  CHECK(full_ucp_pvalue(pool, 0.25) == doctest::Approx(0.5));
  CHECK(full_ucp_pvalue(pool, 0.99) == doctest::Approx(0.25));   // 1/(n+1)
  CHECK(full_ucp_pvalue(pool, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("full_ucp_gate reproduces the p-value acceptance region") {
  SplitMix64 rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rng.next_below(40);
    std::vector<double> values(n);
    for (double& v : values) v = rng.next_double();
    const auto pool = bag_of(values);
    const double alpha = 0.02 + 0.6 * rng.next_double();
    const auto gate = full_ucp_gate(pool, alpha);
    for (int s = 0; s < 20; ++s) {
      const double cand = rng.next_double();
      CHECK(apply_gate(gate, cand) == (full_ucp_pvalue(pool, cand) >= alpha));
    }
  }
}

TEST_CASE("bucp: degenerate, interior, and boundary levels") {
  // 1/(J+1) = 0.25 > alpha = 0.2: gate accepts everything
  const auto degenerate = bucp(bags_of({{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}}), 0.2);
  CHECK(degenerate.q == kResidualBound);
  CHECK(degenerate.method == GateMethod::bucp);

  // J=9, I=10, alpha=0.2: level 8/9 of 90 pooled values -> 80th smallest
  std::vector<std::vector<double>> vs;
  for (int j = 0; j < 9; ++j) {
    std::vector<double> bag;
    for (int i = 0; i < 10; ++i) bag.push_back((j * 10 + i + 1) / 100.0);
    vs.push_back(bag);
  }
  CHECK(bucp(bags_of(vs), 0.2).q == doctest::Approx(0.80));

  // J=19, alpha=0.05: delta_J = 0, level 1 -> the pooled maximum
  SplitMix64 rng(4);
  std::vector<std::vector<double>> vs19(19, std::vector<double>(5));
  double max_v = 0.0;
  for (auto& bag : vs19) {
    for (double& v : bag) {
      v = rng.next_double();
      max_v = std::max(max_v, v);
    }
  }
  CHECK(bucp(bags_of(vs19), 0.05).q == max_v);
}

TEST_CASE("bucp rejects inconsistent batch sizes") {
  CHECK_THROWS_AS(bucp(bags_of({{0.1, 0.2}, {0.3}}), 0.3), InconsistentBatchSizes);
  CHECK_THROWS_AS(bucp({}, 0.3), EmptyBag);
}

TEST_CASE("bootstrap_batch resamples with replacement") {
  const auto constant = bootstrap_batch(bag_of({0.5}), 10, 99);
  REQUIRE(constant.size() == 10);
  for (double v : constant.values) CHECK(v == 0.5);

  CHECK_THROWS_AS(bootstrap_batch(bag_of({0.5}), 0, 1), InvalidConfig);
  CHECK_THROWS_AS(bootstrap_batch(bag_of({}), 3, 1), EmptyBag);

  const auto big = bootstrap_batch(bag_of({0.0, 1.0}), 100000, 7);
  const double mean =
      std::accumulate(big.values.begin(), big.values.end(), 0.0) / 100000.0;
  CHECK(mean > 0.49);
  CHECK(mean < 0.51);
}

TEST_CASE("bbucp: constant batches and the K=1 identity") {
  std::vector<std::vector<double>> constant(9, std::vector<double>(4, 0.42));
  CHECK(bbucp(bags_of(constant), 0.2, 50, 11).q == 0.42);
  // delta_J < 0 still degenerates
  std::vector<std::vector<double>> small(3, std::vector<double>(4, 0.42));
  CHECK(bbucp(bags_of(small), 0.2, 50, 11).q == kResidualBound);

  // K=1 equals bucp applied to the per-batch resampled singletons drawn with
  // the same derived seeds.
  SplitMix64 rng(21);
  std::vector<std::vector<double>> vs(9, std::vector<double>(6));
  for (auto& bag : vs)
    for (double& v : bag) v = rng.next_double();
  const auto bags = bags_of(vs);
  const std::uint64_t seed = 1234;
  const auto direct = bbucp(bags, 0.2, 1, seed);
  std::vector<ResidualBag> singletons;
  for (std::size_t j = 0; j < bags.size(); ++j) {
    singletons.push_back(bootstrap_batch(bags[j], 1, derive_seed(seed, j)));
  }
  CHECK(direct.q == bucp(singletons, 0.2).q);
}

TEST_CASE("bbucp needs K >= 1") {
  CHECK_THROWS_AS(bbucp(bags_of({{0.1, 0.2}}), 0.6, 0, 1), InvalidConfig);
}

TEST_CASE("apply_gate is a closed sublevel set") {
  CalibratedGate gate;
  gate.q = 0.3;
  CHECK(apply_gate(gate, 0.3));
  CHECK_FALSE(apply_gate(gate, 0.31));
  gate.q = kResidualBound;
  CHECK(apply_gate(gate, 1.0));
  CHECK(apply_gate(gate, 0.0));
}

TEST_CASE("identical seeds produce bit-identical gates") {
  SplitMix64 rng(5);
  std::vector<std::vector<double>> vs(7, std::vector<double>(5));
  for (auto& bag : vs)
    for (double& v : bag) v = rng.next_double();
  const auto a = bbucp(bags_of(vs), 0.3, 64, 4242);
  const auto b = bbucp(bags_of(vs), 0.3, 64, 4242);
  CHECK(std::memcmp(&a.q, &b.q, sizeof(double)) == 0);
  CHECK(a.seed == b.seed);
}

TEST_CASE("thresholds are monotone: smaller alpha, larger or equal q") {
  SplitMix64 rng(6);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<std::vector<double>> vs(11, std::vector<double>(8));
    for (auto& bag : vs)
      for (double& v : bag) v = rng.next_double();
    const auto bags = bags_of(vs);
    double prev_bucp = kResidualBound + 1, prev_split = kResidualBound + 1;
    ResidualBag pooled;
    for (const auto& b : bags)
      pooled.values.insert(pooled.values.end(), b.values.begin(), b.values.end());
    for (double alpha : {0.05, 0.1, 0.2, 0.3, 0.5}) {
      const double qb = bucp(bags, alpha).q;
      const double qs = split_ucp(pooled, alpha).q;
      CHECK(qb <= prev_bucp);
      CHECK(qs <= prev_split);
      prev_bucp = qb;
      prev_split = qs;
    }
  }
}

TEST_CASE("rank invariance: cubing residuals and scores preserves decisions") {
  SplitMix64 rng(7);
  auto cube = [](double x) { return x * x * x; };
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::vector<double>> vs(6, std::vector<double>(7));
    for (auto& bag : vs)
      for (double& v : bag) v = rng.next_double();
    std::vector<std::vector<double>> cubed = vs;
    for (auto& bag : cubed)
      for (double& v : bag) v = cube(v);

    const double alpha = 0.05 + 0.4 * rng.next_double();
    const std::uint64_t seed = rng.next_u64();

    const auto raw_bucp = bucp(bags_of(vs), alpha);
    const auto cub_bucp = bucp(bags_of(cubed), alpha);
    const auto raw_bb = bbucp(bags_of(vs), alpha, 16, seed);
    const auto cub_bb = bbucp(bags_of(cubed), alpha, 16, seed);

    for (int s = 0; s < 25; ++s) {
      const double score = rng.next_double();
      CHECK(apply_gate(raw_bucp, score) == apply_gate(cub_bucp, cube(score)));
      CHECK(apply_gate(raw_bb, score) == apply_gate(cub_bb, cube(score)));
    }
  }
}

TEST_CASE("bbucp at large K stays within one order statistic of bucp") {
  // All batches share the same bag, so the bootstrap resamples the same
  // multiset; at K = 10^4 the pooled quantile sits within one step of bucp's.
  SplitMix64 rng(8);
  std::vector<double> shared(12);
  for (double& v : shared) v = rng.next_double();
  std::vector<std::vector<double>> vs(9, shared);
  const auto bags = bags_of(vs);

  const double q_bucp = bucp(bags, 0.2).q;
  const double q_bb = bbucp(bags, 0.2, 10000, 3).q;

  std::vector<double> sorted = shared;
  std::sort(sorted.begin(), sorted.end());
  const auto it = std::find(sorted.begin(), sorted.end(), q_bucp);
  REQUIRE(it != sorted.end());
  const std::size_t k = static_cast<std::size_t>(it - sorted.begin());
  std::vector<double> allowed{sorted[k]};
  if (k > 0) allowed.push_back(sorted[k - 1]);
  if (k + 1 < sorted.size()) allowed.push_back(sorted[k + 1]);
  CHECK(std::find(allowed.begin(), allowed.end(), q_bb) != allowed.end());
}

TEST_CASE("split coverage on exchangeable scalars meets the target") {
  SplitMix64 rng(9);
  const double alpha = 0.2;
  const int trials = 600;
  int covered = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> calib(30);
    for (double& v : calib) v = rng.next_double();
    const double test = rng.next_double();
    covered += apply_gate(split_ucp(bag_of(calib), alpha), test);
  }
  const double se = std::sqrt(alpha * (1.0 - alpha) / trials);
  CHECK(static_cast<double>(covered) / trials >= 1.0 - alpha - 4.0 * se);
}

TEST_CASE("heavy-tailed residuals: bbucp threshold beats a one-batch split") {
  SplitMix64 rng(10);
  const int reps = 200;
  double sum_bb = 0.0, sum_split = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const auto bags = heavy_tailed_bags(rng, 49, 20);
    sum_bb += bbucp(bags, 0.1, 200, rng.next_u64()).q;
    sum_split += split_ucp(bags.front(), 0.1).q;
  }
  CHECK(sum_bb / reps < sum_split / reps);
}
