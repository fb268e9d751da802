#include <cmath>
#include <map>

#include "coreset/clustering.hpp"
#include "coreset/oracles.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace coreset;

namespace {

/// k tight planar blobs centred at well-separated locations, points interleaved in random order.
Matrix blobs(Index per, Index k, double sep, double spread, SeededRng& rng) {
  Matrix P(per * k, 2);
  for (Index c = 0; c < k; ++c)
    for (Index i = 0; i < per; ++i) {
      P(c * per + i, 0) = sep * static_cast<double>(c) + spread * rng.normal();
      P(c * per + i, 1) = sep * static_cast<double>(c % 2) + spread * rng.normal();
    }
  // Fisher–Yates shuffle of rows.
  for (Index i = P.rows() - 1; i > 0; --i) {
    const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    P.row(i).swap(P.row(j));
  }
  return P;
}

}  // namespace

TEST_CASE("identical points open one center at zero cost") {
  Matrix P = Matrix::Ones(25, 3);
  SeededRng rng(1);
  const OnlineClusterer oc = online_cluster(P, 2, 2.0, 1.0, rng);
  CHECK(oc.centers().size() == 1);
  CHECK(oc.total_cost() == 0.0);
  for (Index a : oc.assignment()) CHECK(a == 0);
}

TEST_CASE("online clustering against an offline baseline") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SeededRng rng(100 + seed);
    const Index k = 3;
    const Matrix P = blobs(30, k, 100.0, 1.0, rng);
    const OnlineClusterer oc = online_cluster(P, k, 2.0, 0.0, rng);
    SeededRng base(7 + seed);
    const double W = clustering_cost(P, kmeanspp(P, k, base), 2.0);
    const double w = default_w_star(P, k, 2.0);
    const double n = static_cast<double>(P.rows());
    const double cap = 16.0 * k * std::log2(n) * std::max(1.0, std::log2(W / w));
    CHECK(static_cast<double>(oc.centers().size()) <= cap);
    CHECK(oc.total_cost() <= 8.0 * W);
    // Round bookkeeping: thresholds double, counters never exceed the cap.
    double f = oc.initial_threshold();
    Index r = 1;
    for (const auto& ev : oc.round_log()) {
      ++r;
      f *= 2.0;
      CHECK(ev.round == r);
      CHECK(ev.threshold == f);
    }
    CHECK(oc.round() == r);
    CHECK(static_cast<double>(oc.round_count()) < oc.round_cap());
    // Center rows are points that were assigned to themselves at zero cost.
    for (std::size_t c = 0; c < oc.center_rows().size(); ++c) {
      const Index row = oc.center_rows()[c];
      CHECK(oc.costs()[static_cast<std::size_t>(row)] == 0.0);
    }
  }
}

TEST_CASE("replayed streams reproduce assignments and prefixes") {
  SeededRng g(3);
  const Matrix P = blobs(20, 2, 50.0, 1.0, g);
  SeededRng a(9), b(9);
  const OnlineClusterer x = online_cluster(P, 2, 2.0, 0.0, a);
  const OnlineClusterer y = online_cluster(P, 2, 2.0, 0.0, b);
  CHECK(x.assignment() == y.assignment());
  CHECK(x.center_rows() == y.center_rows());
  // Feeding a prefix by hand gives the same early decisions.
  OnlineClusterer z(2, 2, 2.0, default_w_star(P, 2, 2.0), P.rows(), SeededRng(9).child(0));
  for (Index i = 0; i < 15; ++i) z.push(P.row(i).transpose());
  for (Index i = 0; i < 15; ++i) CHECK(z.assignment()[static_cast<std::size_t>(i)] == x.assignment()[static_cast<std::size_t>(i)]);
}

TEST_CASE("sensitivities of identical points follow the harmonic series") {
  Matrix P = Matrix::Zero(40, 2);
  SeededRng rng(5);
  const ClusterSensitivity s = cluster_sensitivity(P, 1, 2.0, 1.0, 3, rng);
  for (Index i = 0; i < 40; ++i) CHECK(s.sigma[i] == doctest::Approx(4.0 * 3.0 / static_cast<double>(i + 1)));
}

TEST_CASE("sensitivities dominate the grid oracle and respect the total budget") {
  SeededRng rng(11);
  Matrix P(30, 2);
  for (Index i = 0; i < 30; ++i) {
    P(i, 0) = rng.normal() + (i % 3 == 0 ? 6.0 : 0.0);
    P(i, 1) = rng.normal();
  }
  const Index R = static_cast<Index>(std::ceil(std::log(30.0 / 0.1)));
  const ClusterSensitivity s = cluster_sensitivity(P, 2, 2.0, 0.0, R, rng);
  const Vector exact = exact_cluster_sensitivity(P, 2, 2.0, 50);
  int ok = 0;
  for (Index i = 0; i < 30; ++i) ok += s.sigma[i] >= exact[i] ? 1 : 0;
  MESSAGE("dominated " << ok << "/30, total " << s.total);
  CHECK(ok >= 29);
  const double W = default_W_upper(P, 2.0);
  const double w = default_w_star(P, 2, 2.0);
  const double budget = 16.0 * 2 * std::pow(std::log2(30.0), 2.0) * std::max(1.0, std::log2(W / w)) * R;
  CHECK(s.total <= budget);
}

TEST_CASE("cluster coreset: identity regime, grid check and cluster sizes") {
  SeededRng rng(13);
  const Matrix P = blobs(40, 2, 20.0, 2.0, rng);
  // Tiny eps forces every probability to one.
  SeededRng r0(1);
  const ClusterCoreset all = cluster_coreset(P, 2, 2.0, 0.05, 0.1, r0);
  CHECK(all.coreset.indices.size() == 80);
  CHECK(cluster_coreset_grid_check(P, {all.coreset.indices, all.coreset.weights}, 2, 2.0, 20) <= 1e-12);

  SeededRng r1(2);
  const double eps = 0.5;
  const ClusterCoreset cc = cluster_coreset(P, 2, 2.0, eps, 0.1, r1);
  const double dev = cluster_coreset_grid_check(P, {cc.coreset.indices, cc.coreset.weights}, 2, 2.0, 50);
  MESSAGE("coreset size " << cc.coreset.indices.size() << " grid deviation " << dev);
  CHECK(dev <= 0.5);
  std::map<Index, double> mass, count;
  for (std::size_t j = 0; j < cc.coreset.indices.size(); ++j) mass[cc.center_ids[j]] += cc.coreset.weights[static_cast<Index>(j)];
  for (Index c : cc.plan.center_ids) count[c] += 1.0;
  for (const auto& [c, cnt] : count) {
    CHECK(mass[c] >= (1.0 - eps) * cnt);
    CHECK(mass[c] <= (1.0 + eps) * cnt);
  }
}

TEST_CASE("coreset weights are unbiased per cluster") {
  SeededRng rng(17);
  const Matrix P = blobs(150, 2, 20.0, 2.0, rng);
  SeededRng pr(3);
  const ClusterPlan plan = cluster_sampling_plan(P, 2, 2.0, 0.9, 0.5, pr, 0.5);
  REQUIRE(plan.probabilities.minCoeff() < 1.0);
  std::map<Index, double> size;
  for (Index c : plan.center_ids) size[c] += 1.0;
  std::map<Index, std::vector<double>> samples;
  for (std::uint64_t s = 0; s < 200; ++s) {
    SeededRng r(1000 + s);
    const ClusterCoreset cc = sample_cluster_plan(plan, 0.9, 2, 2.0, r);
    std::map<Index, double> mass;
    for (std::size_t j = 0; j < cc.coreset.indices.size(); ++j) mass[cc.center_ids[j]] += cc.coreset.weights[static_cast<Index>(j)];
    for (const auto& [c, cnt] : size) samples[c].push_back(mass[c]);
  }
  for (const auto& [c, xs] : samples) {
    double mean = 0.0, var = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    const double se = std::sqrt(var / static_cast<double>(xs.size()));
    CHECK(std::abs(mean - size[c]) <= 3.0 * se + 1e-9);
  }
}
