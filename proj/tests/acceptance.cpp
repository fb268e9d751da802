// Acceptance suite: one PASS/FAIL line per criterion, with the measured quantities.
// Reference values come from independent computations (dense pseudo-inverses, exhaustive
// search, full-data solvers, grid nets) rather than from the quantities the library reports.

#include <sys/wait.h>

#include <Eigen/QR>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coreset/active.hpp"
#include "coreset/clustering.hpp"
#include "coreset/css.hpp"
#include "coreset/ellipsoid.hpp"
#include "coreset/lewis.hpp"
#include "coreset/linalg.hpp"
#include "coreset/norms.hpp"
#include "coreset/online_subspace.hpp"
#include "coreset/oracles.hpp"
#include "coreset/sketch.hpp"
#include "coreset/solvers.hpp"
#include "json.hpp"

using namespace coreset;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Matrix gaussian(Index n, Index d, SeededRng& rng) {
  Matrix m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

Vector gaussian_vec(Index d, SeededRng& rng) {
  Vector v(d);
  for (Index j = 0; j < d; ++j) v[j] = rng.normal();
  return v;
}

double loglog_factor(double d) { return std::max(1.0, std::log2(std::max(1.0, std::log2(d)))); }

double lp_cost(const Matrix& A, const Vector& b, const Vector& x, double p) {
  return (A * x - b).array().abs().pow(p).sum();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// ------------------------------------------------------------------ 1
Outcome criterion_ellipsoid_spanning() {
  const auto start = std::chrono::steady_clock::now();
  const double eps = 0.25;
  double worst_witness = 0.0, worst_cert = 0.0, worst_size_ratio = 0.0, worst_span_resid = 0.0;
  bool ok = true;
  for (int t = 0; t < 50; ++t) {
    SeededRng rng = SeededRng(101).child(static_cast<std::uint64_t>(t));
    const Index d = 1 + static_cast<Index>(rng.below(8));
    const Index n = std::max<Index>(d + 1, 20 + static_cast<Index>(rng.below(481)));
    const Matrix A = gaussian(n, d, rng);
    for (MveeMethod method : {MveeMethod::coordinate_ascent, MveeMethod::leverage_sampled}) {
      SeededRng r = rng.child(method == MveeMethod::coordinate_ascent ? 1 : 2);
      const EllipsoidCoreset ec = mvee_coreset(A, eps, method, r);
      // Witnesses recomputed from the returned weights alone.
      const Matrix M = A.transpose() * ec.weights.asDiagonal() * A;
      const Matrix Minv = M.inverse();
      for (Index i = 0; i < n; ++i) {
        const double w = A.row(i) * Minv * A.row(i).transpose();
        worst_witness = std::max(worst_witness, w);
      }
    }
    SeededRng rs = rng.child(3);
    const SpanningSet ss = l2_spanning_set(A, eps, rs);
    const Matrix ASt = select_rows(A, ss.support).transpose();  // d × |S|
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(ASt);
    for (Index i = 0; i < n; ++i) {
      const Vector ai = A.row(i).transpose();
      const Vector x = cod.solve(ai);
      worst_cert = std::max(worst_cert, x.norm());
      worst_span_resid = std::max(worst_span_resid, (ASt * x - ai).norm() / std::max(1e-300, ai.norm()));
    }
    const double budget = 8.0 * static_cast<double>(d) * loglog_factor(static_cast<double>(d));
    worst_size_ratio = std::max(worst_size_ratio, static_cast<double>(ss.support.size()) / budget);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ok = worst_witness <= 1.0 + eps + 1e-6 && worst_cert <= 1.25 && worst_span_resid <= 1e-8 && worst_size_ratio <= 1.0 &&
       secs < 30.0;
  return {ok, "max witness " + fmt(worst_witness) + " (<= 1.25), max certificate " + fmt(worst_cert) +
                  " (<= 1.25), span residual " + fmt(worst_span_resid) + ", max |S|/budget " + fmt(worst_size_ratio) +
                  ", runtime " + fmt(secs) + " s (< 30)"};
}

// ------------------------------------------------------------------ 2
Outcome criterion_linf_sandwich() {
  int upper_ok = 0, lower_ok = 0, total = 0;
  double worst_ratio_over_kappa = 0.0;
  std::vector<Matrix> instances;
  for (Index d : {3, 5, 8}) instances.push_back(hard_spanning_lb(d));
  for (int t = 0; static_cast<int>(instances.size()) < 50; ++t) {
    SeededRng rng = SeededRng(202).child(static_cast<std::uint64_t>(t));
    const Index d = 2 + static_cast<Index>(rng.below(7));
    instances.push_back(gaussian(50 + static_cast<Index>(rng.below(451)), d, rng));
  }
  for (std::size_t t = 0; t < instances.size(); ++t) {
    const Matrix& A = instances[t];
    SeededRng rng = SeededRng(203).child(t);
    SeededRng r0 = rng.child(0);
    const LinfEmbedding emb = linf_embedding_subset(A, 0.25, MveeMethod::coordinate_ascent, r0);
    const Matrix AS = select_rows(A, emb.set.support);
    bool lower = true;
    double worst = 0.0;
    SeededRng rd = rng.child(1);
    for (int j = 0; j < 10000; ++j) {
      const Vector x = gaussian_vec(A.cols(), rd);
      const double full = (A * x).cwiseAbs().maxCoeff();
      const double sub = (AS * x).cwiseAbs().maxCoeff();
      lower = lower && sub <= full * (1.0 + 1e-12);
      worst = std::max(worst, full / sub);
    }
    ++total;
    lower_ok += lower ? 1 : 0;
    upper_ok += worst <= emb.kappa ? 1 : 0;
    worst_ratio_over_kappa = std::max(worst_ratio_over_kappa, worst / emb.kappa);
  }
  const bool ok = upper_ok == total && lower_ok == total;
  return {ok, "lower side " + std::to_string(lower_ok) + "/" + std::to_string(total) + ", upper side " +
                  std::to_string(upper_ok) + "/" + std::to_string(total) + " (max ratio/kappa " +
                  fmt(worst_ratio_over_kappa) + "), 3 hard instances included"};
}

// ------------------------------------------------------------------ 3
Outcome criterion_lewis() {
  bool side_ok = true, sum_ok = true;
  double worst_side = -1e300, worst_sum_ratio = 0.0;
  for (double p : {1.0, 1.5, 3.0, 4.0, 6.0}) {
    for (int t = 0; t < 50; ++t) {
      SeededRng rng = SeededRng(303).child(static_cast<std::uint64_t>(t)).child(static_cast<std::uint64_t>(10 * p));
      const Index d = 2 + static_cast<Index>(rng.below(5));
      const Matrix A = gaussian(30 + static_cast<Index>(rng.below(171)), d, rng);
      const LewisWeights lw = compute_lewis(A, p);
      // Leverage scores of W^{1/2−1/p}A from a fresh QR.
      Vector s(A.rows());
      for (Index i = 0; i < A.rows(); ++i) s[i] = std::pow(lw.w[i], 0.5 - 1.0 / p);
      const Matrix B = s.asDiagonal() * A;
      const Eigen::HouseholderQR<Matrix> qr(B);
      const Matrix Q = qr.householderQ() * Matrix::Identity(B.rows(), B.cols());
      for (Index i = 0; i < A.rows(); ++i) {
        const double tau = Q.row(i).squaredNorm();
        worst_side = std::max(worst_side, lw.alpha * tau - lw.w[i]);
        side_ok = side_ok && lw.w[i] >= lw.alpha * tau - 1e-6;
      }
      worst_sum_ratio = std::max(worst_sum_ratio, lw.w.sum() / (4.0 * static_cast<double>(d)));
      sum_ok = sum_ok && lw.w.sum() <= 4.0 * static_cast<double>(d);
    }
  }
  Matrix D(3, 2);
  D << 1, 0, 1, 0, 0, 1;
  const LewisWeights dup = compute_lewis(D, 1.0);
  const double dup_err = std::max({std::abs(dup.w[0] - 0.5), std::abs(dup.w[1] - 0.5), std::abs(dup.w[2] - 1.0)});

  SeededRng rng(304);
  const Matrix A = gaussian(500, 3, rng);
  const LewisWeights lw = compute_lewis(A, 3.0);
  int good = 0;
  double mean_size = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    SeededRng r = SeededRng(305).child(static_cast<std::uint64_t>(seed));
    // Oversampling constant small enough that the sample is a strict subset at n = 500.
    const SamplingMatrix S = lewis_sample(lw, 0.3, 0.1, r, 0.05);
    mean_size += static_cast<double>(S.size()) / 100.0;
    const Matrix SA = S.apply(A);
    bool ok = S.size() < A.rows();
    SeededRng rd = r.child(77);
    for (int t = 0; t < 2000 && ok; ++t) {
      const Vector x = gaussian_vec(3, rd);
      const double ratio = vec_norm(SA * x, 3.0) / vec_norm(A * x, 3.0);
      ok = ratio >= 0.7 && ratio <= 1.3;
    }
    good += ok ? 1 : 0;
  }
  const bool ok = side_ok && sum_ok && dup_err <= 1e-8 && good >= 95;
  return {ok, "one-sided max violation " + fmt(worst_side) + ", max sum/(4d) " + fmt(worst_sum_ratio) +
                  ", duplicate-row error " + fmt(dup_err) + ", sampled (1±0.3) embeddings " + std::to_string(good) +
                  "/100 (mean size " + fmt(mean_size) + " of 500)"};
}

// ------------------------------------------------------------------ 4
Outcome criterion_ose() {
  const Index d = 3;
  const Index r = static_cast<Index>(std::ceil(40.0 * d * std::log(static_cast<double>(d))));
  int both = 0, contraction_ok = 0, expansion_ok = 0;
  std::vector<double> maxima;
  for (int seed = 0; seed < 100; ++seed) {
    SeededRng rng = SeededRng(404).child(static_cast<std::uint64_t>(seed));
    const Matrix A = gaussian(200, d, rng);
    SeededRng rs = rng.child(1);
    const Matrix SA = pstable_embed(A, 1.0, r, rs);  // library default scale C = 4
    double lo = 1e300, hi = 0.0;
    SeededRng rd = rng.child(2);
    for (int t = 0; t < 100; ++t) {
      const Vector x = gaussian_vec(d, rd);
      const double ratio = (SA * x).lpNorm<1>() / (A * x).lpNorm<1>();
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    maxima.push_back(hi);
    contraction_ok += lo >= 0.9 ? 1 : 0;
    expansion_ok += hi <= 8.0 * d ? 1 : 0;
    both += lo >= 0.9 && hi <= 8.0 * d ? 1 : 0;
  }
  std::sort(maxima.begin(), maxima.end());
  return {both >= 95, "r = " + std::to_string(r) + ", no-contraction " + std::to_string(contraction_ok) +
                          "/100, expansion <= 8d " + std::to_string(expansion_ok) + "/100, both " +
                          std::to_string(both) + "/100 (need 95); median max ratio " + fmt(maxima[50]) +
                          ", 90th pct " + fmt(maxima[90])};
}

// ------------------------------------------------------------------ 5
Matrix planted(Index n, Index d, Index k, double noise_frac, double noise_mag, SeededRng& rng, Matrix* delta) {
  SeededRng r1 = rng.child(1), r2 = rng.child(2), r3 = rng.child(3);
  const Matrix U = gaussian(n, k, r1);
  const Matrix V = gaussian(k, d, r2);
  Matrix D = Matrix::Zero(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      if (r3.bernoulli(noise_frac)) D(i, j) = noise_mag * r3.normal();
  if (delta) *delta = D;
  return U * V + D;
}

/// Desk-scale constants: the verbatim ones never enter the selection loop for d ≤ 60.
CssConstants desk_constants() {
  CssConstants c;
  c.loop_guard = 4.0;
  c.sample_mult = 2.0;
  c.sample_log = false;
  c.removal_div = 4.0;
  c.repetitions = 3;
  return c;
}

Outcome criterion_css() {
  double worst_h = 0.0, worst_4 = 0.0, worst_i = 0.0, worst_oracle = 0.0, slowest = 0.0;
  bool ok = true;
  int runs = 0;
  const auto timed = [&](const std::function<CssResult()>& f) {
    const auto s = std::chrono::steady_clock::now();
    CssResult r = f();
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - s).count());
    ++runs;
    return r;
  };
  for (Index k = 1; k <= 3; ++k)
    for (int seed = 0; seed < 3; ++seed) {
      SeededRng rng = SeededRng(505).child(static_cast<std::uint64_t>(10 * k + seed));
      Matrix D;
      const Matrix A = planted(40, 60, k, 0.05, 20.0, rng, &D);
      SeededRng r1 = rng.child(11), r2 = rng.child(12), r3 = rng.child(13);
      const CssResult h = timed([&] { return css_gnorm(A, k, LossSpec::huber(), r1, desk_constants()); });
      const double dh = h.residual / norm(D, NormMode::gnorm(LossSpec::huber()));
      Matrix D2;
      SeededRng rng2 = rng.child(20);
      const Matrix B = planted(40, 60, k, 0.1, 1.0, rng2, &D2);
      const CssResult l4 = timed([&] { return css_boost(B, k, CssObjective::lp(4.0), r2, desk_constants()); });
      const double d4 = l4.residual / norm(D2, NormMode::entrywise(4.0));
      const CssResult li = timed([&] { return css_boost(B, k, CssObjective::linf(B.rows()), r3, desk_constants()); });
      const double di = li.residual / norm(D2, NormMode::entrywise_inf());
      const double kk = static_cast<double>(k);
      worst_h = std::max(worst_h, dh / (8.0 * kk));
      worst_4 = std::max(worst_4, d4 / (8.0 * std::pow(kk, 0.25)));
      worst_i = std::max(worst_i, di / (8.0 * std::sqrt(kk)));
    }
  // d = 12 instances with the same constants: compare with the exhaustive optimum at the same subset size.
  int compared = 0;
  for (int seed = 0; seed < 12; ++seed) {
    SeededRng rng = SeededRng(506).child(static_cast<std::uint64_t>(seed));
    const Index k = 1 + seed % 3;
    const Matrix A = planted(40, 12, k, 0.05, 20.0, rng, nullptr);
    for (const CssObjective& obj : {CssObjective::gnorm(LossSpec::huber()), CssObjective::lp(4.0)}) {
      SeededRng r = rng.child(obj.kind == CssObjective::Kind::g ? 1 : 2);
      const CssResult res = timed([&] {
        return obj.kind == CssObjective::Kind::g ? css_gnorm(A, k, LossSpec::huber(), r, desk_constants())
                                                 : css_boost(A, k, obj, r, desk_constants());
      });
      const Index size = static_cast<Index>(res.selected.size());
      if (size >= A.cols()) continue;  // every column kept: residual 0 equals the optimum
      const BruteCssResult br = brute_css(A, size, obj);
      const double ratio = br.residual > 0.0 ? res.residual / br.residual : (res.residual <= 1e-12 ? 1.0 : 1e300);
      worst_oracle = std::max(worst_oracle, ratio);
      ++compared;
    }
  }
  ok = worst_h <= 1.0 && worst_4 <= 1.0 && worst_i <= 1.0 && compared > 0 && worst_oracle <= 2.0 && slowest < 60.0;
  return {ok, "max distortion/budget: huber " + fmt(worst_h) + ", l4 " + fmt(worst_4) + ", linf " + fmt(worst_i) +
                  "; max residual/brute " + fmt(worst_oracle) + " (<= 2) over " + std::to_string(compared) +
                  " d=12 runs with a strict subset; slowest of " + std::to_string(runs) +
                  " runs " + fmt(slowest) + " s"};
}

// ------------------------------------------------------------------ 6
Outcome criterion_online_subspace() {
  int within = 0, total = 0, replay_ok = 0, irrevocable_ok = 0, budget_ok = 0;
  double worst_dev = 0.0, worst_budget_ratio = 0.0;
  double mean_size = 0.0;
  for (double p : {1.0, 3.0}) {
    for (int seed = 0; seed < 50; ++seed) {
      SeededRng rng = SeededRng(606).child(static_cast<std::uint64_t>(seed)).child(static_cast<std::uint64_t>(p));
      const Matrix A = gaussian(60, 3, rng);
      OnlineSubspaceTrace tr;
      SeededRng r1 = rng.child(1), r2 = rng.child(1);
      const StrongCoreset a = online_subspace_coreset(A, 1, p, 0.5, 0.1, r1, {}, &tr);
      const StrongCoreset b = online_subspace_coreset(A, 1, p, 0.5, 0.1, r2);
      replay_ok += a.indices == b.indices && a.weights == b.weights ? 1 : 0;
      // Streaming with snapshots: nothing decided earlier may change later.
      OnlineSubspaceConfig cfg;
      cfg.n_hint = 60;
      cfg.delta_hint = std::max(1.0, A.cwiseAbs().maxCoeff());
      OnlineSubspaceCoreset stream(3, cfg, 0.5, 0.1, rng.child(1).child(0));
      std::vector<StrongCoreset> snaps;
      for (Index i = 0; i < A.rows(); ++i) {
        stream.push(A.row(i).transpose());
        snaps.push_back(stream.coreset());
      }
      bool irrevocable = true;
      const StrongCoreset& fin = stream.coreset();
      for (const StrongCoreset& s : snaps)
        for (std::size_t j = 0; j < s.indices.size(); ++j)
          irrevocable = irrevocable && fin.indices[j] == s.indices[j] &&
                        fin.weights[static_cast<Index>(j)] == s.weights[static_cast<Index>(j)];
      irrevocable = irrevocable && fin.indices == a.indices && fin.weights == a.weights;
      irrevocable_ok += irrevocable ? 1 : 0;
      const CoresetCheck chk = strong_coreset_check(A, {a.indices, a.weights}, 1, p);
      worst_dev = std::max(worst_dev, chk.max_deviation);
      within += chk.max_deviation <= 0.5 ? 1 : 0;
      budget_ok += tr.sensitivity_total <= tr.sensitivity_budget ? 1 : 0;
      worst_budget_ratio = std::max(worst_budget_ratio, tr.sensitivity_total / tr.sensitivity_budget);
      mean_size += static_cast<double>(a.indices.size()) / 100.0;
      ++total;
    }
  }
  const bool ok = within >= (9 * total + 9) / 10 && replay_ok == total && irrevocable_ok == total && budget_ok == total;
  return {ok, "net deviation <= 0.5 on " + std::to_string(within) + "/" + std::to_string(total) + " (max " +
                  fmt(worst_dev) + "), replay " + std::to_string(replay_ok) + "/" + std::to_string(total) +
                  ", irrevocable " + std::to_string(irrevocable_ok) + "/" + std::to_string(total) +
                  ", sensitivity sum within budget " + std::to_string(budget_ok) + "/" + std::to_string(total) +
                  " (max ratio " + fmt(worst_budget_ratio) + "), mean coreset size " + fmt(mean_size) + " of 60"};
}

// ------------------------------------------------------------------ 7
Outcome criterion_entrywise() {
  int good = 0;
  double worst_cos = 1.0, worst_ratio = 0.0;
  const int trials = 10;
  for (int seed = 0; seed < trials; ++seed) {
    SeededRng rng = SeededRng(707).child(static_cast<std::uint64_t>(seed));
    const Index n = 60, d = 8;
    const Vector u = gaussian_vec(n, rng);
    const Vector v = gaussian_vec(d, rng);
    Matrix noise = Matrix::Zero(n, d);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j)
        if (rng.bernoulli(0.05)) noise(i, j) = 5.0 * rng.normal();
    const Matrix A = u * v.transpose() + noise;
    SeededRng r = rng.child(1);
    const EntrywiseCoreset e = entrywise_online_coreset(A, 1, 1.0, r);
    const double cosine = std::abs(e.V.row(0).dot(v.transpose())) / (e.V.row(0).norm() * v.norm());
    const double base = norm(noise, NormMode::entrywise(1.0));
    const double dist = base > 0.0 ? e.residual / base : (e.residual <= 1e-9 ? 1.0 : 1e300);
    const double budget = std::sqrt(static_cast<double>(e.t)) * std::pow(std::log(static_cast<double>(n)), 2.0);
    worst_cos = std::min(worst_cos, cosine);
    worst_ratio = std::max(worst_ratio, dist / budget);
    good += cosine >= 0.99 && dist <= budget ? 1 : 0;
  }
  return {good == trials, std::to_string(good) + "/" + std::to_string(trials) + " trials; min cosine " +
                              fmt(worst_cos) + ", max distortion/budget " + fmt(worst_ratio)};
}

// ------------------------------------------------------------------ 8
Matrix blobs(Index per, Index k, double sep, double spread, SeededRng& rng) {
  Matrix P(per * k, 2);
  for (Index c = 0; c < k; ++c)
    for (Index i = 0; i < per; ++i) {
      P(c * per + i, 0) = sep * static_cast<double>(c) + spread * rng.normal();
      P(c * per + i, 1) = sep * static_cast<double>(c % 2) + spread * rng.normal();
    }
  for (Index i = P.rows() - 1; i > 0; --i) {
    const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    P.row(i).swap(P.row(j));
  }
  return P;
}

Outcome criterion_clustering() {
  int centers_ok = 0, cost_ok = 0;
  double worst_center_ratio = 0.0, worst_cost_ratio = 0.0;
  const Index k = 3;
  for (int seed = 0; seed < 20; ++seed) {
    SeededRng rng = SeededRng(808).child(static_cast<std::uint64_t>(seed));
    const Matrix P = blobs(100, k, 10.0, 1.0, rng);
    const double n = static_cast<double>(P.rows());
    const double w_star = default_w_star(P, k, 2.0);
    const double W = default_W_upper(P, 2.0);
    SeededRng r0 = rng.child(1), r1 = rng.child(2);
    const OnlineClusterer oc = online_cluster(P, k, 2.0, w_star, r0);
    const double bound = 16.0 * static_cast<double>(k) * std::log2(n) * std::log2(W / w_star);
    const Matrix km = kmeanspp(P, k, r1);
    const double offline = clustering_cost(P, km, 2.0);
    const double ratio = oc.total_cost() / offline;
    worst_center_ratio = std::max(worst_center_ratio, static_cast<double>(oc.centers().size()) / bound);
    worst_cost_ratio = std::max(worst_cost_ratio, ratio);
    centers_ok += static_cast<double>(oc.centers().size()) <= bound ? 1 : 0;
    cost_ok += ratio <= 8.0 ? 1 : 0;
  }
  // Coreset: 50×50 center grid and per-cluster size preservation.
  int grid_ok = 0, size_ok = 0;
  double worst_grid = 0.0, worst_size = 0.0, mean_kept = 0.0;
  const int coreset_trials = 10;
  const double eps = 0.5;
  for (int seed = 0; seed < coreset_trials; ++seed) {
    SeededRng rng = SeededRng(809).child(static_cast<std::uint64_t>(seed));
    const Matrix P = blobs(40, 2, 8.0, 1.0, rng);
    SeededRng r = rng.child(1);
    const ClusterCoreset cc = cluster_coreset(P, 2, 2.0, eps, 0.1, r);
    mean_kept += static_cast<double>(cc.coreset.indices.size()) / coreset_trials;
    const double dev = cluster_coreset_grid_check(P, {cc.coreset.indices, cc.coreset.weights}, 2, 2.0, 50);
    worst_grid = std::max(worst_grid, dev);
    grid_ok += dev <= eps ? 1 : 0;
    std::map<Index, double> count, mass;
    for (Index i = 0; i < P.rows(); ++i) count[cc.plan.center_ids[static_cast<std::size_t>(i)]] += 1.0;
    for (std::size_t j = 0; j < cc.coreset.indices.size(); ++j)
      mass[cc.plan.center_ids[static_cast<std::size_t>(cc.coreset.indices[j])]] += cc.coreset.weights[static_cast<Index>(j)];
    double worst = 0.0;
    for (const auto& [c, cnt] : count) worst = std::max(worst, std::abs(mass[c] - cnt) / cnt);
    worst_size = std::max(worst_size, worst);
    size_ok += worst <= eps ? 1 : 0;
  }
  const bool ok = centers_ok == 20 && cost_ok == 20 && grid_ok == coreset_trials && size_ok == coreset_trials;
  return {ok, "centers within bound " + std::to_string(centers_ok) + "/20 (max ratio " + fmt(worst_center_ratio) +
                  "), cost <= 8x k-means++ " + std::to_string(cost_ok) + "/20 (max " + fmt(worst_cost_ratio) +
                  "); n=80 coreset grid check " + std::to_string(grid_ok) + "/" + std::to_string(coreset_trials) +
                  " (max dev " + fmt(worst_grid) + "), size preservation " + std::to_string(size_ok) + "/" +
                  std::to_string(coreset_trials) + " (max " + fmt(worst_size) + "), mean kept " + fmt(mean_kept)};
}

// ------------------------------------------------------------------ 9
Outcome criterion_active() {
  const double p = 4.0, eps = 0.2, delta = 0.1;
  int good = 0, within_budget = 0;
  double worst_rel = 0.0, max_queries = 0.0, budget = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    SeededRng rng = SeededRng(909).child(static_cast<std::uint64_t>(trial));
    const Matrix A = gaussian(4000, 5, rng);
    const Vector b = A * gaussian_vec(5, rng) + 0.5 * gaussian_vec(4000, rng);
    const ExactRegression ex = exact_lp_regression(A, b, p);
    LabelOracle oracle = LabelOracle::from_vector(b);
    SeededRng r = rng.child(1);
    const ActiveResult res = active_lp_solve(A, oracle, p, eps, delta, r);
    const double rel = lp_cost(A, b, res.x, p) / std::pow(ex.opt, p);
    worst_rel = std::max(worst_rel, rel);
    good += rel <= 1.0 + eps ? 1 : 0;
    within_budget += static_cast<double>(res.queries_realized) <= res.query_budget ? 1 : 0;
    max_queries = std::max(max_queries, static_cast<double>(res.queries_realized));
    budget = res.query_budget;
  }

  // Lower-bound instance: uniform sampling with the same number of reads vs the Lewis plan.
  const double eps_lb = 0.25;
  int lewis_pass = 0, uniform_fail = 0;
  const int lb_trials = 50;
  double mean_reads = 0.0;
  Index lb_rows = 0;
  for (int trial = 0; trial < lb_trials; ++trial) {
    SeededRng rng = SeededRng(910).child(static_cast<std::uint64_t>(trial));
    const ActiveLbInstance inst = hard_active_lb(p, 3, eps_lb, rng);
    SeededRng rt = rng.child(1);
    const auto [b, I] = inst.sample_target(rt);
    (void)I;
    const Matrix& A = inst.A;
    lb_rows = A.rows();
    const ExactRegression ex = exact_lp_regression(A, b, p);
    const double opt = std::pow(ex.opt, p);
    const double floor = 1e-20 * std::max(1.0, b.array().abs().pow(p).sum());
    const auto passes = [&](const Vector& x) { return lp_cost(A, b, x, p) <= (1.0 + eps_lb / 3.0) * opt + floor; };
    LabelOracle oracle = LabelOracle::from_vector(b);
    SeededRng ra = rng.child(2);
    const ActiveResult res = active_lp_solve(A, oracle, p, eps_lb, delta, ra);
    lewis_pass += passes(res.x) ? 1 : 0;
    const Index m = std::max<Index>(1, res.queries_realized);
    mean_reads += static_cast<double>(m) / lb_trials;
    SeededRng ru = rng.child(3);
    const IndexList rows = sample_without_replacement(A.rows(), m, ru);
    const Matrix SA = select_rows(A, rows);
    Vector Sb(m);
    for (Index i = 0; i < m; ++i) Sb[i] = b[rows[static_cast<std::size_t>(i)]];
    const SolveResult ur = lp_regression(SA, Sb, p);
    uniform_fail += passes(ur.x) ? 0 : 1;
  }

  // Large-distortion modes against full-data oracles.
  int linf_ok = 0, lpq_ok = 0;
  double worst_linf = 0.0, worst_lpq = 0.0;
  const int ld_trials = 10;
  for (int trial = 0; trial < ld_trials; ++trial) {
    SeededRng rng = SeededRng(911).child(static_cast<std::uint64_t>(trial));
    {
      const Matrix A = gaussian(500, 4, rng);
      const Vector b = A * gaussian_vec(4, rng) + gaussian_vec(500, rng);
      const ExactRegression ex = exact_lp_regression(A, b, std::numeric_limits<double>::infinity());
      LabelOracle o = LabelOracle::from_vector(b);
      SeededRng r = rng.child(1);
      const LargeDistortionResult res = active_linf(A, o, r);
      const double ratio = (A * res.x - b).cwiseAbs().maxCoeff() / ex.opt;
      worst_linf = std::max(worst_linf, ratio / (4.0 * std::sqrt(4.0)));
      linf_ok += ratio <= 4.0 * std::sqrt(4.0) ? 1 : 0;
    }
    {
      const Matrix A = gaussian(800, 3, rng);
      const Vector b = A * gaussian_vec(3, rng) + gaussian_vec(800, rng);
      const ExactRegression ex = exact_lp_regression(A, b, 8.0);
      LabelOracle o = LabelOracle::from_vector(b);
      SeededRng r = rng.child(2);
      const LargeDistortionResult res = active_lp_q(A, o, 8.0, 2.0, r);
      const double ratio = std::pow(lp_cost(A, b, res.x, 8.0), 1.0 / 8.0) / ex.opt;
      const double cert = 4.0 * std::pow(3.0, (1.0 - 2.0 / 8.0) / 2.0);
      worst_lpq = std::max(worst_lpq, ratio / cert);
      lpq_ok += ratio <= cert ? 1 : 0;
    }
  }

  const bool main_ok = good >= 90 && within_budget == 100;
  const bool sep_ok = 2 * uniform_fail >= lb_trials && 10 * lewis_pass >= 9 * lb_trials;
  const bool ld_ok = linf_ok == ld_trials && lpq_ok == ld_trials;
  return {main_ok && sep_ok && ld_ok,
          "p=4 relative error <= 1.2 in " + std::to_string(good) + "/100 (max " + fmt(worst_rel) +
              "), queries within budget " + std::to_string(within_budget) + "/100 (max " + fmt(max_queries) +
              " vs " + fmt(budget) + "); lower-bound instance (" + std::to_string(lb_rows) +
              " rows, mean reads " + fmt(mean_reads) + "): uniform fails " + std::to_string(uniform_fail) + "/" +
              std::to_string(lb_trials) + " (need >= 50%), Lewis plan passes " + std::to_string(lewis_pass) + "/" +
              std::to_string(lb_trials) + "; linf within 4*sqrt(d) " + std::to_string(linf_ok) + "/" +
              std::to_string(ld_trials) + " (max ratio/budget " + fmt(worst_linf) + "), l8->l2 within certificate " +
              std::to_string(lpq_ok) + "/" + std::to_string(ld_trials) + " (max " + fmt(worst_lpq) + ")"};
}

// ------------------------------------------------------------------ 10
int run_cli(const std::string& args) {
  const std::string cmd = std::string(CORESET_KIT_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / "coreset_kit_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::string> cmds = {
      "spanning-set --input synth:gaussian:300x6 --eps 0.25 --seed 11",
      "lewis --input synth:gaussian:300x4 --p 3 --seed 11",
      "ose-bench --input synth:gaussian:200x3 --p 1 --seed 11",
      "css --input synth:gaussian:40x12 --k 2 --loss huber --seed 11",
      "css --input synth:gaussian:40x12 --k 2 --loss linf --seed 11",
      "online-subspace --stream synth:gaussian:60x3 --k 1 --p 3 --eps 0.5 --seed 11",
      "online-cluster --input synth:gaussian:80x2 --k 2 --eps 0.5 --seed 11",
      "active-regression --input synth:gaussian:400x3 --p 4 --eps 0.2 --seed 11",
      "active-regression --input synth:gaussian:400x3 --mode online --p 4 --seed 11",
      "active-regression --input synth:gaussian:400x3 --mode linf --seed 11",
      "active-regression --input synth:gaussian:400x3 --mode lp_q --p 8 --q 2 --seed 11",
      "oracle --input synth:gaussian:40x3 --p 1 --seed 11",
      "oracle --input synth:gaussian:20x8 --method brute-css --k 2 --seed 11",
      "verify --suite spanning --seed 11 --const instances=3"};
  int same = 0, usage_errors = 0;
  std::string first_diff;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    const fs::path a = dir / ("a" + std::to_string(i)), b = dir / ("b" + std::to_string(i));
    const int ca = run_cli(cmds[i] + " --out " + a.string());
    const int cb = run_cli(cmds[i] + " --out " + b.string());
    usage_errors += ca == 2 || cb == 2 ? 1 : 0;
    bool eq = ca == cb && fs::exists(a / "report.json") && fs::exists(b / "report.json");
    if (eq) {
      auto ja = nlohmann::json::parse(slurp(a / "report.json"));
      auto jb = nlohmann::json::parse(slurp(b / "report.json"));
      ja.erase("timestamp");
      jb.erase("timestamp");
      eq = ja.dump() == jb.dump() && slurp(a / "series.csv") == slurp(b / "series.csv");
    }
    same += eq ? 1 : 0;
    if (!eq && first_diff.empty()) first_diff = cmds[i];
  }
  fs::remove_all(dir);
  const int total = static_cast<int>(cmds.size());
  return {same == total && usage_errors == 0,
          std::to_string(same) + "/" + std::to_string(total) + " subcommand runs byte-identical modulo timestamp" +
              (first_diff.empty() ? "" : "; first mismatch: " + first_diff) +
              (usage_errors ? "; usage errors: " + std::to_string(usage_errors) : "")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"ellipsoid/spanning invariants", criterion_ellipsoid_spanning},
      {"linf embedding sandwich", criterion_linf_sandwich},
      {"lewis weights and sampling", criterion_lewis},
      {"cauchy subspace embedding", criterion_ose},
      {"column subset selection", criterion_css},
      {"online subspace coreset", criterion_online_subspace},
      {"entrywise online low rank", criterion_entrywise},
      {"online clustering and coreset", criterion_clustering},
      {"active regression", criterion_active},
      {"cli determinism", criterion_determinism}};
  // Optional argument: run a single criterion by number.
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i + 1) != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "CRITERION " << (i + 1) << " [" << criteria[i].first << "]: " << (o.pass ? "PASS" : "FAIL") << " -- "
              << o.detail << " [" << fmt(secs) << " s]" << std::endl;
    failures += o.pass ? 0 : 1;
  }
  std::cout << "SUMMARY: " << failures << " criteria failed" << std::endl;
  return failures == 0 ? 0 : 1;
}
