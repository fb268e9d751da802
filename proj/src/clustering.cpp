#include "coreset/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coreset/norms.hpp"
#include "coreset/parallel.hpp"

namespace coreset {

OnlineClusterer::OnlineClusterer(Index d, Index k, double p, double w_star, Index n_hint, SeededRng rng)
    : d_(d), k_(k), p_(p), rng_(std::move(rng)) {
  require(d >= 1 && k >= 1, "online clustering: d and k must be positive");
  require(p >= 1.0, "online clustering: p must be >= 1");
  require(w_star > 0.0 && std::isfinite(w_star), "online clustering: w* must be positive");
  require(n_hint >= 1, "online clustering: stream length hint must be positive");
  const double logn = std::max(1.0, std::log2(static_cast<double>(n_hint)));
  f1_ = w_star / (static_cast<double>(k) * logn);
  f_ = f1_;
  cap_ = 3.0 * static_cast<double>(k) * (1.0 + logn);
}

double OnlineClusterer::distance_p(const Vector& x, Index* which) const {
  double best = std::numeric_limits<double>::infinity();
  Index arg = -1;
  for (std::size_t c = 0; c < centers_.size(); ++c) {
    const double dist = (x - centers_[c]).squaredNorm();
    if (dist < best) {
      best = dist;
      arg = static_cast<Index>(c);
    }
  }
  if (which) *which = arg;
  return std::isinf(best) ? best : std::pow(std::sqrt(best), p_);
}

Index OnlineClusterer::push(const Vector& x) {
  if (x.size() != d_) throw DimensionMismatch("online clustering: wrong point dimension");
  const double D = distance_p(x);
  const double prob = std::isinf(D) ? 1.0 : std::min(1.0, D / f_);
  if (rng_.bernoulli(prob)) {
    centers_.push_back(x);
    center_rows_.push_back(seen_);
    ++q_;
  }
  if (static_cast<double>(q_) >= cap_) {
    ++round_;
    q_ = 0;
    f_ *= 2.0;
    rounds_.push_back({seen_, round_, f_});
  }
  Index c = -1;
  const double cost = distance_p(x, &c);
  assignment_.push_back(c);
  costs_.push_back(cost);
  ++seen_;
  return c;
}

double OnlineClusterer::total_cost() const {
  double s = 0.0;
  for (double c : costs_) s += c;
  return s;
}

double default_w_star(const Matrix& points, Index k, double p) {
  const Index m = std::min<Index>(points.rows(), 2 * k);
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) {
      const double dist = (points.row(i) - points.row(j)).norm();
      if (dist > 0.0) best = std::min(best, dist);
    }
  return std::isinf(best) ? 1.0 : std::pow(best, p);
}

double default_W_upper(const Matrix& points, double p) {
  double best = 0.0;
  for (Index i = 0; i < points.rows(); ++i)
    for (Index j = i + 1; j < points.rows(); ++j) best = std::max(best, (points.row(i) - points.row(j)).norm());
  return static_cast<double>(points.rows()) * std::pow(best, p);
}

OnlineClusterer online_cluster(const Matrix& points, Index k, double p, double w_star, SeededRng& rng) {
  check_finite(points, "online_cluster");
  if (w_star <= 0.0) w_star = default_w_star(points, k, p);
  OnlineClusterer oc(points.cols(), k, p, w_star, std::max<Index>(1, points.rows()), rng.child(0));
  for (Index i = 0; i < points.rows(); ++i) oc.push(points.row(i).transpose());
  return oc;
}

namespace {

/// Per-point (d(a_i,C)^p / v_i, 1/|S_i|, cluster id) along one online run.
struct SensitivityRun {
  std::vector<double> residual_term;
  std::vector<double> size_term;
  IndexList cluster;
  Index centers = 0;
};

SensitivityRun sensitivity_run(const Matrix& points, Index k, double p, double w_star, SeededRng rng) {
  OnlineClusterer oc(points.cols(), k, p, w_star, std::max<Index>(1, points.rows()), std::move(rng));
  SensitivityRun out;
  std::vector<Index> sizes;
  double v = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    const Index c = oc.push(points.row(i).transpose());
    if (static_cast<std::size_t>(c) >= sizes.size()) sizes.resize(static_cast<std::size_t>(c) + 1, 0);
    ++sizes[static_cast<std::size_t>(c)];
    const double cost = oc.costs().back();
    v += cost;
    out.residual_term.push_back(v > 0.0 ? cost / v : 0.0);
    out.size_term.push_back(1.0 / static_cast<double>(sizes[static_cast<std::size_t>(c)]));
    out.cluster.push_back(c);
  }
  out.centers = static_cast<Index>(oc.centers().size());
  return out;
}

}  // namespace

ClusterSensitivity cluster_sensitivity(const Matrix& points, Index k, double p, double w_star, Index reps,
                                       SeededRng& rng, double c0) {
  check_finite(points, "cluster_sensitivity");
  require(reps >= 1, "cluster_sensitivity: need at least one copy");
  if (w_star <= 0.0) w_star = default_w_star(points, k, p);
  const Index n = points.rows();
  std::vector<SensitivityRun> runs(static_cast<std::size_t>(reps));
  parallel_for(runs.size(), [&](std::size_t r) {
    runs[r] = sensitivity_run(points, k, p, w_star, rng.child(static_cast<std::uint64_t>(r)));
  });
  ClusterSensitivity out;
  out.reps = reps;
  out.sigma = Vector::Zero(n);
  for (const auto& run : runs) {
    for (Index i = 0; i < n; ++i)
      out.sigma[i] += c0 * (run.residual_term[static_cast<std::size_t>(i)] + run.size_term[static_cast<std::size_t>(i)]);
    out.centers_per_copy.push_back(run.centers);
  }
  out.total = out.sigma.sum();
  return out;
}

ClusterPlan cluster_sampling_plan(const Matrix& points, Index k, double p, double eps, double delta, SeededRng& rng,
                                  double c, double w_star) {
  check_finite(points, "cluster_sampling_plan");
  require(eps > 0.0 && eps < 1.0, "cluster coreset: eps must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "cluster coreset: delta must lie in (0, 1)");
  if (w_star <= 0.0) w_star = default_w_star(points, k, p);
  const Index n = points.rows();
  const double ln_n = std::log(std::max<double>(2.0, static_cast<double>(n)));
  ClusterPlan plan;
  plan.beta1 = c * (static_cast<double>(points.cols() * k) * ln_n + std::log(1.0 / delta));
  OnlineClusterer oc(points.cols(), k, p, w_star, std::max<Index>(1, n), rng.child(0));
  std::vector<Index> sizes;
  double v = 0.0;
  plan.probabilities = Vector::Zero(n);
  double beta2_max = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Index cid = oc.push(points.row(i).transpose());
    if (static_cast<std::size_t>(cid) >= sizes.size()) sizes.resize(static_cast<std::size_t>(cid) + 1, 0);
    ++sizes[static_cast<std::size_t>(cid)];
    const double cost = oc.costs().back();
    v += cost;
    const double beta2 = c * (std::log(static_cast<double>(oc.centers().size())) + std::log(1.0 / delta));
    beta2_max = std::max(beta2_max, beta2);
    const double t1 = v > 0.0 ? plan.beta1 * std::pow(eps, -(p + 1.0)) * cost / v : 0.0;
    const double t2 = beta2 / (eps * eps) / static_cast<double>(sizes[static_cast<std::size_t>(cid)]);
    plan.probabilities[i] = std::min(1.0, std::max(t1, t2));
    plan.center_ids.push_back(cid);
  }
  plan.num_centers = static_cast<Index>(oc.centers().size());
  plan.beta2 = beta2_max;
  return plan;
}

ClusterCoreset sample_cluster_plan(const ClusterPlan& plan, double eps, Index k, double p, SeededRng& rng) {
  ClusterCoreset out;
  out.plan = plan;
  out.coreset.eps = eps;
  out.coreset.k = k;
  out.coreset.p = p;
  std::vector<double> w;
  for (Index i = 0; i < plan.probabilities.size(); ++i) {
    const double pr = plan.probabilities[i];
    if (rng.bernoulli(pr)) {
      out.coreset.indices.push_back(i);
      w.push_back(1.0 / pr);
      out.center_ids.push_back(plan.center_ids[static_cast<std::size_t>(i)]);
    }
  }
  out.coreset.weights = Eigen::Map<Vector>(w.data(), static_cast<Index>(w.size()));
  return out;
}

ClusterCoreset cluster_coreset(const Matrix& points, Index k, double p, double eps, double delta, SeededRng& rng,
                               double c, double w_star) {
  SeededRng plan_rng = rng.child(0);
  const ClusterPlan plan = cluster_sampling_plan(points, k, p, eps, delta, plan_rng, c, w_star);
  SeededRng draw = rng.child(1);
  return sample_cluster_plan(plan, eps, k, p, draw);
}

double clustering_cost(const Matrix& points, const Matrix& centers, double p, const Vector& weights) {
  require(centers.rows() >= 1, "clustering_cost: need at least one center");
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centers.rows(); ++c) best = std::min(best, (points.row(i) - centers.row(c)).squaredNorm());
    const double w = weights.size() ? weights[i] : 1.0;
    total += w * std::pow(std::sqrt(best), p);
  }
  return total;
}

Matrix kmeanspp(const Matrix& points, Index k, SeededRng& rng, int restarts, int iters) {
  const Index n = points.rows();
  const Index d = points.cols();
  require(n >= 1 && k >= 1, "kmeanspp: need points and k >= 1");
  Matrix best_C;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    SeededRng g = rng.child(static_cast<std::uint64_t>(r));
    Matrix C(std::min(k, n), d);
    C.row(0) = points.row(static_cast<Index>(g.below(static_cast<std::uint64_t>(n))));
    Vector dist(n);
    for (Index i = 0; i < n; ++i) dist[i] = (points.row(i) - C.row(0)).squaredNorm();
    for (Index c = 1; c < C.rows(); ++c) {
      const double tot = dist.sum();
      Index pick = 0;
      if (tot > 0.0) {
        double u = g.uniform() * tot;
        for (Index i = 0; i < n; ++i) {
          u -= dist[i];
          if (u <= 0.0) {
            pick = i;
            break;
          }
          pick = i;
        }
      } else {
        pick = static_cast<Index>(g.below(static_cast<std::uint64_t>(n)));
      }
      C.row(c) = points.row(pick);
      for (Index i = 0; i < n; ++i) dist[i] = std::min(dist[i], (points.row(i) - C.row(c)).squaredNorm());
    }
    for (int it = 0; it < iters; ++it) {
      Matrix sum = Matrix::Zero(C.rows(), d);
      Vector cnt = Vector::Zero(C.rows());
      for (Index i = 0; i < n; ++i) {
        Index arg = 0;
        double b = std::numeric_limits<double>::infinity();
        for (Index c = 0; c < C.rows(); ++c) {
          const double dd = (points.row(i) - C.row(c)).squaredNorm();
          if (dd < b) {
            b = dd;
            arg = c;
          }
        }
        sum.row(arg) += points.row(i);
        cnt[arg] += 1.0;
      }
      Matrix Cn = C;
      for (Index c = 0; c < C.rows(); ++c)
        if (cnt[c] > 0.0) Cn.row(c) = sum.row(c) / cnt[c];
      if ((Cn - C).norm() == 0.0) break;
      C = Cn;
    }
    const double cost = clustering_cost(points, C, 2.0);
    if (cost < best_cost) {
      best_cost = cost;
      best_C = C;
    }
  }
  return best_C;
}

}  // namespace coreset
