#pragma once

#include <vector>

#include "coreset/online_subspace.hpp"
#include "coreset/rng.hpp"
#include "coreset/types.hpp"

namespace coreset {

/// Streaming (k,p)-clustering that opens centers with probability min(1, d(x,C)^p / f_r).
class OnlineClusterer {
 public:
  struct RoundChange {
    Index at = 0;        // stream position after which the round advanced
    Index round = 0;     // new round number
    double threshold = 0.0;
  };

  OnlineClusterer(Index d, Index k, double p, double w_star, Index n_hint, SeededRng rng);

  /// Assigns x to its closest center (after possibly opening x); returns the center id.
  Index push(const Vector& x);

  [[nodiscard]] const std::vector<Vector>& centers() const { return centers_; }
  [[nodiscard]] const IndexList& center_rows() const { return center_rows_; }
  [[nodiscard]] const IndexList& assignment() const { return assignment_; }
  [[nodiscard]] const std::vector<double>& costs() const { return costs_; }  // d(x, C)^p at arrival
  [[nodiscard]] const std::vector<RoundChange>& round_log() const { return rounds_; }
  [[nodiscard]] Index round() const { return round_; }
  [[nodiscard]] Index round_count() const { return q_; }
  [[nodiscard]] double threshold() const { return f_; }
  [[nodiscard]] double initial_threshold() const { return f1_; }
  [[nodiscard]] double round_cap() const { return cap_; }
  [[nodiscard]] double total_cost() const;
  /// Distance^p from x to the nearest center (+∞ when no center is open).
  [[nodiscard]] double distance_p(const Vector& x, Index* which = nullptr) const;

 private:
  Index d_;
  Index k_;
  double p_;
  SeededRng rng_;
  double f1_;
  double f_;
  double cap_;
  Index round_ = 1;
  Index q_ = 0;
  Index seen_ = 0;
  std::vector<Vector> centers_;
  IndexList center_rows_;
  IndexList assignment_;
  std::vector<double> costs_;
  std::vector<RoundChange> rounds_;
};

/// Default w* = (min nonzero pairwise distance among the first 2k points)^p (1 if none).
double default_w_star(const Matrix& points, Index k, double p);
/// Default Wᴼᴸ = n·(max pairwise distance)^p.
double default_W_upper(const Matrix& points, double p);

OnlineClusterer online_cluster(const Matrix& points, Index k, double p, double w_star, SeededRng& rng);

struct ClusterSensitivity {
  Vector sigma;        // c0·Σ over copies of (d(a_i,C)^p/v + 1/|S_i|)
  Index reps = 0;
  double total = 0.0;
  std::vector<Index> centers_per_copy;
};

ClusterSensitivity cluster_sensitivity(const Matrix& points, Index k, double p, double w_star, Index reps,
                                       SeededRng& rng, double c0 = 4.0);

struct ClusterPlan {
  Vector probabilities;
  IndexList center_ids;   // bicriteria cluster of each point
  Index num_centers = 0;
  double beta1 = 0.0;
  double beta2 = 0.0;
};

/// Online sampling probabilities min{1, max{β₁ε^{−(p+1)}·d(a_i,B)^p/v_i, β₂ε^{−2}/|P_i|}} with
/// β₁ = c(dk ln n + ln 1/δ), β₂ = c(ln|B| + ln 1/δ), computed from one online bicriteria run.
ClusterPlan cluster_sampling_plan(const Matrix& points, Index k, double p, double eps, double delta, SeededRng& rng,
                                  double c = 2.0, double w_star = 0.0);

struct ClusterCoreset {
  StrongCoreset coreset;
  IndexList center_ids;  // bicriteria cluster of each kept point
  ClusterPlan plan;
};

/// Independent Bernoulli draws from a plan; kept points get weight 1/p_i.
ClusterCoreset sample_cluster_plan(const ClusterPlan& plan, double eps, Index k, double p, SeededRng& rng);

ClusterCoreset cluster_coreset(const Matrix& points, Index k, double p, double eps, double delta, SeededRng& rng,
                               double c = 2.0, double w_star = 0.0);

/// Σ_i w_i·min_c ‖x_i − c‖^p over a center set (rows of C).
double clustering_cost(const Matrix& points, const Matrix& centers, double p, const Vector& weights = Vector());

/// Offline baseline: k-means++ seeding followed by Lloyd iterations (best of `restarts`).
Matrix kmeanspp(const Matrix& points, Index k, SeededRng& rng, int restarts = 5, int iters = 50);

}  // namespace coreset
