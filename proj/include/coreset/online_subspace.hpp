#pragma once

#include <memory>
#include <vector>

#include "coreset/lewis.hpp"
#include "coreset/rng.hpp"
#include "coreset/solvers.hpp"
#include "coreset/types.hpp"

namespace coreset {

struct RoundedMatrix {
  Matrix rounded;      // granularity · integers
  Matrix integers;     // integer-valued entries
  double granularity = 0.0;
  double delta = 0.0;  // max |integer entry|
  /// Bound ε^p·λ̃ on ‖A − rounded‖_{p,2}^p implied by the granularity.
  double error_bound = 0.0;
};

/// Entrywise rounding to multiples of ε·n^{−1/p}·d^{−1/2}·λ̃^{1/p}.
RoundedMatrix integer_round(const Matrix& A, double eps, double lambda_lower_hint, double p);
/// Entrywise rounding to multiples of a given granularity.
RoundedMatrix round_to_grid(const Matrix& A, double granularity);

struct OnlineSubspaceConfig {
  Index k = 1;
  double p = 2.0;
  Index n_hint = 0;          // stream length hint (required > 0 for the streaming API)
  double delta_hint = 0.0;   // entry bound Δ (≤ 0 → 1)
  double c_t = 1.0;          // t = ⌈c_t·(k log₂ k + log₂² n)⌉
  double c0 = 4.0;           // prefactor of the sensitivity estimate
  double c_lewis = 1.0;      // row sampler for the sketched rows keeps w.p. min(1, c_lewis·t·ln(nΔ)·w)
  double c_reps = 8.0;       // R = ⌈c_reps·ln(n/δ)⌉ copies
  double c_sample = 1.0;     // prefactor of the sampling rate β
  double c_budget = 1.0;     // prefactor of the total-sensitivity budget
  double beta_override = 0.0;  // > 0 replaces the β formula
  Index reps_override = 0;     // > 0 replaces R
  double grid_power = 4.0;     // refit coefficients are rounded to multiples of (nΔ)^{−grid_power}
  SolverOptions refit{50, 1e-6};
};

/// One copy of the online sensitivity estimator.
class OnlineSensitivityState {
 public:
  OnlineSensitivityState(Index d, const OnlineSubspaceConfig& cfg, SeededRng rng);

  /// Consumes the next row and returns this copy's (unclamped) sensitivity estimate.
  double push(const Vector& a);

  [[nodiscard]] Index sketch_rows() const { return t_; }
  [[nodiscard]] bool sketched() const { return sketched_; }
  [[nodiscard]] Index segments() const { return segments_; }
  /// Stream positions where the projection subspace was refreshed.
  [[nodiscard]] const IndexList& segment_starts() const { return segment_starts_; }
  [[nodiscard]] const std::vector<double>& residuals() const { return residuals_; }
  [[nodiscard]] const Matrix& subspace() const { return F_; }  // d × dim, orthonormal columns
  [[nodiscard]] const OnlineLewis& sketch_sampler() const { return l1_; }

 private:
  void refit();

  Index d_;
  OnlineSubspaceConfig cfg_;
  Index t_;
  bool sketched_;
  Matrix G_;  // t × d
  OnlineLewis l1_;
  OnlineLewis l2_;
  std::vector<Vector> kept_g_;
  std::vector<Vector> kept_a_;
  std::vector<double> kept_w_;
  Matrix Y_;  // t × d
  Matrix F_;  // d × dim
  double v_ = 0.0;
  double lewis_factor_;
  Index seen_ = 0;
  Index segments_ = 0;
  IndexList segment_starts_;
  std::vector<double> residuals_;
};

struct StrongCoreset {
  IndexList indices;
  Vector weights;
  double eps = 0.0;
  Index k = 0;
  double p = 0.0;
};

struct OnlineSubspaceTrace {
  std::vector<double> sensitivities;  // clamped, rounded sum over copies
  std::vector<double> raw_sum;        // unclamped sum over copies
  std::vector<double> probabilities;
  Index reps = 0;
  Index t = 0;
  double beta = 0.0;
  double eps_prime = 0.0;
  double sensitivity_budget = 0.0;
  double sensitivity_total = 0.0;
  std::vector<IndexList> segment_starts;  // per copy
  std::vector<Index> sketch_kept;         // per copy
};

/// Streaming coreset: push rows one at a time; decisions are final on return.
class OnlineSubspaceCoreset {
 public:
  OnlineSubspaceCoreset(Index d, const OnlineSubspaceConfig& cfg, double eps, double delta, SeededRng rng);

  /// Returns whether the row was kept (and its weight via coreset()).
  bool push(const Vector& a);

  [[nodiscard]] const StrongCoreset& coreset() const { return coreset_; }
  [[nodiscard]] const OnlineSubspaceTrace& trace() const { return trace_; }
  [[nodiscard]] const std::vector<OnlineSensitivityState>& copies() const { return copies_; }

 private:
  Index d_;
  OnlineSubspaceConfig cfg_;
  SeededRng rng_;
  std::vector<OnlineSensitivityState> copies_;
  StrongCoreset coreset_;
  OnlineSubspaceTrace trace_;
  Index seen_ = 0;
};

/// Instantiated total-sensitivity budget R·c·(t²·ln²(nΔ))^{max(1,p/2)}·max(1, ln² t)·ln n.
double online_sensitivity_budget(Index t, Index n, double Delta, double p, Index reps, double c = 1.0);

/// Runs the streaming coreset over all rows of A (n_hint and Δ default from A).
StrongCoreset online_subspace_coreset(const Matrix& A, Index k, double p, double eps, double delta, SeededRng& rng,
                                      OnlineSubspaceConfig cfg = {}, OnlineSubspaceTrace* trace = nullptr);

struct EntrywiseCoreset {
  StrongCoreset coreset;  // on the sketched rows a_i Gᵀ
  Matrix sketch;          // t × d p-stable matrix G
  Matrix V;               // k × d row factor fitted on the coreset rows
  Matrix U;               // n × k coefficients fitted for every row
  double residual = 0.0;  // ‖A − U V‖_{p,p}
  Index t = 0;
};

/// p-stable sketch to t = max(k+1, ⌈k·(ln n)^c_exp⌉) columns, online coreset on the
/// sketched rows, then a rank-k entrywise ℓp fit restricted to the coreset rows.
EntrywiseCoreset entrywise_online_coreset(const Matrix& A, Index k, double p, SeededRng& rng, double eps = 0.5,
                                          double delta = 0.1, double c_exp = 1.0, OnlineSubspaceConfig cfg = {});

}  // namespace coreset
