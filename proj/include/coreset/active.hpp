#pragma once

#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "coreset/lewis.hpp"
#include "coreset/rng.hpp"
#include "coreset/solvers.hpp"
#include "coreset/types.hpp"

namespace coreset {

/// Label access with exact accounting: each index is counted on its first read only.
class LabelOracle {
 public:
  explicit LabelOracle(std::function<double(Index)> source, Index n);
  static LabelOracle from_vector(Vector b);
  /// Lazily reads one value per line from a text file (no header).
  static LabelOracle from_file(const std::string& path);

  double read(Index i);
  [[nodiscard]] Index reads() const { return static_cast<Index>(seen_.size()); }
  [[nodiscard]] Index size() const { return n_; }
  [[nodiscard]] bool was_read(Index i) const { return seen_.count(i) > 0; }

 private:
  std::function<double(Index)> source_;
  Index n_;
  std::unordered_set<Index> seen_;
};

struct ActiveConfig {
  double theta = 4.0;          // Θ(1) in the sampling probabilities
  double polylog_exp = 2.0;    // γ = ε / (log₂(2/ε))^polylog_exp
  double ell_const = 8.0;      // ℓ = ⌈ell_const·ln(1/δ)⌉ candidates
  Index ell_override = 0;
  double online_weight_const = 1.0;  // online ‖w‖₁ bound c·d·log₂ n
  SolverOptions solver{500, 1e-12};
};

struct ActivePlan {
  Vector probabilities;
  double beta = 0.0;
  double gamma = 0.0;
  double eps = 0.0;
  double delta = 0.0;  // per-plan failure rate
  double alpha = 1.0;
  double weight_sum = 0.0;
  double expected_queries = 0.0;  // Σ p_i
};

/// p_i = min{Θ·(p/2)^{(p/2)/(1−2/p)}/α^{p/2} · w_i/(dβ), 1} with
/// β = αε^p / (γ‖w‖₁^{p/2}[(ln(d‖w‖₁))² ln n + ln(1/δ)]).
ActivePlan active_plan(const Vector& w, double alpha, Index d, double p, double eps, double delta,
                       const ActiveConfig& cfg = {});

/// Candidate selection: τ is the ⌊0.8ℓ²⌋-th smallest ordered-pair distance ‖A(x_i − x_j)‖_p;
/// returns the lowest index i with ‖A(x_i − x_j)‖_p ≤ τ for at least ℓ/2 indices j.
Index median_select(const Matrix& A, const std::vector<Vector>& candidates, double p);

struct ActiveCandidate {
  Vector x;
  IndexList rows;
  double sampled_cost = 0.0;
  double kkt = 0.0;
  bool converged = false;
  bool full_rank = false;  // sampled rows span the column space
};

struct ActiveResult {
  Vector x;
  Index chosen = 0;
  Index queries_realized = 0;
  double queries_expected = 0.0;
  double query_budget = 0.0;  // instantiated d^{p/2}ε^{−(p−1)}[(ln d)² ln n + ln 1/δ]·(log₂ 2/ε)²·ln(1/δ)
  std::vector<ActiveCandidate> candidates;
  ActivePlan plan;
  Index ell = 0;
};

double active_query_budget(Index n, Index d, double p, double eps, double delta, double c = 1.0);

ActiveResult active_lp_solve(const Matrix& A, LabelOracle& oracle, double p, double eps, double delta, SeededRng& rng,
                             const ActiveConfig& cfg = {});

/// Same plan with online Lewis weights computed on arrival; each row's query decisions are made
/// when it arrives and never revisited.
ActiveResult active_online_lp_solve(const Matrix& A, LabelOracle& oracle, double p, double eps, double delta,
                                    SeededRng& rng, const ActiveConfig& cfg = {});

struct LargeDistortionResult {
  Vector x;
  IndexList rows;
  Index queries = 0;
  double certificate = 0.0;   // a-priori distortion bound (√d or d^{(1−q/p)/2}, constant 1)
  double lemma_bound = 0.0;   // ((γ+1)αβ + 1) from the measured quantities where available
  std::string mode;
};

/// ℓ∞: read b on a well-conditioned spanning set and solve the subsampled Chebyshev problem.
LargeDistortionResult active_linf(const Matrix& A, LabelOracle& oracle, SeededRng& rng, double eps = 0.25);
/// ℓp → ℓq: reweight by W^{1/q−1/p} (ℓp Lewis weights), then ℓq Lewis sampling, then solve in ℓq.
LargeDistortionResult active_lp_q(const Matrix& A, LabelOracle& oracle, double p, double q, SeededRng& rng,
                                  double eps = 0.5, double delta = 0.1);

}  // namespace coreset
