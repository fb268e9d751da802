#pragma once

#include <optional>

#include "coreset/rng.hpp"
#include "coreset/types.hpp"

namespace coreset {

struct LewisWeights {
  WeightVector w;
  double p = 2.0;
  /// Measured one-sidedness: min_i w_i / τ_i(W^{1/2−1/p}A), clamped to ≤ 1.
  double alpha = 1.0;
  /// d×d change of basis with W^{1/2−1/p}AR having orthonormal columns.
  Matrix basis;
  bool converged = false;
  int iterations = 0;
};

struct LewisOptions {
  double tol = 1e-10;
  int max_iters = 200;
};

/// Fixed-point iteration w ← (a_iᵀ(AᵀW^{1−2/p}A)⁻¹a_i)^{p/2} from leverage scores,
/// damped by θ = 2/p for p ≥ 4. Returns the best iterate flagged when not converged.
LewisWeights compute_lewis(const Matrix& A, double p, const LewisOptions& opts = {});

/// Leverage scores τ_i(W^{1/2−1/p}A) for the given weights.
Vector lewis_leverage(const Matrix& A, const Vector& w, double p);

/// Diagonal sketch: kept row indices (strictly increasing) with positive scales.
struct SamplingMatrix {
  IndexList indices;
  Vector scales;
  Vector probabilities;  // probability of each kept row
  Index n_original = 0;
  [[nodiscard]] Matrix apply(const Matrix& A) const;
  [[nodiscard]] Vector apply(const Vector& b) const;
  [[nodiscard]] Index size() const { return static_cast<Index>(indices.size()); }
};

/// Oversampling factor β for Lewis-weight sampling:
///   p > 2:  c·ε⁻²·d^{p/2−1}·((ln d)²·ln n + ln(1/δ))
///   p ≤ 2:  c·ε⁻²·d·ln d·ln(1/δ)
double lewis_oversampling(double p, Index n, Index d, double eps, double delta, double c = 10.0);

/// Keeps row i independently with probability min(β·w_i, 1), scale 1/prob^{1/p}.
SamplingMatrix lewis_sample(const LewisWeights& lw, double eps, double delta, SeededRng& rng, double c = 10.0);
SamplingMatrix sample_with_probabilities(const Vector& prob, double p, SeededRng& rng);

/// Diagonal W^{1/q−1/p} (entries with w_i = 0 map to 0).
Vector reweight_p_to_q(const LewisWeights& lw, double q);

/// Scalar online Lewis weight: the w ∈ (0,1] solving w^{2/p} = q(1 − w), where
/// q = aᵀM⁻¹a against the previous rows (q = ∞ gives 1).
double online_lewis_scalar(double q, double p);

/// Online one-sided Lewis weights with irrevocable Bernoulli keep decisions.
class OnlineLewis {
 public:
  struct Decision {
    double weight = 0.0;
    double probability = 0.0;
    bool kept = false;
  };

  /// beta ≤ 0 keeps every row.
  OnlineLewis(Index d, double p, double beta, SeededRng rng);

  Decision push(const Vector& a);
  /// q = aᵀ(M + λI)⁻¹a against the rows seen so far (∞ when nothing has been seen).
  [[nodiscard]] double query(const Vector& a) const;

  [[nodiscard]] const std::vector<Decision>& decisions() const { return decisions_; }
  [[nodiscard]] const IndexList& kept() const { return kept_; }
  [[nodiscard]] const Matrix& gram() const { return M_; }
  [[nodiscard]] double weight_sum() const { return weight_sum_; }

 private:
  Index d_;
  double p_;
  double beta_;
  SeededRng rng_;
  Matrix M_;
  double weight_sum_ = 0.0;
  std::vector<Decision> decisions_;
  IndexList kept_;
};

}  // namespace coreset
