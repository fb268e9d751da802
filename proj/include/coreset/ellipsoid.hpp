#pragma once

#include "coreset/rng.hpp"
#include "coreset/types.hpp"

namespace coreset {

enum class MveeMethod { coordinate_ascent, leverage_sampled };

struct MveeOptions {
  /// Iteration cap; 0 selects 10000·d.
  long max_iters = 0;
  /// Failure probability and oversampling constant of the sampled variant.
  double delta = 0.1;
  double sample_const = 1.0;
};

/// Weighted coreset of the symmetric point set {±a_i}. Weights are on the
/// scale Σu = d so the shape AᵀUA has witnesses a_iᵀ(AᵀUA)⁻¹a_i ≤ 1+ε.
struct EllipsoidCoreset {
  IndexList support;
  WeightVector weights;
  Matrix shape;
  Vector witnesses;
  MveeMethod method = MveeMethod::coordinate_ascent;
  double eps = 0.0;
  long iterations = 0;
  /// Sampled variant only: oversampling factor β and per-row keep probabilities.
  double beta = 0.0;
  Vector keep_prob;
};

EllipsoidCoreset mvee_coreset(const Matrix& A, double eps, MveeMethod method, SeededRng& rng,
                              const MveeOptions& opts = {});

/// Subset S with every row a_i = A_Sᵀx, x = (A_Sᵀ)⁺a_i and ‖x‖₂ ≤ 1+ε.
struct SpanningSet {
  IndexList support;
  double eps = 0.0;
  /// certificates[i] = ‖(A_Sᵀ)⁺a_i‖₂.
  Vector certificates;
  [[nodiscard]] double max_certificate() const { return certificates.size() ? certificates.maxCoeff() : 0.0; }
};

/// ‖(A_Sᵀ)⁺a_i‖₂ for every row i.
Vector spanning_certificates(const Matrix& A, const IndexList& S);

SpanningSet l2_spanning_set(const Matrix& A, double eps, SeededRng& rng);

struct LinfEmbedding {
  SpanningSet set;
  /// ‖Ax‖_∞ ≤ kappa·‖A_S x‖_∞ for all x.
  double kappa = 1.0;
};

LinfEmbedding linf_embedding_subset(const Matrix& A, double eps, MveeMethod method, SeededRng& rng,
                                    const MveeOptions& opts = {});

/// Average of the k largest |y_i| (missing entries count as zero).
double avg_top_k(const Vector& y, Index k);

struct AvgTopKEmbedding {
  SpanningSet set;
  /// AT_k(A_S x) ≤ AT_k(Ax) ≤ distortion·AT_k(A_S x).
  double distortion = 1.0;
  Index parts = 1;
};

AvgTopKEmbedding avg_top_k_embedding(const Matrix& A, Index k, double eps, SeededRng& rng);

struct WellCondDecomposition {
  Matrix U;  // n×s, columns with ‖·‖_p ≤ 1
  Matrix V;  // s×d, ‖V e_j‖₂ ≤ c_prime·‖L e_j‖_p
  IndexList columns;
  double c_prime = 1.0;
};

WellCondDecomposition well_cond_decomposition(const Matrix& L, Index k, double p, double eps = 0.25);

struct LpSpanning {
  Matrix R;  // d×s change of basis; columns of AR have unit ℓp norm
  /// Largest min-norm ‖y‖₂ with Ax = ARy observed over the internal test set.
  double c_measured = 0.0;
  Index net_size = 0;
  Index net_columns = 0;
};

LpSpanning lp_subspace_spanning(const Matrix& A, double p, SeededRng& rng, double eps = 0.25);

/// Min-norm ‖y‖₂ with R y = x (equivalently ARy = Ax when A has full column rank).
double lp_spanning_coefficient(const LpSpanning& sp, const Vector& x);

/// max_i ‖a_iᵀX‖₂ / max_{i∈S} ‖a_iᵀX‖₂.
double cascaded_inf_embedding_check(const Matrix& A, const SpanningSet& S, const Matrix& X);

}  // namespace coreset
