#pragma once

#include "coreset/loss.hpp"
#include "coreset/types.hpp"

namespace coreset {

struct SolverOptions {
  int max_iters = 200;
  /// Relative stationarity tolerance ‖Aᵀ∇‖ / (‖A‖_F·‖∇‖).
  double tol = 1e-10;
};

struct SolveResult {
  Vector x;
  /// Objective in un-rooted form: Σ w_i |r_i|^p (ℓp), Σ g(r_i) (g), max |r_i| (ℓ∞).
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Relative first-order stationarity residual (ℓp, g) or relative duality gap (ℓ∞).
  double kkt = 0.0;
  /// ℓ∞ only: certified lower bound on the optimum.
  double lower_bound = 0.0;
};

/// min_x Σ_i w_i |a_iᵀx − b_i|^p for p ∈ [1, ∞). Newton with backtracking for
/// p ≥ 2 (p-homotopy above 8), smoothed IRLS for p < 2. Empty `weights` = all ones.
SolveResult lp_regression(const Matrix& A, const Vector& b, double p, const Vector& weights = Vector(),
                          const SolverOptions& opts = {});

/// Relative stationarity residual of x for the weighted ℓp objective.
double lp_kkt_residual(const Matrix& A, const Vector& b, double p, const Vector& x,
                       const Vector& weights = Vector());

/// min_x ‖Ax − b‖_∞ by Lawson's reweighting; stops once max|r| ≤ (1+gap)·lower bound.
SolveResult linf_regression(const Matrix& A, const Vector& b, double gap = 1e-3, int max_iters = 20000);

/// min_x Σ_i g(a_iᵀx − b_i) by majorize–minimize IRLS (weights g'(r)/r, floor 1e-12)
/// from the least-squares start; returns the best iterate by g-cost.
SolveResult g_regression(const Matrix& A, const Vector& b, const LossSpec& g, const SolverOptions& opts = {});

/// min_X Σ_i w_i ‖b_iᵀX − y_i‖₂^p (rows b_i of B, y_i of Y) by damped IRLS on row norms.
struct RowNormResult {
  Matrix X;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  double kkt = 0.0;
};
RowNormResult row_norm_regression(const Matrix& B, const Matrix& Y, double p, const Vector& weights = Vector(),
                                  const SolverOptions& opts = {});

}  // namespace coreset
