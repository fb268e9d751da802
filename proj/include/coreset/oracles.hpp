#pragma once

#include <optional>
#include <string>

#include "coreset/css.hpp"
#include "coreset/types.hpp"

namespace coreset {

struct BruteCssResult {
  IndexList subset;
  double residual = 0.0;
  long subsets_checked = 0;
};

/// Exhaustive search over all column subsets of the given size (C(d, size) ≤ 10⁶).
BruteCssResult brute_css(const Matrix& A, Index subset_size, const CssObjective& obj);

struct ExactRegression {
  Vector x;
  double opt = 0.0;  // ‖Ax* − b‖_p (rooted) or max-norm
  bool certified = false;
  std::string method;
};

/// ℓp regression oracle for p ∈ [1, ∞]: Newton/IRLS with multi-start certified by
/// KKT ≤ 1e-10 (1 < p < ∞), vertex enumeration (p = 1 small, p = ∞ with d ≤ 3),
/// Lawson with a certified lower bound otherwise (p = ∞).
ExactRegression exact_lp_regression(const Matrix& A, const Vector& b, double p);

struct WeightedRows {
  IndexList indices;
  Vector weights;
};

struct CoresetCheck {
  double max_deviation = 0.0;
  long net_size = 0;
  double resolution_deg = 0.0;
};

/// max over a net of rank-k subspaces F of |Σ_S w_i c_i(F) − Σ c_i(F)| / Σ c_i(F),
/// with c_i(F) = ‖a_iᵀ(I − P_F)‖₂^p. The net uses the C(d,k) coordinate charts
/// rowspan[I_k | M] with tan-angle grids of the given resolution; the resolution is
/// coarsened automatically when the net would exceed `max_net` subspaces.
CoresetCheck strong_coreset_check(const Matrix& A, const WeightedRows& coreset, Index k, double p,
                                  double resolution_deg = 2.0, long max_net = 2000000);

/// sup over grid center tuples (k ≤ 2, d = 2) of cost_i(C)/cost(C), excluding
/// zero-cost tuples. Grid spans the bounding box with `grid` points per axis.
Vector exact_cluster_sensitivity(const Matrix& points, Index k, double p, Index grid = 50);

/// max over grid center tuples (k ≤ 2, d = 2) of |Σ_S w_i cost_i(C) − Σ cost_i(C)| / Σ cost_i(C).
double cluster_coreset_grid_check(const Matrix& points, const WeightedRows& coreset, Index k, double p,
                                  Index grid = 50);

/// Deterministic 64-bit FNV-1a hash of a matrix plus a parameter string.
std::string instance_hash(const Matrix& A, const std::string& params);

struct OracleReport {
  std::string instance_hash;
  double value = 0.0;
  std::string method;
  double runtime_sec = 0.0;
};

/// Directory of JSON OracleReports keyed by instance hash and method.
class OracleCache {
 public:
  explicit OracleCache(std::string dir);
  [[nodiscard]] std::optional<OracleReport> get(const std::string& hash, const std::string& method) const;
  void put(const OracleReport& report) const;

 private:
  [[nodiscard]] std::string path_for(const std::string& hash, const std::string& method) const;
  std::string dir_;
};

}  // namespace coreset
