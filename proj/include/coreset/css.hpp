#pragma once

#include <string>
#include <vector>

#include "coreset/loss.hpp"
#include "coreset/norms.hpp"
#include "coreset/rng.hpp"
#include "coreset/solvers.hpp"
#include "coreset/types.hpp"

namespace coreset {

/// Per-column fitting objective used by the selection rounds.
struct CssObjective {
  enum class Kind { g, lp, linf_surrogate };
  Kind kind = Kind::g;
  LossSpec loss = LossSpec::huber();
  /// ℓp exponent (lp) or surrogate exponent driving selection (linf_surrogate).
  double p = 2.0;

  static CssObjective gnorm(const LossSpec& g) { return {Kind::g, g, 0.0}; }
  static CssObjective lp(double p) { return {Kind::lp, LossSpec::huber(), p}; }
  /// ℓ∞ through the ℓ_{2⌈log₂ n⌉} surrogate.
  static CssObjective linf(Index n);

  /// Norm the residual is reported in (g: Σg un-rooted, lp: ‖·‖_{p,p}, linf: ‖·‖_{∞,∞}).
  [[nodiscard]] NormMode report_mode() const;
  [[nodiscard]] std::string name() const;
};

/// Fits column b on B under the objective; returns coefficients and per-column cost
/// (Σg, Σ|r|^p, or max|r| respectively).
SolveResult fit_column(const Matrix& B, const Vector& b, const CssObjective& obj, bool final_fit);

/// min_x Σ g(Bx − b) by IRLS (see solvers.hpp).
SolveResult g_regression_column(const Matrix& B, const Vector& b, const LossSpec& loss);

struct CssConstants {
  double loop_guard = 1000.0;   // rounds run while |T_l| ≥ loop_guard·s
  double sample_mult = 160.0;   // t_l = sample_mult·s·log₂ d_l (css_gnorm) or sample_mult·s
  bool sample_log = true;       // whether t_l carries the log₂ d_l factor
  double removal_div = 960.0;   // remove the d_l/removal_div cheapest columns
  int repetitions = 0;          // 0 → ⌈log₂ max(2, log₂ d)⌉ + 2
  double s_const = 1.0;         // s = ⌈s_const·k·max(1, log₂log₂ k)⌉ (css_gnorm only)

  static CssConstants gnorm_defaults() { return {}; }
  static CssConstants boost_defaults() { return {1000.0, 30.0, false, 20.0, 0, 1.0}; }
};

struct CssRound {
  Index surviving = 0;  // d_l
  Index sample_size = 0;  // t_l
  int chosen_rep = 0;
  IndexList sample;   // H chosen
  IndexList removed;  // F_{l,t*}
  std::vector<double> rep_costs;  // C_{l,t}
  double removed_max_cost = 0.0;
  double surviving_min_cost = 0.0;
  double residual = 0.0;  // residual with the columns selected so far
};

struct CssResult {
  IndexList selected;
  Matrix X;  // |S|×d
  double residual = 0.0;
  NormMode mode;
  Index rounds = 0;
  std::vector<CssRound> trace;
  Index s = 0;
  /// Budget formulas instantiated at (k, d): c·k·log log k·(log d)² and k·(log d)².
  double budget_guarantee = 0.0;
  double budget_listing = 0.0;
};

/// Residual of A against A|^S with fresh per-column fits; optionally returns X.
double css_residual(const Matrix& A, const IndexList& S, const CssObjective& obj, Matrix* X_out = nullptr);

/// Round-based selection shared by both listings.
CssResult css_rounds(const Matrix& A, Index s, const CssObjective& obj, const CssConstants& c, SeededRng& rng);

/// Algorithm-1 selection for a g-norm loss, s = ⌈c·k·max(1, log log k)⌉.
CssResult css_gnorm(const Matrix& A, Index k, const LossSpec& loss, SeededRng& rng,
                    const CssConstants& c = CssConstants::gnorm_defaults());

/// Algorithm-2 selection with caller-supplied existential size s.
CssResult css_boost(const Matrix& A, Index s, const CssObjective& obj, SeededRng& rng,
                    const CssConstants& c = CssConstants::boost_defaults());

struct LpRankFactor {
  IndexList selected;
  Matrix X;
  double residual = 0.0;  // ‖A − A|^S X‖_{p,p}
  Vector lewis;           // Lewis weights of the right factor's rows
};

/// Surrogate factorization → Lewis weights of V → leverage sampling of
/// ⌈c·k·ln(k+1)⌉ expected columns → per-column ℓp fits.
LpRankFactor lp_rank_factor(const Matrix& A, Index k, double p, SeededRng& rng, double c = 4.0);

// ---------------------------------------------------------------------------
// Hard instance generators.

Matrix hard_spanning_lb(Index d);

/// First k rows: k·N(0, I_r); last 2^r rows: all of {±1}^r; r = round(k^c).
Matrix hard_linf_css(Index k, double c, SeededRng& rng);

struct PtbCode {
  Matrix codewords;  // d^q × d of ±1 entries
  double max_correlation = 0.0;
  double constant = 0.0;  // max_correlation / √d
};

/// d^q random sign vectors with pairwise |⟨x,y⟩| ≤ C·√d by rejection sampling.
PtbCode hard_ptb_code(Index d, double q, SeededRng& rng, double C = 2.0, int max_retries = 10000);

struct ActiveLbInstance {
  Matrix A;     // s copies of each codeword
  Index copies = 0;
  PtbCode code;
  /// b = 0 or d·e_I; returns (b, I) with I = −1 for the zero target.
  [[nodiscard]] std::pair<Vector, Index> sample_target(SeededRng& rng) const;
};

/// s = max(1, ⌈c/ε^{p−1}⌉) copies of a ptb code with q = p/2.
ActiveLbInstance hard_active_lb(double p, Index d, double eps, SeededRng& rng, double c = 1.0 / 3.0);

}  // namespace coreset
