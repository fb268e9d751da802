#include "coreset/css.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "coreset/lewis.hpp"
#include "coreset/linalg.hpp"
#include "coreset/parallel.hpp"

namespace coreset {

CssObjective CssObjective::linf(Index n) {
  CssObjective o;
  o.kind = Kind::linf_surrogate;
  o.p = 2.0 * std::ceil(std::log2(std::max<double>(2.0, static_cast<double>(n))));
  return o;
}

NormMode CssObjective::report_mode() const {
  switch (kind) {
    case Kind::g: return NormMode::gnorm(loss);
    case Kind::lp: return NormMode::entrywise(p);
    case Kind::linf_surrogate: return NormMode::entrywise_inf();
  }
  return NormMode::entrywise(2.0);
}

std::string CssObjective::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::g: os << "g:" << loss.name(); break;
    case Kind::lp: os << "lp:" << p; break;
    case Kind::linf_surrogate: os << "linf(surrogate p=" << p << ")"; break;
  }
  return os.str();
}

SolveResult g_regression_column(const Matrix& B, const Vector& b, const LossSpec& loss) {
  return g_regression(B, b, loss);
}

SolveResult fit_column(const Matrix& B, const Vector& b, const CssObjective& obj, bool final_fit) {
  if (B.cols() == 0) {
    SolveResult r;
    r.x = Vector::Zero(0);
    switch (obj.kind) {
      case CssObjective::Kind::g: {
        double s = 0.0;
        for (Index i = 0; i < b.size(); ++i) s += obj.loss(b[i]);
        r.cost = s;
        break;
      }
      case CssObjective::Kind::lp: r.cost = vec_pow_sum(b, obj.p); break;
      case CssObjective::Kind::linf_surrogate: r.cost = b.size() ? b.cwiseAbs().maxCoeff() : 0.0; break;
    }
    return r;
  }
  switch (obj.kind) {
    case CssObjective::Kind::g: return g_regression(B, b, obj.loss);
    case CssObjective::Kind::lp: return lp_regression(B, b, obj.p);
    case CssObjective::Kind::linf_surrogate: {
      if (final_fit) {
        SolveResult sur = lp_regression(B, b, obj.p);
        SolveResult lf = linf_regression(B, b, 1e-4, 5000);
        if (sur.x.size() && (B * sur.x - b).cwiseAbs().maxCoeff() < lf.cost) {
          lf.x = sur.x;
          lf.cost = (B * sur.x - b).cwiseAbs().maxCoeff();
        }
        return lf;
      }
      SolveResult r = lp_regression(B, b, obj.p);
      r.cost = (B * r.x - b).cwiseAbs().maxCoeff();
      return r;
    }
  }
  return {};
}

namespace {

double aggregate(const std::vector<double>& costs, const CssObjective& obj) {
  switch (obj.kind) {
    case CssObjective::Kind::g: return std::accumulate(costs.begin(), costs.end(), 0.0);
    case CssObjective::Kind::lp: return std::pow(std::accumulate(costs.begin(), costs.end(), 0.0), 1.0 / obj.p);
    case CssObjective::Kind::linf_surrogate: {
      double m = 0.0;
      for (double c : costs) m = std::max(m, c);
      return m;
    }
  }
  return 0.0;
}

/// Fits every listed column of A on A|^H; out[c] is the cost of column cols[c].
std::vector<double> fit_columns(const Matrix& A, const IndexList& H, const IndexList& cols, const CssObjective& obj) {
  const Matrix B = select_cols(A, H);
  std::vector<double> out(cols.size());
  parallel_for(cols.size(), [&](std::size_t c) {
    const Index j = cols[c];
    if (std::find(H.begin(), H.end(), j) != H.end()) {
      out[c] = 0.0;
      return;
    }
    out[c] = fit_column(B, A.col(j), obj, false).cost;
  });
  return out;
}

int default_reps(Index d) {
  const double ll = std::log2(std::max(2.0, std::log2(std::max<double>(2.0, static_cast<double>(d)))));
  return static_cast<int>(std::ceil(ll)) + 2;
}

}  // namespace

double css_residual(const Matrix& A, const IndexList& S, const CssObjective& obj, Matrix* X_out) {
  const Matrix B = select_cols(A, S);
  const Index d = A.cols();
  std::vector<double> costs(static_cast<std::size_t>(d));
  Matrix X = Matrix::Zero(static_cast<Index>(S.size()), d);
  parallel_for(static_cast<std::size_t>(d), [&](std::size_t j) {
    const SolveResult r = fit_column(B, A.col(static_cast<Index>(j)), obj, true);
    if (r.x.size()) X.col(static_cast<Index>(j)) = r.x;
    costs[j] = r.cost;
  });
  if (X_out) *X_out = X;
  // Report through the independent norm of the residual matrix.
  const Matrix R = A - B * X;
  return norm(R, obj.report_mode());
}

CssResult css_rounds(const Matrix& A, Index s, const CssObjective& obj, const CssConstants& c, SeededRng& rng) {
  check_finite(A, "css");
  require(s >= 1, "css: s must be positive");
  const Index d = A.cols();
  CssResult out;
  out.s = s;
  out.mode = obj.report_mode();
  const int reps = c.repetitions > 0 ? c.repetitions : default_reps(d);
  IndexList T(static_cast<std::size_t>(d));
  std::iota(T.begin(), T.end(), Index{0});
  std::set<Index> chosen;
  // Best known per-column cost against the columns selected so far (monotone).
  std::vector<double> best_cost(static_cast<std::size_t>(d), std::numeric_limits<double>::infinity());
  {
    const std::vector<double> c0 = fit_columns(A, {}, T, obj);
    for (Index j = 0; j < d; ++j) best_cost[static_cast<std::size_t>(j)] = c0[static_cast<std::size_t>(j)];
  }
  std::uint64_t round = 0;
  while (static_cast<double>(T.size()) >= c.loop_guard * static_cast<double>(s)) {
    CssRound tr;
    const Index dl = static_cast<Index>(T.size());
    tr.surviving = dl;
    double tl = c.sample_mult * static_cast<double>(s) * (c.sample_log ? std::log2(static_cast<double>(dl)) : 1.0);
    tr.sample_size = std::min<Index>(dl, static_cast<Index>(std::ceil(tl)));
    const Index remove = std::max<Index>(1, static_cast<Index>(std::floor(static_cast<double>(dl) / c.removal_div)));
    double best_C = std::numeric_limits<double>::infinity();
    IndexList best_H, best_F;
    std::vector<double> best_costs;
    for (int t = 0; t < reps; ++t) {
      SeededRng r = rng.child(round).child(static_cast<std::uint64_t>(t));
      const auto pick = sample_without_replacement(static_cast<long>(dl), static_cast<long>(tr.sample_size), r);
      IndexList H;
      for (long v : pick) H.push_back(T[static_cast<std::size_t>(v)]);
      std::sort(H.begin(), H.end());
      const std::vector<double> costs = fit_columns(A, H, T, obj);
      IndexList order(T.size());
      std::iota(order.begin(), order.end(), Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return costs[static_cast<std::size_t>(a)] < costs[static_cast<std::size_t>(b)];
      });
      double C = 0.0;
      IndexList F;
      for (Index m = 0; m < remove; ++m) {
        const Index pos = order[static_cast<std::size_t>(m)];
        C += costs[static_cast<std::size_t>(pos)];
        F.push_back(T[static_cast<std::size_t>(pos)]);
      }
      tr.rep_costs.push_back(C);
      if (C < best_C) {
        best_C = C;
        best_H = H;
        best_F = F;
        best_costs = costs;
        tr.chosen_rep = t;
      }
    }
    tr.sample = best_H;
    tr.removed = best_F;
    std::sort(tr.removed.begin(), tr.removed.end());
    double rmax = 0.0;
    double smin = std::numeric_limits<double>::infinity();
    for (std::size_t c2 = 0; c2 < T.size(); ++c2) {
      const bool gone = std::binary_search(tr.removed.begin(), tr.removed.end(), T[c2]);
      if (gone) {
        rmax = std::max(rmax, best_costs[c2]);
      } else {
        smin = std::min(smin, best_costs[c2]);
      }
    }
    tr.removed_max_cost = rmax;
    tr.surviving_min_cost = smin;
    chosen.insert(best_H.begin(), best_H.end());
    IndexList next;
    for (Index j : T)
      if (!std::binary_search(tr.removed.begin(), tr.removed.end(), j)) next.push_back(j);
    T = next;
    // Residual against everything selected so far.
    const IndexList sel(chosen.begin(), chosen.end());
    const std::vector<double> now = fit_columns(A, sel, [&] {
      IndexList all(static_cast<std::size_t>(d));
      std::iota(all.begin(), all.end(), Index{0});
      return all;
    }(), obj);
    for (std::size_t j = 0; j < now.size(); ++j) best_cost[j] = std::min(best_cost[j], now[j]);
    tr.residual = aggregate(best_cost, obj);
    out.trace.push_back(tr);
    ++round;
  }
  chosen.insert(T.begin(), T.end());
  out.selected.assign(chosen.begin(), chosen.end());
  out.rounds = static_cast<Index>(round);
  out.residual = css_residual(A, out.selected, obj, &out.X);
  return out;
}

CssResult css_gnorm(const Matrix& A, Index k, const LossSpec& loss, SeededRng& rng, const CssConstants& c) {
  require(k >= 1, "css_gnorm: k must be positive");
  const double kk = static_cast<double>(k);
  const double ll = kk > 2.0 ? std::log2(std::log2(kk)) : 0.0;
  const Index s = static_cast<Index>(std::ceil(c.s_const * kk * std::max(1.0, ll)));
  CssResult out = css_rounds(A, s, CssObjective::gnorm(loss), c, rng);
  const double ld = std::log2(std::max<double>(2.0, static_cast<double>(A.cols())));
  out.budget_guarantee = kk * std::max(1.0, ll) * ld * ld;
  out.budget_listing = kk * ld * ld;
  return out;
}

CssResult css_boost(const Matrix& A, Index s, const CssObjective& obj, SeededRng& rng, const CssConstants& c) {
  CssResult out = css_rounds(A, s, obj, c, rng);
  const double ld = std::log2(std::max<double>(2.0, static_cast<double>(A.cols())));
  out.budget_guarantee = static_cast<double>(s) * ld;
  out.budget_listing = static_cast<double>(s) * ld;
  return out;
}

LpRankFactor lp_rank_factor(const Matrix& A, Index k, double p, SeededRng& rng, double c) {
  require(p >= 2.0, "lp_rank_factor: p must be >= 2");
  check_finite(A, "lp_rank_factor");
  const Index d = A.cols();
  require(k >= 1 && k <= std::min(A.rows(), d), "lp_rank_factor: k out of range");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd{A}, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Index r = std::min<Index>(k, std::max<Index>(numerical_rank(A), 1));
  const Matrix V = svd.matrixV().leftCols(r);  // d×r, row j ↔ column j of A
  LpRankFactor out;
  const LewisWeights lw = compute_lewis(V, p);
  out.lewis = lw.w;
  Vector scale(d);
  for (Index j = 0; j < d; ++j) scale[j] = lw.w[j] > 0.0 ? std::pow(lw.w[j], 0.5 - 1.0 / p) : 0.0;
  const Vector tau = leverage_scores(Matrix(scale.asDiagonal() * V));
  const double m = std::ceil(c * static_cast<double>(k) * std::log(static_cast<double>(k) + 1.0));
  for (Index j = 0; j < d; ++j) {
    if (rng.bernoulli(std::min(1.0, m * tau[j] / static_cast<double>(r)))) out.selected.push_back(j);
  }
  // Make sure the sampled columns span the surrogate's row space.
  IndexList order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return tau[a] > tau[b]; });
  for (Index j : order) {
    if (numerical_rank(select_rows(V, out.selected)) >= r) break;
    if (std::find(out.selected.begin(), out.selected.end(), j) == out.selected.end()) {
      out.selected.push_back(j);
      std::sort(out.selected.begin(), out.selected.end());
    }
  }
  out.residual = css_residual(A, out.selected, CssObjective::lp(p), &out.X);
  return out;
}

Matrix hard_spanning_lb(Index d) {
  require(d >= 1, "hard_spanning_lb: d must be positive");
  Matrix A = Matrix::Zero(d + 1, d);
  A.topRows(d).setIdentity();
  A.row(d).setOnes();
  return A;
}

Matrix hard_linf_css(Index k, double c, SeededRng& rng) {
  require(k >= 1 && c >= 1.0, "hard_linf_css: need k >= 1, c >= 1");
  const Index r = static_cast<Index>(std::llround(std::pow(static_cast<double>(k), c)));
  require(r <= 20, "hard_linf_css: 2^r rows too many to materialize");
  const Index cube = Index{1} << r;
  Matrix A(k + cube, r);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < r; ++j) A(i, j) = static_cast<double>(k) * rng.normal();
  for (Index m = 0; m < cube; ++m)
    for (Index j = 0; j < r; ++j) A(k + m, j) = ((m >> j) & 1) ? -1.0 : 1.0;
  return A;
}

PtbCode hard_ptb_code(Index d, double q, SeededRng& rng, double C, int max_retries) {
  require(d >= 1 && q >= 1.0, "hard_ptb_code: need d >= 1, q >= 1");
  const Index count = static_cast<Index>(std::llround(std::pow(static_cast<double>(d), q)));
  const double limit = C * std::sqrt(static_cast<double>(d));
  PtbCode out;
  out.codewords.resize(count, d);
  double achieved = 0.0;
  for (Index i = 0; i < count; ++i) {
    bool placed = false;
    double best_row_corr = std::numeric_limits<double>::infinity();
    Vector best_row(d);
    for (int attempt = 0; attempt < max_retries && !placed; ++attempt) {
      Vector x(d);
      for (Index j = 0; j < d; ++j) x[j] = rng.rademacher();
      double worst = 0.0;
      for (Index m = 0; m < i; ++m) worst = std::max(worst, std::abs(out.codewords.row(m).dot(x)));
      if (worst < best_row_corr) {
        best_row_corr = worst;
        best_row = x;
      }
      placed = worst <= limit;
    }
    if (!placed) {
      std::ostringstream os;
      os << "hard_ptb_code: rejection cap exceeded at codeword " << i << "; best achieved max correlation "
         << best_row_corr << " > " << limit;
      throw BudgetExceeded(os.str());
    }
    out.codewords.row(i) = best_row.transpose();
    achieved = std::max(achieved, best_row_corr);
  }
  out.max_correlation = achieved;
  out.constant = achieved / std::sqrt(static_cast<double>(d));
  return out;
}

std::pair<Vector, Index> ActiveLbInstance::sample_target(SeededRng& rng) const {
  const Index n = A.rows();
  Vector b = Vector::Zero(n);
  if (rng.bernoulli(0.5)) return {b, -1};
  const Index I = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  b[I] = static_cast<double>(A.cols());
  return {b, I};
}

ActiveLbInstance hard_active_lb(double p, Index d, double eps, SeededRng& rng, double c) {
  require(p > 2.0 && eps > 0.0 && eps < 1.0, "hard_active_lb: need p > 2 and eps in (0,1)");
  ActiveLbInstance inst;
  inst.code = hard_ptb_code(d, p / 2.0, rng);
  inst.copies = std::max<Index>(1, static_cast<Index>(std::ceil(c / std::pow(eps, p - 1.0))));
  const Index m = inst.code.codewords.rows();
  inst.A.resize(m * inst.copies, d);
  for (Index w = 0; w < m; ++w)
    for (Index s = 0; s < inst.copies; ++s) inst.A.row(w * inst.copies + s) = inst.code.codewords.row(w);
  return inst;
}

}  // namespace coreset
