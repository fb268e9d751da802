#include "coreset/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "coreset/linalg.hpp"
#include "coreset/norms.hpp"

namespace coreset {

namespace {

Vector ones_if_empty(const Vector& w, Index n) {
  if (w.size() == 0) return Vector::Ones(n);
  if (w.size() != n) throw DimensionMismatch("weight vector length does not match rows");
  return w;
}

double weighted_pow_cost(const Vector& r, double p, const Vector& w) {
  double s = 0.0;
  for (Index i = 0; i < r.size(); ++i) s += w[i] * std::pow(std::abs(r[i]), p);
  return s;
}

/// Weighted least squares min Σ c_i (a_iᵀx − b_i)² via row scaling.
Vector weighted_ls(const Matrix& A, const Vector& b, const Vector& c) {
  const Vector s = c.cwiseMax(0.0).cwiseSqrt();
  Matrix As = s.asDiagonal() * A;
  Vector bs = s.cwiseProduct(b);
  return least_squares(As, bs);
}

/// Newton's method for p ≥ 2 from x0.
SolveResult lp_newton(const Matrix& A, const Vector& b, double p, const Vector& w, Vector x,
                      const SolverOptions& opts) {
  SolveResult res;
  const Index d = A.cols();
  Vector r = A * x - b;
  double scale = r.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    res.x = x;
    res.converged = true;
    return res;
  }
  auto cost_of = [&](const Vector& rr) { return weighted_pow_cost(rr / scale, p, w); };
  double f = cost_of(r);
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const Vector rs = r / scale;
    Vector g1(rs.size()), h(rs.size());
    for (Index i = 0; i < rs.size(); ++i) {
      const double a = std::abs(rs[i]);
      h[i] = w[i] * std::pow(a, p - 2.0);
      g1[i] = h[i] * rs[i];
    }
    const Vector grad = p * (A.transpose() * g1);
    Matrix H = p * (p - 1.0) * (A.transpose() * h.asDiagonal() * A);
    const double ridge = 1e-13 * std::max(H.diagonal().maxCoeff(), 1e-300);
    H.diagonal().array() += ridge;
    const double kkt = grad.norm() / (p * std::max(A.norm() * g1.norm(), 1e-300));
    res.kkt = kkt;
    if (kkt <= opts.tol) {
      res.converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Eigen::MatrixXd{H});
    Vector step = -ldlt.solve(Eigen::VectorXd(grad));
    if (!step.allFinite() || d == 0) break;
    // Backtracking (Armijo) on the scaled objective; step is in x-units/scale.
    const double slope = grad.dot(step);
    double t = 1.0;
    bool accepted = false;
    Vector xn, rn;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + t * scale * step;
      rn = A * xn - b;
      const double fn = cost_of(rn);
      // Near the optimum the cost is flat to rounding; then a step that keeps the
      // cost within rounding and lowers the stationarity residual is accepted.
      if (fn <= f + 1e-4 * t * slope ||
          (fn <= f + 1e-13 * std::abs(f) && lp_kkt_residual(A, b, p, xn, w) < 0.5 * kkt)) {
        accepted = true;
        f = fn;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    x = xn;
    r = rn;
  }
  res.x = x;
  res.iterations = it;
  res.kkt = lp_kkt_residual(A, b, p, x, w);
  res.converged = res.converged || res.kkt <= opts.tol * 10;
  res.cost = weighted_pow_cost(A * x - b, p, w);
  return res;
}

/// Smoothed IRLS for 1 ≤ p < 2: majorize–minimize on residuals floored at η,
/// with η lowered by 10× once the iterates settle.
SolveResult lp_irls_low(const Matrix& A, const Vector& b, double p, const Vector& w, const SolverOptions& opts) {
  SolveResult res;
  Vector x = weighted_ls(A, b, w);
  Vector best = x;
  double best_cost = weighted_pow_cost(A * x - b, p, w);
  const double bscale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  double eta = std::max((A * x - b).cwiseAbs().maxCoeff() * 1e-2, 1e-300);
  const double eta_min = 1e-13 * bscale;
  int it = 0;
  const int budget = std::max(opts.max_iters, 200) * 10;
  int inner = 0;
  double prev = best_cost;
  for (; it < budget; ++it) {
    const Vector r = A * x - b;
    Vector c(r.size());
    for (Index i = 0; i < r.size(); ++i) c[i] = w[i] * std::pow(std::max(std::abs(r[i]), eta), p - 2.0);
    x = weighted_ls(A, b, c);
    const double cn = weighted_pow_cost(A * x - b, p, w);
    if (cn < best_cost) {
      best_cost = cn;
      best = x;
    }
    ++inner;
    const bool settled = std::abs(prev - cn) <= 1e-12 * std::max(cn, 1e-300) || inner >= 100;
    prev = cn;
    if (settled) {
      if (eta <= eta_min) break;
      eta = std::max(eta * 0.1, eta_min);
      inner = 0;
    }
  }
  if (p == 1.0 && A.cols() > 0 && A.rows() >= A.cols()) {
    // Polish towards a vertex: interpolate the d rows with smallest residual.
    const Vector r = (A * best - b).cwiseAbs();
    IndexList order(static_cast<std::size_t>(r.size()));
    for (Index i = 0; i < r.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Index u, Index v) { return r[u] < r[v]; });
    order.resize(static_cast<std::size_t>(A.cols()));
    const Matrix As = select_rows(A, order);
    Vector bs(A.cols());
    for (Index j = 0; j < A.cols(); ++j) bs[j] = b[order[static_cast<std::size_t>(j)]];
    const Vector xv = least_squares(As, bs);
    const double cv = weighted_pow_cost(A * xv - b, p, w);
    if (cv < best_cost) {
      best_cost = cv;
      best = xv;
    }
  }
  res.x = best;
  res.cost = best_cost;
  res.iterations = it;
  res.kkt = lp_kkt_residual(A, b, p, best, w);
  res.converged = true;
  return res;
}

}  // namespace

double lp_kkt_residual(const Matrix& A, const Vector& b, double p, const Vector& x, const Vector& weights) {
  const Vector w = ones_if_empty(weights, A.rows());
  const Vector r = A * x - b;
  const double scale = r.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  Vector g(r.size());
  for (Index i = 0; i < r.size(); ++i) {
    const double a = std::abs(r[i]) / scale;
    g[i] = w[i] * std::pow(a, p - 1.0) * (r[i] > 0 ? 1.0 : (r[i] < 0 ? -1.0 : 0.0));
  }
  const double denom = A.norm() * g.norm();
  return denom > 0.0 ? (A.transpose() * g).norm() / denom : 0.0;
}

SolveResult lp_regression(const Matrix& A, const Vector& b, double p, const Vector& weights,
                          const SolverOptions& opts) {
  require(p >= 1.0 && std::isfinite(p), "lp_regression needs finite p >= 1");
  if (A.rows() != b.size()) throw DimensionMismatch("lp_regression: rows of A vs length of b");
  check_finite(A, "lp_regression A");
  const Vector w = ones_if_empty(weights, A.rows());
  Vector x = weighted_ls(A, b, w);
  // A consistent system is solved exactly by least squares for every p.
  const bool exact = (A * x - b).cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, b.cwiseAbs().maxCoeff());
  if (p < 2.0 && !exact) return lp_irls_low(A, b, p, w, opts);
  if (p == 2.0 || exact) {
    SolveResult res;
    res.x = x;
    res.cost = weighted_pow_cost(A * x - b, p, w);
    res.kkt = p > 1.0 ? lp_kkt_residual(A, b, p, x, w) : 0.0;
    res.converged = true;
    return res;
  }
  // Homotopy for large p: geometric steps with ratio 1.5 keep Newton in its basin.
  int total = 0;
  if (p > 8.0) {
    for (double q = 3.0; q < p; q *= 1.5) {
      SolverOptions inner = opts;
      inner.tol = std::max(opts.tol, 1e-6);
      SolveResult stage = lp_newton(A, b, q, w, x, inner);
      x = stage.x;
      total += stage.iterations;
    }
  }
  SolveResult res = lp_newton(A, b, p, w, x, opts);
  res.iterations += total;
  return res;
}

SolveResult linf_regression(const Matrix& A, const Vector& b, double gap, int max_iters) {
  if (A.rows() != b.size()) throw DimensionMismatch("linf_regression: rows of A vs length of b");
  const Index n = A.rows();
  SolveResult res;
  Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector best_x = least_squares(A, b);
  double best_ub = (A * best_x - b).cwiseAbs().maxCoeff();
  double lb = 0.0;
  int it = 0;
  for (; it < max_iters; ++it) {
    const Vector x = weighted_ls(A, b, w);
    const Vector r = A * x - b;
    // For weights on the simplex, the weighted least-squares value bounds OPT² from below.
    lb = std::max(lb, std::sqrt(std::max(0.0, w.dot(r.cwiseAbs2()))));
    const double ub = r.cwiseAbs().maxCoeff();
    if (ub < best_ub) {
      best_ub = ub;
      best_x = x;
    }
    if (best_ub <= (1.0 + gap) * lb || best_ub == 0.0) {
      res.converged = true;
      break;
    }
    Vector wn = w.cwiseProduct(r.cwiseAbs());
    const double s = wn.sum();
    if (!(s > 0.0)) break;
    w = wn / s;
    // Keep every row reachable so reweighting can recover from zero residuals.
    w = (w.array() + 1e-15).matrix();
    w /= w.sum();
  }
  res.x = best_x;
  res.cost = best_ub;
  res.lower_bound = lb;
  res.iterations = it;
  res.kkt = lb > 0.0 ? best_ub / lb - 1.0 : 0.0;
  return res;
}

SolveResult g_regression(const Matrix& A, const Vector& b, const LossSpec& g, const SolverOptions& opts) {
  if (A.rows() != b.size()) throw DimensionMismatch("g_regression: rows of A vs length of b");
  check_finite(A, "g_regression A");
  auto gcost = [&](const Vector& r) {
    double s = 0.0;
    for (Index i = 0; i < r.size(); ++i) s += g(r[i]);
    return s;
  };
  SolveResult res;
  Vector x = least_squares(A, b);
  Vector best = x;
  double best_cost = gcost(A * x - b);
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const Vector r = A * x - b;
    Vector c(r.size());
    for (Index i = 0; i < r.size(); ++i) c[i] = std::max(std::min(g.irls_weight(r[i]), 1e12), 1e-12);
    const Vector xn = weighted_ls(A, b, c);
    if (!xn.allFinite()) break;
    const double cn = gcost(A * xn - b);
    const double change = (xn - x).norm() / std::max(x.norm(), 1e-12);
    x = xn;
    if (cn < best_cost) {
      best_cost = cn;
      best = xn;
    }
    if (change < 1e-12) {
      res.converged = true;
      break;
    }
  }
  res.x = best;
  res.cost = best_cost;
  res.iterations = it;
  const Vector r = A * best - b;
  Vector gr(r.size());
  for (Index i = 0; i < r.size(); ++i) gr[i] = g.derivative(r[i]);
  const double denom = A.norm() * gr.norm();
  res.kkt = denom > 0 ? (A.transpose() * gr).norm() / denom : 0.0;
  if (res.kkt <= std::max(opts.tol, 1e-8)) res.converged = true;
  return res;
}

RowNormResult row_norm_regression(const Matrix& B, const Matrix& Y, double p, const Vector& weights,
                                  const SolverOptions& opts) {
  if (B.rows() != Y.rows()) throw DimensionMismatch("row_norm_regression: rows of B vs Y");
  require(p >= 1.0, "row_norm_regression needs p >= 1");
  const Vector w = ones_if_empty(weights, B.rows());
  auto cost_of = [&](const Matrix& X) {
    const Vector rn = (B * X - Y).rowwise().norm();
    return weighted_pow_cost(rn, p, w);
  };
  auto wls = [&](const Vector& c) {
    const Vector s = c.cwiseMax(0.0).cwiseSqrt();
    Matrix Bs = s.asDiagonal() * B;
    Matrix Ys = s.asDiagonal() * Y;
    return least_squares(Bs, Ys);
  };
  RowNormResult res;
  Matrix X = wls(w);
  double f = cost_of(X);
  const double yscale = std::max(Y.cwiseAbs().maxCoeff(), 1e-300);
  int it = 0;
  for (; it < opts.max_iters && p != 2.0; ++it) {
    const Vector rn = (B * X - Y).rowwise().norm();
    const double eta = 1e-12 * yscale;
    Vector c(rn.size());
    for (Index i = 0; i < rn.size(); ++i) c[i] = w[i] * std::pow(std::max(rn[i], eta), p - 2.0);
    const Matrix Xn = wls(c);
    // Damped step: the IRLS map is a descent direction; backtrack on the true cost.
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Matrix Xt = X + t * (Xn - X);
      const double ft = cost_of(Xt);
      if (ft < f) {
        const double rel = (f - ft) / std::max(f, 1e-300);
        X = Xt;
        f = ft;
        moved = rel > 1e-13;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      res.converged = true;
      break;
    }
  }
  if (p == 2.0) res.converged = true;
  res.X = X;
  res.cost = f;
  res.iterations = it;
  // Stationarity: Σ w_i ‖r_i‖^{p−2} b_i r_iᵀ = 0.
  const Matrix R = B * X - Y;
  const double rscale = std::max(R.rowwise().norm().maxCoeff(), 1e-300);
  Vector c(R.rows());
  for (Index i = 0; i < R.rows(); ++i) c[i] = w[i] * std::pow(R.row(i).norm() / rscale, p - 2.0);
  const Matrix G = B.transpose() * c.asDiagonal() * (R / rscale);
  const double denom = B.norm() * (c.asDiagonal() * (R / rscale)).norm();
  res.kkt = denom > 0 ? G.norm() / denom : 0.0;
  return res;
}

}  // namespace coreset
