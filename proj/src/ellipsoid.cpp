#include "coreset/ellipsoid.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <tuple>

#include "coreset/lewis.hpp"
#include "coreset/linalg.hpp"
#include "coreset/norms.hpp"

namespace coreset {

namespace {

constexpr double kPruneTol = 1e-9;

struct FwState {
  Vector u;     // probability scale, Σu = 1
  Matrix Minv;  // (Aᵀ diag(u) A)⁻¹
  Vector omega; // a_iᵀ Minv a_i
};

void refresh(const Matrix& A, FwState& s) {
  const Matrix M = A.transpose() * s.u.asDiagonal() * A;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Eigen::MatrixXd{M});
  s.Minv = ldlt.solve(Eigen::MatrixXd::Identity(A.cols(), A.cols()));
  s.Minv = 0.5 * (s.Minv + s.Minv.transpose()).eval();
  const Matrix AM = A * s.Minv;
  s.omega = AM.cwiseProduct(A).rowwise().sum();
}

/// Rank-one update M' = (1−τ)M + τ a_j a_jᵀ (τ may be negative for away steps).
void rank_one_step(const Matrix& A, FwState& s, Index j, double tau) {
  const Vector a = A.row(j).transpose();
  const Vector Ma = s.Minv * a;
  const double wj = s.omega[j];
  const double denom = (1.0 - tau) + tau * wj;
  const double inv = 1.0 / (1.0 - tau);
  s.Minv = inv * (s.Minv - (tau / denom) * (Ma * Ma.transpose()));
  const Vector proj = A * Ma;
  s.omega = inv * (s.omega - (tau / denom) * proj.cwiseAbs2());
  s.u *= (1.0 - tau);
  s.u[j] += tau;
}

/// Wolfe–Atwood Frank–Wolfe with away steps for the centered MVEE of {±a_i}.
/// Returns probability-scale weights.
Vector wolfe_atwood(const Matrix& A, double eps, long max_iters, long& iters_out) {
  const Index n = A.rows();
  const double d = static_cast<double>(A.cols());
  FwState s;
  s.u = Vector::Constant(n, 1.0 / static_cast<double>(n));
  refresh(A, s);
  const long refresh_every = std::max<long>(50, 20 * A.cols());
  long it = 0;
  for (; it < max_iters; ++it) {
    if (it > 0 && it % refresh_every == 0) refresh(A, s);
    Index j = 0;
    s.omega.maxCoeff(&j);
    Index k = -1;
    double kmin = 1e300;
    for (Index i = 0; i < n; ++i) {
      if (s.u[i] > 0.0 && s.omega[i] < kmin) {
        kmin = s.omega[i];
        k = i;
      }
    }
    const double eps_plus = s.omega[j] / d - 1.0;
    const double eps_minus = 1.0 - kmin / d;
    // Weights on the sum-d scale are d·u; at the optimum they are ≤ 1.
    const double umax = d * s.u.maxCoeff();
    if (eps_plus <= eps / 2.0 && eps_minus <= eps / 2.0 && umax <= 1.0 + 1e-9) {
      // The near-optimality test also accepts, for stability, the exact check on u.
      break;
    }
    if (eps_plus >= eps_minus || k < 0) {
      const double tau = (s.omega[j] - d) / (d * (s.omega[j] - 1.0));
      if (tau <= 0.0) {
        // Only the upper-bound condition on u remains; take an away step instead.
        if (k < 0) break;
      } else {
        rank_one_step(A, s, j, tau);
        continue;
      }
    }
    // Away step from k.
    const double wk = s.omega[k];
    double tau = (d - wk) / (d * (wk - 1.0));
    if (wk <= 1.0) tau = 1e300;
    const double cap = s.u[k] / (1.0 - s.u[k]);
    const bool drop = tau >= cap;
    tau = std::min(tau, cap);
    if (tau <= 0.0) break;
    rank_one_step(A, s, k, -tau);
    if (drop) {
      s.u[k] = 0.0;
      refresh(A, s);
    }
  }
  iters_out = it;
  refresh(A, s);
  if (it >= max_iters) {
    const double excess = s.omega.maxCoeff() / d - 1.0;
    if (excess > eps) throw NonConvergence("mvee_coreset: iteration cap reached");
  }
  return s.u;
}

/// Multiplicative fixed point u ← u∘ω/d (Titterington); keeps Σu = 1.
Vector multiplicative_refine(const Matrix& A, double eps, long max_iters, long& iters_out) {
  const Index n = A.rows();
  const double d = static_cast<double>(A.cols());
  FwState s;
  s.u = Vector::Constant(n, 1.0 / static_cast<double>(n));
  long it = 0;
  for (; it < max_iters; ++it) {
    refresh(A, s);
    if (s.omega.maxCoeff() / d <= 1.0 + eps / 2.0) break;
    s.u = s.u.cwiseProduct(s.omega) / d;
    s.u /= s.u.sum();
  }
  iters_out = it;
  refresh(A, s);
  if (s.omega.maxCoeff() / d > 1.0 + eps) throw NonConvergence("mvee_coreset: fixed-point refinement cap reached");
  return s.u;
}

void fill_shape(const Matrix& A, EllipsoidCoreset& out) {
  out.shape = A.transpose() * out.weights.asDiagonal() * A;
  out.witnesses = quadratic_forms(A, out.shape);
}

}  // namespace

EllipsoidCoreset mvee_coreset(const Matrix& A, double eps, MveeMethod method, SeededRng& rng,
                              const MveeOptions& opts) {
  require(eps > 0.0 && eps < 1.0, "mvee_coreset: eps must lie in (0,1)");
  check_finite(A, "mvee_coreset");
  const Index n = A.rows();
  const Index d = A.cols();
  if (d == 0 || numerical_rank(A) < d) throw RankDeficient("mvee_coreset: A must have full column rank");
  const long max_iters = opts.max_iters > 0 ? opts.max_iters : 10000L * d;
  EllipsoidCoreset out;
  out.method = method;
  out.eps = eps;
  const double dd = static_cast<double>(d);
  if (method == MveeMethod::coordinate_ascent) {
    Vector u = wolfe_atwood(A, eps, max_iters, out.iterations) * dd;
    for (Index i = 0; i < n; ++i) {
      if (u[i] < kPruneTol) {
        u[i] = 0.0;
      } else {
        out.support.push_back(i);
      }
    }
    out.weights = u;
    fill_shape(A, out);
    return out;
  }
  Vector u = multiplicative_refine(A, eps, max_iters, out.iterations) * dd;
  out.weights = u;
  fill_shape(A, out);
  const double logd = std::max(1.0, std::log(dd));
  const double log_delta = std::max(1.0, std::log(1.0 / opts.delta));
  out.beta = opts.sample_const * logd * log_delta / (eps * eps);
  out.keep_prob.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double pr = std::min(1.0, (1.0 + eps) * out.beta * u[i]);
    out.keep_prob[i] = pr;
    if (rng.bernoulli(pr)) out.support.push_back(i);
  }
  return out;
}

Vector spanning_certificates(const Matrix& A, const IndexList& S) {
  const Matrix AS = select_rows(A, S);
  const Matrix coeff = least_squares(Matrix(AS.transpose()), Matrix(A.transpose()));
  return coeff.colwise().norm().transpose();
}

SpanningSet l2_spanning_set(const Matrix& A, double eps, SeededRng& rng) {
  EllipsoidCoreset core = mvee_coreset(A, eps, MveeMethod::coordinate_ascent, rng);
  SpanningSet out;
  out.eps = eps;
  out.support = core.support;
  out.certificates = spanning_certificates(A, out.support);
  // Thinning: drop low-weight rows while the certificate still holds.
  IndexList order = out.support;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return core.weights[a] < core.weights[b]; });
  const Index d = A.cols();
  for (Index cand : order) {
    if (static_cast<Index>(out.support.size()) <= d) break;
    IndexList trial;
    for (Index i : out.support)
      if (i != cand) trial.push_back(i);
    if (numerical_rank(select_rows(A, trial)) < d) continue;
    const Vector cert = spanning_certificates(A, trial);
    if (cert.maxCoeff() <= 1.0 + eps) {
      out.support = trial;
      out.certificates = cert;
    }
  }
  // Best-first pass: drop the row whose removal keeps the largest certificate smallest.
  const auto best_first = [&](IndexList S, Vector cert_S) {
    while (static_cast<Index>(S.size()) > d) {
      double best = std::numeric_limits<double>::infinity();
      IndexList best_set;
      Vector best_cert;
      for (Index cand : S) {
        IndexList trial;
        for (Index i : S)
          if (i != cand) trial.push_back(i);
        if (numerical_rank(select_rows(A, trial)) < d) continue;
        const Vector cert = spanning_certificates(A, trial);
        if (cert.maxCoeff() < best) {
          best = cert.maxCoeff();
          best_set = std::move(trial);
          best_cert = cert;
        }
      }
      if (!(best <= 1.0 + eps)) break;
      S = std::move(best_set);
      cert_S = std::move(best_cert);
    }
    return std::make_pair(S, cert_S);
  };
  std::tie(out.support, out.certificates) = best_first(out.support, out.certificates);
  // Exchange: admit the worst-covered row, then thin again; keep the result only if it is smaller.
  for (Index round = 0; round < 2 * d; ++round) {
    Index worst = 0;
    out.certificates.maxCoeff(&worst);
    if (std::find(out.support.begin(), out.support.end(), worst) != out.support.end()) break;
    IndexList grown = out.support;
    grown.push_back(worst);
    std::sort(grown.begin(), grown.end());
    auto [S, cert] = best_first(grown, spanning_certificates(A, grown));
    if (S.size() >= out.support.size() || cert.maxCoeff() > 1.0 + eps) break;
    out.support = std::move(S);
    out.certificates = std::move(cert);
  }
  return out;
}

LinfEmbedding linf_embedding_subset(const Matrix& A, double eps, MveeMethod method, SeededRng& rng,
                                    const MveeOptions& opts) {
  LinfEmbedding out;
  const double d = static_cast<double>(A.cols());
  if (method == MveeMethod::coordinate_ascent) {
    out.set = l2_spanning_set(A, eps, rng);
    out.kappa = (1.0 + eps) * std::sqrt(d) * (1.0 + eps);
  } else {
    EllipsoidCoreset core = mvee_coreset(A, eps, method, rng, opts);
    out.set.eps = eps;
    out.set.support = core.support;
    if (!core.support.empty() && numerical_rank(select_rows(A, core.support)) == A.cols()) {
      out.set.certificates = spanning_certificates(A, core.support);
    }
    out.kappa = (1.0 + eps) / (1.0 - eps) * std::sqrt(static_cast<double>(core.support.size()));
  }
  return out;
}

double avg_top_k(const Vector& y, Index k) {
  std::vector<double> a(static_cast<std::size_t>(y.size()));
  for (Index i = 0; i < y.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(y[i]);
  const std::size_t m = std::min<std::size_t>(a.size(), static_cast<std::size_t>(k));
  std::partial_sort(a.begin(), a.begin() + static_cast<long>(m), a.end(), std::greater<>());
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += a[i];
  return s / static_cast<double>(k);
}

AvgTopKEmbedding avg_top_k_embedding(const Matrix& A, Index k, double eps, SeededRng& rng) {
  const Index n = A.rows();
  const Index d = A.cols();
  require(k >= 1 && k <= n, "avg_top_k_embedding: k must lie in [1, n]");
  AvgTopKEmbedding out;
  out.set.eps = eps;
  const Index t = std::max<Index>(d, 16);
  if (k < t) {
    out.set = l2_spanning_set(A, eps, rng);
  } else {
    const Index parts = (k + t - 1) / t;
    out.parts = parts;
    std::vector<IndexList> groups(static_cast<std::size_t>(parts));
    for (Index i = 0; i < n; ++i) groups[rng.below(static_cast<std::uint64_t>(parts))].push_back(i);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const IndexList& rows = groups[g];
      if (rows.empty()) continue;
      const Matrix Ag = select_rows(A, rows);
      if (numerical_rank(Ag) < d) {
        // Too few rows in this part to span; keep the whole part.
        out.set.support.insert(out.set.support.end(), rows.begin(), rows.end());
        continue;
      }
      SeededRng sub = rng.child(g);
      const SpanningSet part = l2_spanning_set(Ag, eps, sub);
      for (Index i : part.support) out.set.support.push_back(rows[static_cast<std::size_t>(i)]);
    }
    std::sort(out.set.support.begin(), out.set.support.end());
    out.set.certificates = spanning_certificates(A, out.set.support);
  }
  // Each |a_iᵀx| ≤ (1+ε)‖A_S x‖₂ and ‖A_S x‖₂ ≤ T·sqrt(1 + (m−1)/k) with T the top-k sum
  // of A_S x and m = ⌈|S|/k⌉ blocks, so AT_k(Ax) ≤ (1+ε)·sqrt(k² + k(m−1))·AT_k(A_S x).
  const double kk = static_cast<double>(k);
  const double blocks = std::ceil(static_cast<double>(out.set.support.size()) / kk);
  out.distortion = (1.0 + eps) * std::sqrt(kk * kk + kk * std::max(0.0, blocks - 1.0));
  return out;
}

WellCondDecomposition well_cond_decomposition(const Matrix& L, Index k, double p, double eps) {
  require(p >= 1.0, "well_cond_decomposition: p must be >= 1");
  check_finite(L, "well_cond_decomposition");
  const Index r = numerical_rank(L);
  if (r > k) throw InvalidInput("well_cond_decomposition: rank(L) exceeds k");
  const Index d = L.cols();
  WellCondDecomposition out;
  out.c_prime = 1.0 + eps;
  Vector colnorm(d);
  IndexList nonzero;
  for (Index j = 0; j < d; ++j) {
    colnorm[j] = vec_norm(L.col(j), p);
    if (colnorm[j] > 0.0) nonzero.push_back(j);
  }
  if (r == 0 || nonzero.empty()) {
    out.U = Matrix::Zero(L.rows(), 0);
    out.V = Matrix::Zero(0, d);
    return out;
  }
  Matrix Ln(L.rows(), static_cast<Index>(nonzero.size()));
  for (std::size_t c = 0; c < nonzero.size(); ++c) Ln.col(static_cast<Index>(c)) = L.col(nonzero[c]) / colnorm[nonzero[c]];
  const Matrix Q = column_basis(Ln);
  const Matrix Z = Q.transpose() * Ln;  // r×d', columns are the points
  const Matrix pts = Z.transpose();
  SeededRng rng(0);
  const SpanningSet span = l2_spanning_set(pts, eps, rng);
  IndexList S = span.support;
  std::sort(S.begin(), S.end());
  const Index s = static_cast<Index>(S.size());
  out.U.resize(L.rows(), s);
  for (Index c = 0; c < s; ++c) {
    out.U.col(c) = Ln.col(S[static_cast<std::size_t>(c)]);
    out.columns.push_back(nonzero[static_cast<std::size_t>(S[static_cast<std::size_t>(c)])]);
  }
  // Coefficients c_j = (Z_S)⁺ z_j with ‖c_j‖₂ ≤ 1+ε; V e_j = ‖L e_j‖_p·c_j.
  const Matrix ZS = select_cols(Z, S);
  const Matrix coeff = least_squares(ZS, Z);
  out.V = Matrix::Zero(s, d);
  for (std::size_t c = 0; c < nonzero.size(); ++c) {
    out.V.col(nonzero[c]) = coeff.col(static_cast<Index>(c)) * colnorm[nonzero[c]];
  }
  return out;
}

LpSpanning lp_subspace_spanning(const Matrix& A, double p, SeededRng& rng, double eps) {
  require(p >= 1.0, "lp_subspace_spanning: p must be >= 1");
  check_finite(A, "lp_subspace_spanning");
  const Index d = A.cols();
  if (d == 0 || numerical_rank(A) < d) throw RankDeficient("lp_subspace_spanning: A must have full column rank");
  // QR coordinates: ‖Ax‖₂ = ‖Tx‖₂, so the net is spanned in a well-conditioned frame.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd{A});
  const Matrix T = Eigen::MatrixXd(qr.matrixQR().topRows(d).triangularView<Eigen::Upper>());
  const Index N = 200 * d;
  Matrix net(N, d);  // rows x_jᵀ with ‖A x_j‖_p = 1
  for (Index j = 0; j < N; ++j) {
    Vector x(d);
    for (Index c = 0; c < d; ++c) x[c] = rng.normal();
    x /= vec_norm(A * x, p);
    net.row(j) = x.transpose();
  }
  const Matrix coords = net * T.transpose();  // rows T x_j
  SeededRng sub = rng.child(1);
  const SpanningSet span = l2_spanning_set(coords, eps, sub);
  const LewisWeights lw = compute_lewis(A, p);
  LpSpanning out;
  out.net_size = N;
  out.net_columns = static_cast<Index>(span.support.size());
  out.R.resize(d, out.net_columns + d);
  for (Index c = 0; c < out.net_columns; ++c) out.R.col(c) = net.row(span.support[static_cast<std::size_t>(c)]).transpose();
  for (Index c = 0; c < d; ++c) {
    const Vector col = lw.basis.col(c);
    out.R.col(out.net_columns + c) = col / vec_norm(A * col, p);
  }
  // Measured constant over a fresh test set.
  double worst = 0.0;
  SeededRng test = rng.child(2);
  for (Index j = 0; j < 200; ++j) {
    Vector x(d);
    for (Index c = 0; c < d; ++c) x[c] = test.normal();
    x /= vec_norm(A * x, p);
    worst = std::max(worst, lp_spanning_coefficient(out, x));
  }
  for (Index j = 0; j < N; ++j) worst = std::max(worst, lp_spanning_coefficient(out, net.row(j).transpose()));
  out.c_measured = worst;
  return out;
}

double lp_spanning_coefficient(const LpSpanning& sp, const Vector& x) {
  return least_squares(sp.R, x).norm();
}

double cascaded_inf_embedding_check(const Matrix& A, const SpanningSet& S, const Matrix& X) {
  if (A.cols() != X.rows()) throw DimensionMismatch("cascaded check: A.cols() != X.rows()");
  const Matrix AX = A * X;
  const Vector rn = AX.rowwise().norm();
  double den = 0.0;
  for (Index i : S.support) den = std::max(den, rn[i]);
  if (!(den > 0.0)) throw DegenerateInput("cascaded check: zero denominator");
  return rn.maxCoeff() / den;
}

}  // namespace coreset
