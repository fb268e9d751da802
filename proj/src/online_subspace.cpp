#include "coreset/online_subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coreset/linalg.hpp"
#include "coreset/norms.hpp"
#include "coreset/parallel.hpp"
#include "coreset/sketch.hpp"

namespace coreset {

RoundedMatrix round_to_grid(const Matrix& A, double granularity) {
  require(granularity > 0.0 && std::isfinite(granularity), "round_to_grid: granularity must be positive");
  check_finite(A, "round_to_grid");
  RoundedMatrix out;
  out.granularity = granularity;
  out.integers = (A / granularity).array().round().matrix();
  out.rounded = out.integers * granularity;
  out.delta = out.integers.size() ? out.integers.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

RoundedMatrix integer_round(const Matrix& A, double eps, double lambda_lower_hint, double p) {
  require(eps > 0.0, "integer_round: eps must be positive");
  require(lambda_lower_hint > 0.0, "integer_round: lambda hint must be positive");
  require(p >= 1.0, "integer_round: p must be >= 1");
  const double n = static_cast<double>(std::max<Index>(A.rows(), 1));
  const double d = static_cast<double>(std::max<Index>(A.cols(), 1));
  const double g = eps * std::pow(n, -1.0 / p) / std::sqrt(d) * std::pow(lambda_lower_hint, 1.0 / p);
  RoundedMatrix out = round_to_grid(A, g);
  out.error_bound = std::pow(eps, p) * lambda_lower_hint;
  return out;
}

namespace {

Index sketch_size(const OnlineSubspaceConfig& cfg) {
  const double k = static_cast<double>(cfg.k);
  const double ln = std::log2(std::max<double>(2.0, static_cast<double>(cfg.n_hint)));
  const double lk = k > 1.0 ? k * std::log2(k) : 0.0;
  return std::max<Index>(1, static_cast<Index>(std::ceil(cfg.c_t * (lk + ln * ln))));
}

double log_n_delta(const OnlineSubspaceConfig& cfg) {
  const double Delta = cfg.delta_hint > 0.0 ? cfg.delta_hint : 1.0;
  return std::log(std::max(3.0, static_cast<double>(cfg.n_hint) * Delta));
}

}  // namespace

OnlineSensitivityState::OnlineSensitivityState(Index d, const OnlineSubspaceConfig& cfg, SeededRng rng)
    : d_(d),
      cfg_(cfg),
      t_(sketch_size(cfg)),
      sketched_(t_ < d),
      l1_(1, cfg.p, 0.0, rng.child(1)),
      l2_(d, cfg.p, 0.0, rng.child(2)),
      lewis_factor_(0.0) {
  require(d >= 1, "online sensitivity: d must be positive");
  require(cfg.n_hint >= 1, "online sensitivity: stream length hint required");
  // A sketch with at least d rows cannot reduce the dimension; use the identity then.
  if (sketched_) {
    SeededRng g = rng.child(0);
    G_ = make_srht(d, t_, g).dense();
  } else {
    t_ = d;
    G_ = Matrix::Identity(d, d);
  }
  const double lnd = log_n_delta(cfg);
  const double beta1 = cfg.c_lewis * static_cast<double>(t_) * lnd;
  l1_ = OnlineLewis(t_, cfg.p, beta1, rng.child(1));
  Y_ = Matrix::Zero(t_, d);
  F_ = Matrix::Zero(d, 0);
  lewis_factor_ = std::pow(static_cast<double>(t_) * lnd, std::max(0.0, cfg.p / 2.0 - 1.0));
}

void OnlineSensitivityState::refit() {
  const Index m = static_cast<Index>(kept_g_.size());
  Matrix B(m, t_), Ya(m, d_);
  Vector w(m);
  for (Index j = 0; j < m; ++j) {
    B.row(j) = kept_g_[static_cast<std::size_t>(j)].transpose();
    Ya.row(j) = kept_a_[static_cast<std::size_t>(j)].transpose();
    w[j] = kept_w_[static_cast<std::size_t>(j)];
  }
  const RowNormResult fit = row_norm_regression(B, Ya, cfg_.p, w, cfg_.refit);
  const double Delta = cfg_.delta_hint > 0.0 ? cfg_.delta_hint : 1.0;
  const double grid = 1.0 / std::pow(static_cast<double>(cfg_.n_hint) * Delta, cfg_.grid_power);
  Y_ = round_to_grid(fit.X, grid).rounded;
  // rowspan(A_i Gᵀ Ỹ) = Ỹᵀ · range(Σ_j g_j g_jᵀ); the sampler's Gram has the same range.
  const Matrix& M = l1_.gram();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd{M});
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  IndexList keep;
  for (Index j = 0; j < t_; ++j)
    if (es.eigenvalues()[j] > 1e-12 * top) keep.push_back(j);
  Matrix Ur(t_, static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) Ur.col(static_cast<Index>(j)) = es.eigenvectors().col(keep[j]);
  const Matrix span = Y_.transpose() * Ur;
  F_ = span.size() && span.norm() > 0.0 ? column_basis(span) : Matrix::Zero(d_, 0);
}

double OnlineSensitivityState::push(const Vector& a) {
  if (a.size() != d_) throw DimensionMismatch("online sensitivity: wrong row length");
  const Vector g = G_ * a;
  const OnlineLewis::Decision dec = l1_.push(g);
  if (dec.kept) {
    kept_g_.push_back(g);
    kept_a_.push_back(a);
    kept_w_.push_back(1.0 / dec.probability);
    refit();
    v_ = 0.0;
    ++segments_;
    segment_starts_.push_back(seen_);
  }
  const Vector res_vec = a - F_ * (F_.transpose() * a);
  // Residuals at the level of rounding error are treated as exact zeros.
  const double rn = res_vec.norm() <= 1e-10 * a.norm() ? 0.0 : res_vec.norm();
  const double res = std::pow(rn, cfg_.p);
  residuals_.push_back(rn);
  v_ += res;
  const Vector z = G_.transpose() * (Y_ * a);
  const double w2 = l2_.push(z).weight;
  ++seen_;
  const double term1 = v_ > 0.0 ? res / v_ : 0.0;
  return cfg_.c0 * (term1 + lewis_factor_ * w2);
}

double online_sensitivity_budget(Index t, Index n, double Delta, double p, Index reps, double c) {
  const double ln = std::log(std::max<double>(3.0, static_cast<double>(n) * std::max(1.0, Delta)));
  const double lt = std::log(std::max<double>(2.0, static_cast<double>(t)));
  return static_cast<double>(reps) * c * std::pow(static_cast<double>(t * t) * ln * ln, std::max(1.0, p / 2.0)) *
         std::max(1.0, lt * lt) * std::log(std::max<double>(2.0, static_cast<double>(n)));
}

OnlineSubspaceCoreset::OnlineSubspaceCoreset(Index d, const OnlineSubspaceConfig& cfg, double eps, double delta,
                                             SeededRng rng)
    : d_(d), cfg_(cfg), rng_(std::move(rng)) {
  require(eps > 0.0 && eps < 1.0, "online subspace coreset: eps must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "online subspace coreset: delta must lie in (0, 1)");
  require(cfg.n_hint >= 1, "online subspace coreset: stream length hint required");
  require(cfg.p >= 1.0, "online subspace coreset: p must be >= 1");
  const double n = static_cast<double>(cfg.n_hint);
  const Index R = cfg.reps_override > 0 ? cfg.reps_override
                                        : std::max<Index>(1, static_cast<Index>(std::ceil(cfg.c_reps * std::log(n / delta))));
  copies_.reserve(static_cast<std::size_t>(R));
  for (Index r = 0; r < R; ++r) copies_.emplace_back(d, cfg, rng_.child(100 + static_cast<std::uint64_t>(r)));
  trace_.reps = R;
  trace_.t = copies_.front().sketch_rows();
  const double p = cfg.p;
  const double k = static_cast<double>(cfg.k);
  trace_.eps_prime = std::pow(eps, (p + 3.0) * std::max(1.0, 2.0 / p));
  trace_.sensitivity_budget =
      online_sensitivity_budget(trace_.t, cfg.n_hint, cfg.delta_hint, p, R, cfg.c_budget);
  const double S = trace_.sensitivity_budget;
  const double kk = k * std::min(k * k * std::max(1.0, std::log(k)), std::pow(k, std::max(1.0, p / 2.0)));
  trace_.beta = cfg.beta_override > 0.0
                    ? cfg.beta_override
                    : cfg.c_sample * (kk * std::log(std::max(2.0, S)) +
                                      std::log(1.0 / delta) / (trace_.eps_prime * trace_.eps_prime));
  coreset_.eps = eps;
  coreset_.k = cfg.k;
  coreset_.p = p;
  coreset_.weights = Vector(0);
}

bool OnlineSubspaceCoreset::push(const Vector& a) {
  if (a.size() != d_) throw DimensionMismatch("online subspace coreset: wrong row length");
  std::vector<double> est(copies_.size());
  parallel_for(copies_.size(), [&](std::size_t r) { est[r] = copies_[r].push(a); });
  double sum = 0.0;
  for (double e : est) sum += e;
  // Round up to a power of two no smaller than 1/n, and clamp to 1.
  const double floor_s = 1.0 / static_cast<double>(std::max<Index>(cfg_.n_hint, seen_ + 1));
  double s = std::max(sum, floor_s);
  s = std::min(1.0, std::exp2(std::ceil(std::log2(s))));
  const double prob = std::min(1.0, trace_.beta * s);
  SeededRng r = rng_.child(7).child(static_cast<std::uint64_t>(seen_));
  const bool kept = r.bernoulli(prob);
  trace_.raw_sum.push_back(sum);
  trace_.sensitivities.push_back(s);
  trace_.probabilities.push_back(prob);
  trace_.sensitivity_total += s;
  if (kept) {
    coreset_.indices.push_back(seen_);
    coreset_.weights.conservativeResize(coreset_.weights.size() + 1);
    coreset_.weights[coreset_.weights.size() - 1] = 1.0 / prob;
  }
  ++seen_;
  return kept;
}

StrongCoreset online_subspace_coreset(const Matrix& A, Index k, double p, double eps, double delta, SeededRng& rng,
                                      OnlineSubspaceConfig cfg, OnlineSubspaceTrace* trace) {
  check_finite(A, "online_subspace_coreset");
  require(k >= 1, "online_subspace_coreset: k must be positive");
  cfg.k = k;
  cfg.p = p;
  if (cfg.n_hint <= 0) cfg.n_hint = A.rows();
  if (cfg.delta_hint <= 0.0) cfg.delta_hint = std::max(1.0, A.size() ? A.cwiseAbs().maxCoeff() : 1.0);
  OnlineSubspaceCoreset oc(A.cols(), cfg, eps, delta, rng.child(0));
  for (Index i = 0; i < A.rows(); ++i) oc.push(A.row(i).transpose());
  if (trace) {
    *trace = oc.trace();
    for (const auto& c : oc.copies()) {
      trace->segment_starts.push_back(c.segment_starts());
      trace->sketch_kept.push_back(static_cast<Index>(c.sketch_sampler().kept().size()));
    }
  }
  return oc.coreset();
}

EntrywiseCoreset entrywise_online_coreset(const Matrix& A, Index k, double p, SeededRng& rng, double eps,
                                          double delta, double c_exp, OnlineSubspaceConfig cfg) {
  require(p >= 1.0 && p < 2.0, "entrywise_online_coreset: p must lie in [1, 2)");
  check_finite(A, "entrywise_online_coreset");
  const Index n = A.rows();
  const Index d = A.cols();
  require(k >= 1 && k <= std::min(n, d), "entrywise_online_coreset: k out of range");
  EntrywiseCoreset out;
  const double ln = std::log(std::max<double>(3.0, static_cast<double>(n)));
  out.t = std::max<Index>(k + 1, static_cast<Index>(std::ceil(static_cast<double>(k) * std::pow(ln, c_exp))));
  SeededRng gs = rng.child(1);
  out.sketch = pstable_matrix(p, out.t, d, gs);
  const Matrix sketched = A * out.sketch.transpose();  // rows a_i Gᵀ
  SeededRng cs = rng.child(2);
  out.coreset = online_subspace_coreset(sketched, k, p, eps, delta, cs, cfg);

  // Rank-k entrywise fit restricted to the coreset rows (alternating weighted ℓp).
  const IndexList& S = out.coreset.indices;
  const Matrix AS = select_rows(A, S);
  const Vector& w = out.coreset.weights;
  const Index m = AS.rows();
  Vector ws(m);
  for (Index i = 0; i < m; ++i) ws[i] = std::pow(w[i], 1.0 / p);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(ws.asDiagonal() * AS), Eigen::ComputeThinV);
  const Index kk = std::min<Index>(k, svd.matrixV().cols());
  Matrix V = svd.matrixV().leftCols(kk).transpose();  // k × d
  Matrix US(m, kk);
  auto fit_rows = [&](const Matrix& rows, const Matrix& Vf) {
    Matrix U(rows.rows(), Vf.rows());
    const Matrix Vt = Vf.transpose();
    parallel_for(static_cast<std::size_t>(rows.rows()), [&](std::size_t i) {
      U.row(static_cast<Index>(i)) = lp_regression(Vt, rows.row(static_cast<Index>(i)).transpose(), p).x.transpose();
    });
    return U;
  };
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 30 && m > 0; ++it) {
    US = fit_rows(AS, V);
    parallel_for(static_cast<std::size_t>(d), [&](std::size_t j) {
      V.col(static_cast<Index>(j)) = lp_regression(US, AS.col(static_cast<Index>(j)), p, w).x;
    });
    const Matrix R = AS - US * V;
    double c = 0.0;
    for (Index i = 0; i < m; ++i) c += w[i] * R.row(i).cwiseAbs().array().pow(p).sum();
    if (c >= prev * (1.0 - 1e-9)) break;
    prev = c;
  }
  // Normalize the row factor and refit every row.
  for (Index r = 0; r < V.rows(); ++r) {
    const double nr = V.row(r).norm();
    if (nr > 0.0) V.row(r) /= nr;
  }
  out.V = V;
  out.U = fit_rows(A, V);
  out.residual = norm(Matrix(A - out.U * out.V), NormMode::entrywise(p));
  return out;
}

}  // namespace coreset
