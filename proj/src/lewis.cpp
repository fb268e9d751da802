#include "coreset/lewis.hpp"

#include <cmath>
#include <limits>

#include "coreset/linalg.hpp"
#include "coreset/norms.hpp"

namespace coreset {

namespace {

/// q_i = a_iᵀ(AᵀW^{1−2/p}A)⁻¹a_i for rows with w_i > 0.
Vector lewis_quadratic(const Matrix& A, const Vector& w, double p) {
  Vector c(w.size());
  for (Index i = 0; i < w.size(); ++i) c[i] = w[i] > 0.0 ? std::pow(w[i], 1.0 - 2.0 / p) : 0.0;
  const Matrix M = A.transpose() * c.asDiagonal() * A;
  return quadratic_forms(A, M);
}

}  // namespace

Vector lewis_leverage(const Matrix& A, const Vector& w, double p) {
  const Vector q = lewis_quadratic(A, w, p);
  Vector tau(w.size());
  for (Index i = 0; i < w.size(); ++i) tau[i] = w[i] > 0.0 ? std::pow(w[i], 1.0 - 2.0 / p) * q[i] : 0.0;
  return tau;
}

LewisWeights compute_lewis(const Matrix& A, double p, const LewisOptions& opts) {
  require(p > 0.0 && std::isfinite(p), "compute_lewis: p must be positive and finite");
  check_finite(A, "compute_lewis");
  const Index n = A.rows();
  const Index d = A.cols();
  if (d == 0 || numerical_rank(A) < d) throw RankDeficient("compute_lewis: A must have full column rank");
  LewisWeights out;
  out.p = p;
  Vector w = leverage_scores(A);
  for (Index i = 0; i < n; ++i)
    if (A.row(i).squaredNorm() == 0.0) w[i] = 0.0;
  const double theta = p >= 4.0 ? 2.0 / p : 1.0;
  double best_change = 1e300;
  Vector best = w;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const Vector q = lewis_quadratic(A, w, p);
    Vector next(n);
    double change = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (w[i] <= 0.0) {
        next[i] = 0.0;
        continue;
      }
      const double target = std::pow(std::max(q[i], 0.0), p / 2.0);
      next[i] = std::pow(w[i], 1.0 - theta) * std::pow(target, theta);
      change = std::max(change, std::abs(target - w[i]) / w[i]);
    }
    if (change < best_change) {
      best_change = change;
      best = w;
    }
    if (change <= opts.tol) {
      out.converged = true;
      break;
    }
    w = next;
  }
  out.iterations = it;
  out.w = out.converged ? w : best;
  const Vector tau = lewis_leverage(A, out.w, p);
  double alpha = 1.0;
  for (Index i = 0; i < n; ++i)
    if (tau[i] > 0.0) alpha = std::min(alpha, out.w[i] / tau[i]);
  out.alpha = std::min(alpha, 1.0);
  Vector scale(n);
  for (Index i = 0; i < n; ++i) scale[i] = out.w[i] > 0.0 ? std::pow(out.w[i], 0.5 - 1.0 / p) : 0.0;
  const Matrix B = scale.asDiagonal() * A;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd{B});
  const Matrix T = Eigen::MatrixXd(qr.matrixQR().topRows(d).triangularView<Eigen::Upper>());
  out.basis = T.triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
  return out;
}

Matrix SamplingMatrix::apply(const Matrix& A) const {
  Matrix out(size(), A.cols());
  for (Index r = 0; r < size(); ++r) out.row(r) = scales[r] * A.row(indices[static_cast<std::size_t>(r)]);
  return out;
}

Vector SamplingMatrix::apply(const Vector& b) const {
  Vector out(size());
  for (Index r = 0; r < size(); ++r) out[r] = scales[r] * b[indices[static_cast<std::size_t>(r)]];
  return out;
}

double lewis_oversampling(double p, Index n, Index d, double eps, double delta, double c) {
  const double ld = std::max(1.0, std::log(static_cast<double>(d)));
  const double ln = std::max(1.0, std::log(static_cast<double>(n)));
  const double ldelta = std::log(1.0 / delta);
  if (p > 2.0) {
    return c / (eps * eps) * std::pow(static_cast<double>(d), p / 2.0 - 1.0) * (ld * ld * ln + ldelta);
  }
  return c / (eps * eps) * static_cast<double>(d) * ld * std::max(1.0, ldelta);
}

SamplingMatrix sample_with_probabilities(const Vector& prob, double p, SeededRng& rng) {
  SamplingMatrix S;
  S.n_original = prob.size();
  std::vector<double> scales;
  std::vector<double> probs;
  for (Index i = 0; i < prob.size(); ++i) {
    const double pr = std::min(1.0, std::max(0.0, prob[i]));
    if (pr > 0.0 && rng.bernoulli(pr)) {
      S.indices.push_back(i);
      scales.push_back(1.0 / std::pow(pr, 1.0 / p));
      probs.push_back(pr);
    } else if (pr <= 0.0) {
      rng();  // keep one draw per row so streams stay aligned
    }
  }
  S.scales = Eigen::Map<Vector>(scales.data(), static_cast<Index>(scales.size()));
  S.probabilities = Eigen::Map<Vector>(probs.data(), static_cast<Index>(probs.size()));
  return S;
}

SamplingMatrix lewis_sample(const LewisWeights& lw, double eps, double delta, SeededRng& rng, double c) {
  const Index n = lw.w.size();
  const Index d = lw.basis.cols();
  const double beta = lewis_oversampling(lw.p, n, d, eps, delta, c);
  return sample_with_probabilities(beta * lw.w, lw.p, rng);
}

Vector reweight_p_to_q(const LewisWeights& lw, double q) {
  require(q >= 1.0 && lw.p >= 1.0, "reweight_p_to_q: p, q must be >= 1");
  Vector out(lw.w.size());
  const double e = 1.0 / q - 1.0 / lw.p;
  for (Index i = 0; i < out.size(); ++i) out[i] = lw.w[i] > 0.0 ? std::pow(lw.w[i], e) : (e == 0.0 ? 1.0 : 0.0);
  return out;
}

double online_lewis_scalar(double q, double p) {
  if (!std::isfinite(q)) return 1.0;
  if (q <= 0.0) return 0.0;
  // f(w) = w^{2/p} − q(1 − w) is increasing with f(0) < 0 ≤ f(1).
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = std::pow(mid, 2.0 / p) - q * (1.0 - mid);
    if (f > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  return hi;
}

OnlineLewis::OnlineLewis(Index d, double p, double beta, SeededRng rng)
    : d_(d), p_(p), beta_(beta), rng_(std::move(rng)), M_(Matrix::Zero(d, d)) {}

double OnlineLewis::query(const Vector& a) const {
  const double tr = M_.trace();
  if (!(tr > 0.0)) return std::numeric_limits<double>::infinity();
  Matrix Mr = M_;
  Mr.diagonal().array() += 1e-12 * tr;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Eigen::MatrixXd{Mr});
  return a.dot(ldlt.solve(Eigen::VectorXd(a)));
}

OnlineLewis::Decision OnlineLewis::push(const Vector& a) {
  if (a.size() != d_) throw DimensionMismatch("OnlineLewis::push: wrong row length");
  Decision dec;
  if (a.squaredNorm() == 0.0) {
    dec.weight = 0.0;
    dec.probability = 0.0;
    rng_();
  } else {
    dec.weight = online_lewis_scalar(query(a), p_);
    dec.probability = beta_ <= 0.0 ? 1.0 : std::min(1.0, beta_ * dec.weight);
    dec.kept = rng_.bernoulli(dec.probability);
    M_ += std::pow(dec.weight, 1.0 - 2.0 / p_) * (a * a.transpose());
  }
  weight_sum_ += dec.weight;
  if (dec.kept) kept_.push_back(static_cast<Index>(decisions_.size()));
  decisions_.push_back(dec);
  return dec;
}

}  // namespace coreset
