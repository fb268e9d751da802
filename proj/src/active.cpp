#include "coreset/active.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>

#include "coreset/ellipsoid.hpp"
#include "coreset/linalg.hpp"
#include "coreset/norms.hpp"
#include "coreset/parallel.hpp"
#include "coreset/solvers.hpp"

namespace coreset {

LabelOracle::LabelOracle(std::function<double(Index)> source, Index n) : source_(std::move(source)), n_(n) {
  require(n >= 0, "LabelOracle: negative length");
}

LabelOracle LabelOracle::from_vector(Vector b) {
  const Index n = b.size();
  auto data = std::make_shared<Vector>(std::move(b));
  return LabelOracle([data](Index i) { return (*data)[i]; }, n);
}

LabelOracle LabelOracle::from_file(const std::string& path) {
  // Line offsets are indexed up front; values are parsed only when read.
  auto in = std::make_shared<std::ifstream>(path);
  if (!*in) throw InvalidInput("LabelOracle: cannot open " + path);
  auto offsets = std::make_shared<std::vector<std::streamoff>>();
  std::string line;
  std::streamoff pos = in->tellg();
  while (std::getline(*in, line)) {
    if (!line.empty() && line[0] != '#') offsets->push_back(pos);
    pos = in->tellg();
  }
  in->clear();
  const Index n = static_cast<Index>(offsets->size());
  return LabelOracle(
      [in, offsets](Index i) {
        in->clear();
        in->seekg((*offsets)[static_cast<std::size_t>(i)]);
        std::string l;
        std::getline(*in, l);
        try {
          return std::stod(l);
        } catch (const std::exception&) {
          throw InvalidInput("LabelOracle: unparsable label on row " + std::to_string(i));
        }
      },
      n);
}

double LabelOracle::read(Index i) {
  if (i < 0 || i >= n_) throw InvalidInput("LabelOracle: index out of range");
  seen_.insert(i);
  const double v = source_(i);
  if (!std::isfinite(v)) throw InvalidInput("LabelOracle: non-finite label");
  return v;
}

ActivePlan active_plan(const Vector& w, double alpha, Index d, double p, double eps, double delta,
                       const ActiveConfig& cfg) {
  require(p > 2.0, "active_plan: p must exceed 2");
  require(eps > 0.0 && eps < 1.0, "active_plan: eps must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "active_plan: delta must lie in (0, 1)");
  require(alpha > 0.0 && alpha <= 1.0, "active_plan: alpha must lie in (0, 1]");
  const double n = static_cast<double>(w.size());
  ActivePlan plan;
  plan.eps = eps;
  plan.delta = delta;
  plan.alpha = alpha;
  plan.weight_sum = w.sum();
  plan.gamma = eps / std::pow(std::log2(2.0 / eps), cfg.polylog_exp);
  const double W = std::max(plan.weight_sum, 1e-300);
  const double lg = std::log(static_cast<double>(d) * W);
  plan.beta = alpha * std::pow(eps, p) /
              (plan.gamma * std::pow(W, p / 2.0) * (lg * lg * std::log(std::max(2.0, n)) + std::log(1.0 / delta)));
  const double lead = cfg.theta * std::pow(p / 2.0, (p / 2.0) / (1.0 - 2.0 / p)) / std::pow(alpha, p / 2.0);
  plan.probabilities = Vector(w.size());
  for (Index i = 0; i < w.size(); ++i)
    plan.probabilities[i] = std::min(1.0, lead * w[i] / (static_cast<double>(d) * plan.beta));
  plan.expected_queries = plan.probabilities.sum();
  return plan;
}

Index median_select(const Matrix& A, const std::vector<Vector>& candidates, double p) {
  const std::size_t l = candidates.size();
  require(l >= 1, "median_select: no candidates");
  std::vector<Vector> images(l);
  for (std::size_t i = 0; i < l; ++i) images[i] = A * candidates[i];
  Matrix D(static_cast<Index>(l), static_cast<Index>(l));
  std::vector<double> all;
  all.reserve(l * l);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < l; ++j) {
      const double v = vec_norm(images[i] - images[j], p);
      D(static_cast<Index>(i), static_cast<Index>(j)) = v;
      all.push_back(v);
    }
  std::sort(all.begin(), all.end());
  const std::size_t idx = std::min(all.size() - 1, static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(l * l))));
  const double tau = all[idx];
  for (std::size_t i = 0; i < l; ++i) {
    std::size_t close = 0;
    for (std::size_t j = 0; j < l; ++j) close += D(static_cast<Index>(i), static_cast<Index>(j)) <= tau ? 1 : 0;
    if (2 * close >= l) return static_cast<Index>(i);
  }
  return 0;
}

double active_query_budget(Index n, Index d, double p, double eps, double delta, double c) {
  const double ld = std::log(std::max<double>(2.0, static_cast<double>(d)));
  const double ln = std::log(std::max<double>(2.0, static_cast<double>(n)));
  return c * std::pow(static_cast<double>(d), p / 2.0) * std::pow(eps, -(p - 1.0)) * (ld * ld * ln + std::log(1.0 / delta)) *
         std::pow(std::log2(2.0 / eps), 2.0) * std::log(1.0 / delta);
}

namespace {

Index num_candidates(double delta, const ActiveConfig& cfg) {
  if (cfg.ell_override > 0) return cfg.ell_override;
  return std::max<Index>(1, static_cast<Index>(std::ceil(cfg.ell_const * std::log(1.0 / delta))));
}

double per_plan_delta(double delta, Index ell, double eps) {
  const double ll = std::max(1.0, std::log2(std::max(2.0, std::log2(1.0 / eps))));
  return delta / (static_cast<double>(ell) * ll);
}

/// Solves each sampled instance from already-read labels and applies the selection rule.
void finish(const Matrix& A, const std::vector<IndexList>& rows, const std::vector<std::vector<double>>& labels,
            const Vector& prob, double p, const ActiveConfig& cfg, ActiveResult& out) {
  const std::size_t ell = rows.size();
  out.candidates.resize(ell);
  parallel_for(ell, [&](std::size_t c) {
    ActiveCandidate& cand = out.candidates[c];
    cand.rows = rows[c];
    const Index m = static_cast<Index>(rows[c].size());
    if (m == 0) {
      cand.x = Vector::Zero(A.cols());
      cand.converged = true;
      return;
    }
    const Matrix SA = select_rows(A, rows[c]);
    Vector Sb(m), w(m);
    for (Index i = 0; i < m; ++i) {
      Sb[i] = labels[c][static_cast<std::size_t>(i)];
      w[i] = 1.0 / prob[rows[c][static_cast<std::size_t>(i)]];
    }
    cand.full_rank = numerical_rank(SA) == A.cols();
    const SolveResult r = lp_regression(SA, Sb, p, w, cfg.solver);
    cand.x = r.x;
    cand.sampled_cost = r.cost;
    cand.kkt = lp_kkt_residual(SA, Sb, p, r.x, w);
    cand.converged = r.converged || cand.kkt <= 1e-8;
  });
  // A candidate that fits its sample exactly is returned directly.
  Index chosen = -1;
  for (std::size_t c = 0; c < ell; ++c)
    if (out.candidates[c].full_rank && out.candidates[c].sampled_cost == 0.0) {
      chosen = static_cast<Index>(c);
      break;
    }
  if (chosen < 0) {
    std::vector<Vector> xs;
    for (const auto& c : out.candidates) xs.push_back(c.x);
    chosen = median_select(A, xs, p);
  }
  out.chosen = chosen;
  out.x = out.candidates[static_cast<std::size_t>(chosen)].x;
}

}  // namespace

ActiveResult active_lp_solve(const Matrix& A, LabelOracle& oracle, double p, double eps, double delta, SeededRng& rng,
                             const ActiveConfig& cfg) {
  check_finite(A, "active_lp_solve");
  if (oracle.size() != A.rows()) throw DimensionMismatch("active_lp_solve: oracle length vs rows of A");
  if (numerical_rank(A) < A.cols()) throw RankDeficient("active_lp_solve: A must have full column rank");
  const Index n = A.rows();
  const Index d = A.cols();
  ActiveResult out;
  out.ell = num_candidates(delta, cfg);
  const LewisWeights lw = compute_lewis(A, p);
  out.plan = active_plan(lw.w, std::min(1.0, lw.alpha), d, p, eps, per_plan_delta(delta, out.ell, eps), cfg);
  std::vector<IndexList> rows(static_cast<std::size_t>(out.ell));
  std::vector<std::vector<double>> labels(static_cast<std::size_t>(out.ell));
  for (Index c = 0; c < out.ell; ++c) {
    SeededRng r = rng.child(static_cast<std::uint64_t>(c));
    for (Index i = 0; i < n; ++i) {
      if (r.bernoulli(out.plan.probabilities[i])) {
        rows[static_cast<std::size_t>(c)].push_back(i);
        labels[static_cast<std::size_t>(c)].push_back(oracle.read(i));
      }
    }
  }
  out.queries_expected = out.plan.expected_queries * static_cast<double>(out.ell);
  out.query_budget = active_query_budget(n, d, p, eps, delta);
  finish(A, rows, labels, out.plan.probabilities, p, cfg, out);
  out.queries_realized = oracle.reads();
  return out;
}

ActiveResult active_online_lp_solve(const Matrix& A, LabelOracle& oracle, double p, double eps, double delta,
                                    SeededRng& rng, const ActiveConfig& cfg) {
  check_finite(A, "active_online_lp_solve");
  if (oracle.size() != A.rows()) throw DimensionMismatch("active_online_lp_solve: oracle length vs rows of A");
  require(p > 2.0, "active_online_lp_solve: p must exceed 2");
  const Index n = A.rows();
  const Index d = A.cols();
  ActiveResult out;
  out.ell = num_candidates(delta, cfg);
  const double W = cfg.online_weight_const * static_cast<double>(d) * std::log2(std::max<double>(2.0, static_cast<double>(n)));
  // Plan constants use the a-priori weight bound; per-row probabilities use arrival-time weights.
  const Vector unit = Vector::Constant(1, W);
  const ActivePlan base = active_plan(unit, 1.0, d, p, eps, per_plan_delta(delta, out.ell, eps), cfg);
  out.plan = base;
  out.plan.probabilities = Vector::Zero(n);
  OnlineLewis ol(d, p, 0.0, rng.child(999));
  const double lead = cfg.theta * std::pow(p / 2.0, (p / 2.0) / (1.0 - 2.0 / p));
  // β recomputed with n (active_plan above saw a length-1 weight vector).
  const double lg = std::log(static_cast<double>(d) * W);
  const double beta = std::pow(eps, p) / (base.gamma * std::pow(W, p / 2.0) *
                                          (lg * lg * std::log(std::max<double>(2.0, static_cast<double>(n))) +
                                           std::log(1.0 / base.delta)));
  out.plan.beta = beta;
  out.plan.weight_sum = 0.0;
  std::vector<IndexList> rows(static_cast<std::size_t>(out.ell));
  std::vector<std::vector<double>> labels(static_cast<std::size_t>(out.ell));
  for (Index i = 0; i < n; ++i) {
    const double w = ol.push(A.row(i).transpose()).weight;
    out.plan.weight_sum += w;
    const double pr = std::min(1.0, lead * w / (static_cast<double>(d) * beta));
    out.plan.probabilities[i] = pr;
    for (Index c = 0; c < out.ell; ++c) {
      SeededRng r = rng.child(static_cast<std::uint64_t>(c)).child(static_cast<std::uint64_t>(i));
      if (r.bernoulli(pr)) {
        rows[static_cast<std::size_t>(c)].push_back(i);
        labels[static_cast<std::size_t>(c)].push_back(oracle.read(i));
      }
    }
  }
  out.plan.expected_queries = out.plan.probabilities.sum();
  out.queries_expected = out.plan.expected_queries * static_cast<double>(out.ell);
  const double inflate = std::pow(std::log2(std::max<double>(2.0, static_cast<double>(n))), p / 2.0 + 1.0);
  out.query_budget = active_query_budget(n, d, p, eps, delta) * inflate;
  finish(A, rows, labels, out.plan.probabilities, p, cfg, out);
  out.queries_realized = oracle.reads();
  return out;
}

LargeDistortionResult active_linf(const Matrix& A, LabelOracle& oracle, SeededRng& rng, double eps) {
  check_finite(A, "active_linf");
  if (oracle.size() != A.rows()) throw DimensionMismatch("active_linf: oracle length vs rows of A");
  const LinfEmbedding emb = linf_embedding_subset(A, eps, MveeMethod::coordinate_ascent, rng);
  LargeDistortionResult out;
  out.mode = "linf";
  out.rows = emb.set.support;
  std::sort(out.rows.begin(), out.rows.end());
  const Matrix AS = select_rows(A, out.rows);
  Vector bS(static_cast<Index>(out.rows.size()));
  for (std::size_t i = 0; i < out.rows.size(); ++i) bS[static_cast<Index>(i)] = oracle.read(out.rows[i]);
  out.queries = oracle.reads();
  const double gap = 1e-3;
  const SolveResult r = linf_regression(AS, bS, gap, 20000);
  out.x = r.x;
  const double solver_factor = r.lower_bound > 0.0 ? r.cost / r.lower_bound : 1.0;
  out.certificate = std::sqrt(static_cast<double>(A.cols()));
  // Row subsets never expand the max-norm, so the second embedding constant is 1.
  out.lemma_bound = (solver_factor + 1.0) * emb.kappa * 1.0 + 1.0;
  return out;
}

LargeDistortionResult active_lp_q(const Matrix& A, LabelOracle& oracle, double p, double q, SeededRng& rng,
                                  double eps, double delta) {
  check_finite(A, "active_lp_q");
  require(q >= 2.0 && q < p, "active_lp_q: need 2 <= q < p");
  if (oracle.size() != A.rows()) throw DimensionMismatch("active_lp_q: oracle length vs rows of A");
  const LewisWeights lp_w = compute_lewis(A, p);
  const Vector r = reweight_p_to_q(lp_w, q);
  const Matrix B = r.asDiagonal() * A;
  const LewisWeights lq = compute_lewis(B, q);
  const SamplingMatrix S = lewis_sample(lq, eps, delta, rng);
  LargeDistortionResult out;
  out.mode = "lp_q";
  out.rows = S.indices;
  Vector rb(S.size());
  for (Index i = 0; i < S.size(); ++i) {
    const Index row = S.indices[static_cast<std::size_t>(i)];
    rb[i] = S.scales[i] * r[row] * oracle.read(row);
  }
  out.queries = oracle.reads();
  const Matrix SB = S.apply(B);
  const SolveResult sol = lp_regression(SB, rb, q);
  out.x = sol.x;
  out.certificate = std::pow(static_cast<double>(A.cols()), 0.5 * (1.0 - q / p));
  out.lemma_bound = 0.0;
  return out;
}

}  // namespace coreset
