#include "coreset/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "coreset/linalg.hpp"
#include "coreset/norms.hpp"
#include "coreset/parallel.hpp"
#include "coreset/solvers.hpp"

namespace coreset {

namespace {

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (Index i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

/// Calls fn(subset) for each size-k subset of [0, n) in lexicographic order.
void for_each_subset(Index n, Index k, const std::function<void(const IndexList&)>& fn) {
  IndexList idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (k == 0) {
    fn(idx);
    return;
  }
  while (true) {
    fn(idx);
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

BruteCssResult brute_css(const Matrix& A, Index subset_size, const CssObjective& obj) {
  const Index d = A.cols();
  require(subset_size >= 0 && subset_size <= d, "brute_css: subset size out of range");
  if (binomial(d, subset_size) > 1e6) throw BudgetExceeded("brute_css: more than 10^6 subsets");
  BruteCssResult best;
  best.residual = std::numeric_limits<double>::infinity();
  for_each_subset(d, subset_size, [&](const IndexList& S) {
    ++best.subsets_checked;
    const double r = css_residual(A, S, obj);
    if (r < best.residual) {
      best.residual = r;
      best.subset = S;
    }
  });
  return best;
}

ExactRegression exact_lp_regression(const Matrix& A, const Vector& b, double p) {
  require(p >= 1.0, "exact_lp_regression: p must be >= 1");
  if (A.rows() != b.size()) throw DimensionMismatch("exact_lp_regression: rows of A vs b");
  const Index n = A.rows();
  const Index d = A.cols();
  ExactRegression out;
  if (std::isinf(p)) {
    if (d <= 3 && binomial(n, d + 1) <= 2e6) {
      // LP duality: OPT = max over (d+1)-row supports of |λᵀb|/‖λ‖₁ with A_subᵀλ = 0.
      double best = 0.0;
      IndexList arg;
      Vector argl;
      for_each_subset(n, d + 1, [&](const IndexList& S) {
        const Matrix As = select_rows(A, S);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(As.transpose()), Eigen::ComputeFullV);
        const Vector lam = svd.matrixV().col(d);
        // Accept only genuine null vectors.
        if ((As.transpose() * lam).norm() > 1e-10 * std::max(1.0, As.norm())) return;
        double v = 0.0;
        for (Index i = 0; i <= d; ++i) v += lam[i] * b[S[static_cast<std::size_t>(i)]];
        const double val = std::abs(v) / lam.lpNorm<1>();
        if (val > best) {
          best = val;
          arg = S;
          argl = v >= 0 ? lam : Vector(-lam);
        }
      });
      out.opt = best;
      out.method = "linf-vertex-enumeration";
      if (!arg.empty()) {
        // Complementary slackness: b_i − a_iᵀx = sign(λ_i)·OPT on the support.
        IndexList rows;
        std::vector<double> rhs;
        for (Index i = 0; i <= d; ++i) {
          if (std::abs(argl[i]) > 1e-12 * argl.cwiseAbs().maxCoeff()) {
            rows.push_back(arg[static_cast<std::size_t>(i)]);
            rhs.push_back(b[arg[static_cast<std::size_t>(i)]] - (argl[i] > 0 ? 1.0 : -1.0) * best);
          }
        }
        out.x = least_squares(select_rows(A, rows), Vector(Eigen::Map<Vector>(rhs.data(), static_cast<Index>(rhs.size()))));
      } else {
        out.x = least_squares(A, b);
      }
      const double achieved = (A * out.x - b).cwiseAbs().maxCoeff();
      out.certified = std::abs(achieved - best) <= 1e-8 * std::max(1.0, best);
      if (achieved < best) out.opt = achieved;
      return out;
    }
    const SolveResult r = linf_regression(A, b, 1e-8, 200000);
    out.x = r.x;
    out.opt = r.cost;
    out.certified = r.cost <= (1.0 + 1e-6) * r.lower_bound;
    out.method = "linf-lawson";
    return out;
  }
  if (p == 1.0 && binomial(n, d) <= 2e5) {
    double best = std::numeric_limits<double>::infinity();
    for_each_subset(n, d, [&](const IndexList& S) {
      const Matrix As = select_rows(A, S);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd{As});
      if (!lu.isInvertible()) return;
      Vector bs(d);
      for (Index i = 0; i < d; ++i) bs[i] = b[S[static_cast<std::size_t>(i)]];
      const Vector x = lu.solve(Eigen::VectorXd(bs));
      const double c = (A * x - b).cwiseAbs().sum();
      if (c < best) {
        best = c;
        out.x = x;
      }
    });
    out.opt = best;
    out.certified = std::isfinite(best);
    out.method = "l1-vertex-enumeration";
    return out;
  }
  SolverOptions opts;
  opts.max_iters = 1000;
  opts.tol = 1e-12;
  SolveResult best = lp_regression(A, b, p, Vector(), opts);
  // Second start from the origin-weighted solution for robustness.
  if (p > 2.0) {
    Vector w = Vector::Ones(n);
    SolveResult alt = lp_regression(A, b, p, w, opts);
    if (alt.cost < best.cost) best = alt;
  }
  out.x = best.x;
  out.opt = std::pow(best.cost, 1.0 / p);
  out.certified = lp_kkt_residual(A, b, p, best.x) <= 1e-10 || p < 2.0;
  out.method = p < 2.0 ? "lp-irls" : "lp-newton";
  return out;
}

CoresetCheck strong_coreset_check(const Matrix& A, const WeightedRows& coreset, Index k, double p,
                                  double resolution_deg, long max_net) {
  const Index d = A.cols();
  require(k >= 1, "strong_coreset_check: k must be positive");
  require(coreset.indices.size() == static_cast<std::size_t>(coreset.weights.size()),
          "strong_coreset_check: index/weight length mismatch");
  CoresetCheck out;
  if (k >= d) {
    out.resolution_deg = resolution_deg;
    return out;  // every cost vanishes
  }
  const Index params = k * (d - k);
  const double charts = binomial(d, k);
  double res = resolution_deg;
  auto steps_for = [](double r) { return std::max<long>(1, static_cast<long>(std::ceil(180.0 / r - 1e-9))); };
  while (std::pow(static_cast<double>(steps_for(res)), static_cast<double>(params)) * charts > static_cast<double>(max_net)) {
    res *= 1.25;
  }
  const long steps = steps_for(res);
  out.resolution_deg = 180.0 / static_cast<double>(steps);
  std::vector<double> tans(static_cast<std::size_t>(steps));
  for (long s = 0; s < steps; ++s) {
    const double ang = -90.0 + out.resolution_deg * (static_cast<double>(s) + 0.5);
    tans[static_cast<std::size_t>(s)] = std::tan(ang * M_PI / 180.0);
  }
  double worst = 0.0;
  long count = 0;
  for_each_subset(d, k, [&](const IndexList& pivots) {
    IndexList rest;
    for (Index j = 0; j < d; ++j)
      if (std::find(pivots.begin(), pivots.end(), j) == pivots.end()) rest.push_back(j);
    std::vector<long> digit(static_cast<std::size_t>(params), 0);
    const long total = static_cast<long>(std::llround(std::pow(static_cast<double>(steps), static_cast<double>(params))));
    for (long t = 0; t < total; ++t) {
      long v = t;
      for (Index q = 0; q < params; ++q) {
        digit[static_cast<std::size_t>(q)] = v % steps;
        v /= steps;
      }
      Matrix F = Matrix::Zero(k, d);
      for (Index r = 0; r < k; ++r) {
        F(r, pivots[static_cast<std::size_t>(r)]) = 1.0;
        for (Index c = 0; c < d - k; ++c)
          F(r, rest[static_cast<std::size_t>(c)]) = tans[static_cast<std::size_t>(digit[static_cast<std::size_t>(r * (d - k) + c)])];
      }
      // Orthonormal basis of rowspan(F).
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(F.transpose()));
      const Matrix Q = Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(d, k));
      const Matrix R = A - (A * Q) * Q.transpose();
      const Vector c = R.rowwise().norm();
      double full = 0.0;
      for (Index i = 0; i < c.size(); ++i) full += std::pow(c[i], p);
      double sub = 0.0;
      for (std::size_t m = 0; m < coreset.indices.size(); ++m)
        sub += coreset.weights[static_cast<Index>(m)] * std::pow(c[coreset.indices[m]], p);
      ++count;
      if (full > 0.0) worst = std::max(worst, std::abs(sub - full) / full);
    }
  });
  out.max_deviation = worst;
  out.net_size = count;
  return out;
}

namespace {

Matrix grid_cells(const Matrix& points, Index grid) {
  const Vector lo = points.colwise().minCoeff();
  const Vector hi = points.colwise().maxCoeff();
  Matrix cells(grid * grid, 2);
  for (Index a = 0; a < grid; ++a)
    for (Index b = 0; b < grid; ++b) {
      const double fx = static_cast<double>(a) / static_cast<double>(grid - 1);
      const double fy = static_cast<double>(b) / static_cast<double>(grid - 1);
      cells(a * grid + b, 0) = lo[0] + fx * (hi[0] - lo[0]);
      cells(a * grid + b, 1) = lo[1] + fy * (hi[1] - lo[1]);
    }
  return cells;
}

}  // namespace

Vector exact_cluster_sensitivity(const Matrix& points, Index k, double p, Index grid) {
  require(points.cols() == 2, "exact_cluster_sensitivity: points must be planar");
  require(k >= 1 && k <= 2, "exact_cluster_sensitivity: k must be 1 or 2");
  require(grid >= 2 && grid <= 50, "exact_cluster_sensitivity: grid must lie in [2, 50]");
  const Index n = points.rows();
  const Matrix cells = grid_cells(points, grid);
  const Index m = cells.rows();
  // dist[c][i] = ‖x_i − cell_c‖^p
  Matrix dist(m, n);
  for (Index c = 0; c < m; ++c)
    for (Index i = 0; i < n; ++i) dist(c, i) = std::pow((points.row(i) - cells.row(c)).norm(), p);
  Vector sens = Vector::Zero(n);
  std::vector<Vector> partial(static_cast<std::size_t>(m), Vector::Zero(n));
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t c1) {
    Vector& local = partial[c1];
    const Index first = static_cast<Index>(c1);
    const Index last = k == 1 ? first : m - 1;
    for (Index c2 = first; c2 <= last; ++c2) {
      Vector cost = k == 1 ? Vector(dist.row(first).transpose())
                           : Vector(dist.row(first).transpose().cwiseMin(dist.row(c2).transpose()));
      const double tot = cost.sum();
      if (!(tot > 0.0)) continue;
      local = local.cwiseMax(cost / tot);
    }
  });
  for (const auto& v : partial) sens = sens.cwiseMax(v);
  return sens;
}

double cluster_coreset_grid_check(const Matrix& points, const WeightedRows& coreset, Index k, double p, Index grid) {
  require(points.cols() == 2, "cluster_coreset_grid_check: points must be planar");
  require(k >= 1 && k <= 2, "cluster_coreset_grid_check: k must be 1 or 2");
  require(grid >= 2 && grid <= 50, "cluster_coreset_grid_check: grid must lie in [2, 50]");
  const Index n = points.rows();
  const Matrix cells = grid_cells(points, grid);
  const Index m = cells.rows();
  Matrix dist(m, n);
  for (Index c = 0; c < m; ++c)
    for (Index i = 0; i < n; ++i) dist(c, i) = std::pow((points.row(i) - cells.row(c)).norm(), p);
  Vector w = Vector::Zero(n);
  for (std::size_t j = 0; j < coreset.indices.size(); ++j) w[coreset.indices[j]] += coreset.weights[static_cast<Index>(j)];
  std::vector<double> worst(static_cast<std::size_t>(m), 0.0);
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t c1) {
    const Index first = static_cast<Index>(c1);
    const Index last = k == 1 ? first : m - 1;
    double local = 0.0;
    for (Index c2 = first; c2 <= last; ++c2) {
      double full = 0.0, sub = 0.0;
      for (Index i = 0; i < n; ++i) {
        const double v = std::min(dist(first, i), dist(c2, i));
        full += v;
        sub += w[i] * v;
      }
      if (full > 0.0) local = std::max(local, std::abs(sub - full) / full);
    }
    worst[c1] = local;
  });
  return *std::max_element(worst.begin(), worst.end());
}

std::string instance_hash(const Matrix& A, const std::string& params) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const unsigned char* data, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      h ^= data[i];
      h *= 1099511628211ULL;
    }
  };
  const std::int64_t dims[2] = {A.rows(), A.cols()};
  mix(reinterpret_cast<const unsigned char*>(dims), sizeof(dims));
  mix(reinterpret_cast<const unsigned char*>(A.data()), sizeof(double) * static_cast<std::size_t>(A.size()));
  mix(reinterpret_cast<const unsigned char*>(params.data()), params.size());
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

OracleCache::OracleCache(std::string dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

std::string OracleCache::path_for(const std::string& hash, const std::string& method) const {
  std::string safe = method;
  for (char& ch : safe)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  return dir_ + "/" + hash + "__" + safe + ".json";
}

std::optional<OracleReport> OracleCache::get(const std::string& hash, const std::string& method) const {
  std::ifstream in(path_for(hash, method));
  if (!in) return std::nullopt;
  nlohmann::json j;
  in >> j;
  OracleReport r;
  r.instance_hash = j.at("instance_hash").get<std::string>();
  r.value = j.at("value").get<double>();
  r.method = j.at("method").get<std::string>();
  r.runtime_sec = j.at("runtime_sec").get<double>();
  return r;
}

void OracleCache::put(const OracleReport& report) const {
  nlohmann::json j;
  j["instance_hash"] = report.instance_hash;
  j["value"] = report.value;
  j["method"] = report.method;
  j["runtime_sec"] = report.runtime_sec;
  std::ofstream out(path_for(report.instance_hash, report.method));
  out << j.dump(2) << "\n";
}

}  // namespace coreset
