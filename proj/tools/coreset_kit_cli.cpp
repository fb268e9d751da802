// coreset-kit: experiment harness over the coreset library.
//
// Every subcommand writes <out>/report.json (inputs echo, instantiated budgets, measured
// values, pass/fail) and <out>/series.csv (plot data). Exit codes: 0 pass, 1 fail, 2 usage.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coreset/active.hpp"
#include "coreset/clustering.hpp"
#include "coreset/css.hpp"
#include "coreset/ellipsoid.hpp"
#include "coreset/io.hpp"
#include "coreset/lewis.hpp"
#include "coreset/linalg.hpp"
#include "coreset/online_subspace.hpp"
#include "coreset/oracles.hpp"
#include "coreset/sketch.hpp"
#include "json.hpp"

using namespace coreset;
using nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string subcommand;
  std::string input;
  std::string stream;
  std::string labels;
  std::string loss = "huber";
  std::string mode;
  std::string suite = "all";
  std::string method;
  Index k = 1;
  double p = 2.0;
  double q = 2.0;
  double eps = 0.25;
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::vector<std::string> consts;
  std::string out = "coreset_out";
};

/// Named Θ(1) constants: defaults are registered by each subcommand, overrides come from --const.
class Constants {
 public:
  explicit Constants(const std::vector<std::string>& raw) {
    for (const auto& kv : raw) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--const expects name=value, got '" + kv + "'");
      try {
        std::size_t used = 0;
        const double v = std::stod(kv.substr(eq + 1), &used);
        if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing");
        overrides_[kv.substr(0, eq)] = v;
      } catch (const std::exception&) {
        throw UsageError("--const value is not a number: '" + kv + "'");
      }
    }
  }

  double get(const std::string& name, double fallback) {
    auto it = overrides_.find(name);
    const double v = it == overrides_.end() ? fallback : it->second;
    used_[name] = v;
    return v;
  }

  void check_all_used() const {
    for (const auto& [name, v] : overrides_)
      if (!used_.count(name)) throw UsageError("unknown constant '" + name + "' for this subcommand");
  }

  [[nodiscard]] ordered_json to_json() const {
    ordered_json j = ordered_json::object();
    for (const auto& [name, v] : used_) j[name] = v;
    return j;
  }

 private:
  std::map<std::string, double> overrides_;
  std::map<std::string, double> used_;
};

struct Series {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  void add(std::vector<double> r) { rows.push_back(std::move(r)); }
};

struct Run {
  Options opt;
  Constants consts;
  ordered_json report;
  Series series;
  bool pass = true;
  std::vector<std::pair<std::string, std::function<void(std::ostream&)>>> extra_files;

  void check(const std::string& name, double measured, double budget, bool ok) {
    report["checks"].push_back({{"name", name}, {"measured", measured}, {"budget", budget}, {"pass", ok}});
    pass = pass && ok;
  }
};

ordered_json to_json(const IndexList& v) {
  ordered_json j = ordered_json::array();
  for (Index i : v) j.push_back(i);
  return j;
}

ordered_json to_json(const Vector& v) {
  ordered_json j = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

/// `synth:gaussian:<n>x<d>` draws a Gaussian matrix from the run seed; anything else is a file path.
Matrix load_matrix(const std::string& spec, bool stream_format, SeededRng rng) {
  if (spec.rfind("synth:", 0) == 0) {
    const std::string rest = spec.substr(6);
    const auto colon = rest.find(':');
    const std::string kind = rest.substr(0, colon);
    const std::string dims = colon == std::string::npos ? "" : rest.substr(colon + 1);
    const auto x = dims.find('x');
    if (kind != "gaussian" || x == std::string::npos) throw UsageError("synthetic input must be synth:gaussian:<n>x<d>");
    Index n = 0, d = 0;
    try {
      n = std::stol(dims.substr(0, x));
      d = std::stol(dims.substr(x + 1));
    } catch (const std::exception&) {
      throw UsageError("bad synthetic dimensions '" + dims + "'");
    }
    if (n <= 0 || d <= 0) throw UsageError("synthetic dimensions must be positive");
    Matrix A(n, d);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) A(i, j) = rng.normal();
    return A;
  }
  if (!std::filesystem::exists(spec)) throw UsageError("unreadable input '" + spec + "'");
  return stream_format ? read_stream(spec) : read_matrix(spec);
}

Matrix primary_matrix(Run& run, bool prefer_stream) {
  const std::string& src = prefer_stream && !run.opt.stream.empty() ? run.opt.stream
                           : !run.opt.input.empty()                 ? run.opt.input
                                                                    : run.opt.stream;
  if (src.empty()) throw UsageError(run.opt.subcommand + " needs --input or --stream");
  const bool stream_format = src == run.opt.stream && !run.opt.stream.empty();
  run.report["input"]["source"] = src;
  Matrix A = load_matrix(src, stream_format, SeededRng(run.opt.seed).child(1000));
  run.report["input"]["rows"] = A.rows();
  run.report["input"]["cols"] = A.cols();
  run.report["input"]["hash"] = instance_hash(A, "");
  return A;
}

/// Labels: file path, or `synth:planted` = A·x* + 0.1·noise from the run seed.
Vector load_labels(Run& run, const Matrix& A) {
  std::string spec = run.opt.labels;
  if (spec.empty()) {
    if (run.opt.input.rfind("synth:", 0) != 0) throw UsageError("--labels is required for file inputs");
    spec = "synth:planted";
  }
  run.report["input"]["labels"] = spec;
  if (spec == "synth:planted") {
    SeededRng rng = SeededRng(run.opt.seed).child(2000);
    Vector x(A.cols());
    for (Index j = 0; j < x.size(); ++j) x[j] = rng.normal();
    Vector b = A * x;
    for (Index i = 0; i < b.size(); ++i) b[i] += 0.1 * rng.normal();
    return b;
  }
  if (!std::filesystem::exists(spec)) throw UsageError("unreadable labels '" + spec + "'");
  Vector b = read_vector(spec);
  if (b.size() != A.rows()) throw UsageError("labels length does not match rows of the input");
  return b;
}

double loglog2(double d) { return std::max(1.0, std::log2(std::max(2.0, std::log2(std::max(2.0, d))))); }

// ---------------------------------------------------------------- subcommands

void cmd_spanning_set(Run& run) {
  const Matrix A = primary_matrix(run, false);
  const double c_size = run.consts.get("size_const", 8.0);
  SeededRng rng(run.opt.seed);
  SeededRng r0 = rng.child(0), r1 = rng.child(1);
  const EllipsoidCoreset ec = mvee_coreset(A, run.opt.eps, MveeMethod::coordinate_ascent, r0);
  const SpanningSet ss = l2_spanning_set(A, run.opt.eps, r1);
  const double d = static_cast<double>(A.cols());
  const double size_budget = c_size * d * loglog2(d);
  run.report["ellipsoid"] = {{"support", to_json(ec.support)},
                             {"iterations", ec.iterations},
                             {"max_witness", ec.witnesses.maxCoeff()}};
  run.report["spanning_set"] = {{"support", to_json(ss.support)}, {"max_certificate", ss.max_certificate()}};
  run.report["budgets"] = {{"size", {{"formula", "size_const*d*max(1,log2(log2(d)))"}, {"value", size_budget}}},
                           {"witness", {{"formula", "1+eps+1e-6"}, {"value", 1.0 + run.opt.eps + 1e-6}}}};
  run.check("ellipsoid_witness", ec.witnesses.maxCoeff(), 1.0 + run.opt.eps + 1e-6,
            ec.witnesses.maxCoeff() <= 1.0 + run.opt.eps + 1e-6);
  run.check("spanning_certificate", ss.max_certificate(), 1.0 + run.opt.eps + 1e-6,
            ss.max_certificate() <= 1.0 + run.opt.eps + 1e-6);
  run.check("spanning_size", static_cast<double>(ss.support.size()), size_budget,
            static_cast<double>(ss.support.size()) <= size_budget);
  run.series.header = {"row", "witness", "certificate"};
  for (Index i = 0; i < A.rows(); ++i) run.series.add({static_cast<double>(i), ec.witnesses[i], ss.certificates[i]});
}

void cmd_lewis(Run& run) {
  const Matrix A = primary_matrix(run, false);
  const double c_sum = run.consts.get("sum_const", 4.0);
  const double c_over = run.consts.get("oversampling", 10.0);
  const LewisWeights lw = compute_lewis(A, run.opt.p);
  SeededRng rng = SeededRng(run.opt.seed).child(0);
  const SamplingMatrix S = lewis_sample(lw, run.opt.eps, run.opt.delta, rng, c_over);
  const Vector tau = lewis_leverage(A, lw.w, run.opt.p);
  const double d = static_cast<double>(A.cols());
  run.report["lewis"] = {{"sum", lw.w.sum()},
                         {"alpha", lw.alpha},
                         {"converged", lw.converged},
                         {"iterations", lw.iterations},
                         {"sample_size", S.size()}};
  run.report["budgets"] = {
      {"weight_sum", {{"formula", "sum_const*d"}, {"value", c_sum * d}}},
      {"oversampling", {{"formula", "lewis_oversampling(p,n,d,eps,delta,c)"},
                        {"value", lewis_oversampling(run.opt.p, A.rows(), A.cols(), run.opt.eps, run.opt.delta, c_over)}}}};
  run.check("weight_sum", lw.w.sum(), c_sum * d, lw.w.sum() <= c_sum * d);
  run.series.header = {"row", "weight", "leverage"};
  for (Index i = 0; i < A.rows(); ++i) run.series.add({static_cast<double>(i), lw.w[i], tau[i]});
}

void cmd_ose_bench(Run& run) {
  const Matrix A = primary_matrix(run, false);
  const double p = run.opt.p;
  if (p < 1.0 || p >= 2.0) throw UsageError("ose-bench needs p in [1, 2)");
  const double d = static_cast<double>(A.cols());
  const double r_const = run.consts.get("rows_const", 40.0);
  const double n_dirs = run.consts.get("directions", 100.0);
  const double exp_const = run.consts.get("expansion_const", 8.0);
  const double scale_c = run.consts.get("scale_C", 4.0);
  const Index r = std::max<Index>(1, static_cast<Index>(std::ceil(r_const * d * std::log(std::max(2.0, d)))));
  SeededRng rng(run.opt.seed);
  SeededRng rs = rng.child(0);
  const Matrix SA = pstable_embed(A, p, r, rs, scale_c);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  run.series.header = {"direction", "ratio"};
  for (Index t = 0; t < static_cast<Index>(n_dirs); ++t) {
    SeededRng rd = rng.child(1).child(static_cast<std::uint64_t>(t));
    Vector x(A.cols());
    for (Index j = 0; j < x.size(); ++j) x[j] = rd.normal();
    const double num = (SA * x).array().abs().pow(p).sum();
    const double den = (A * x).array().abs().pow(p).sum();
    const double ratio = std::pow(num / den, 1.0 / p);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    run.series.add({static_cast<double>(t), ratio});
  }
  const double exp_budget = exp_const * std::pow(d, 1.0 / p);
  run.report["sketch"] = {{"rows", r}, {"min_ratio", lo}, {"max_ratio", hi}};
  run.report["budgets"] = {{"rows", {{"formula", "ceil(rows_const*d*ln d)"}, {"value", r}}},
                           {"expansion", {{"formula", "expansion_const*d^(1/p)"}, {"value", exp_budget}}},
                           {"contraction", {{"formula", "0.9"}, {"value", 0.9}}}};
  run.check("no_contraction", lo, 0.9, lo >= 0.9);
  run.check("expansion", hi, exp_budget, hi <= exp_budget);
}

void cmd_css(Run& run) {
  const Matrix A = primary_matrix(run, false);
  const std::string& loss = run.opt.loss;
  SeededRng rng = SeededRng(run.opt.seed).child(0);
  CssResult res;
  CssObjective obj;
  if (loss.rfind("lp:", 0) == 0 || loss == "linf") {
    obj = loss == "linf" ? CssObjective::linf(A.rows()) : CssObjective::lp(std::stod(loss.substr(3)));
    CssConstants c = CssConstants::boost_defaults();
    c.loop_guard = run.consts.get("loop_guard", c.loop_guard);
    c.sample_mult = run.consts.get("sample_mult", c.sample_mult);
    c.removal_div = run.consts.get("removal_div", c.removal_div);
    const Index s = static_cast<Index>(run.consts.get("s", static_cast<double>(run.opt.k)));
    res = css_boost(A, s, obj, rng, c);
  } else {
    LossSpec g = LossSpec::huber();
    try {
      g = LossSpec::parse(loss);
    } catch (const InvalidInput& e) {
      throw UsageError(e.what());
    }
    obj = CssObjective::gnorm(g);
    CssConstants c = CssConstants::gnorm_defaults();
    c.loop_guard = run.consts.get("loop_guard", c.loop_guard);
    c.sample_mult = run.consts.get("sample_mult", c.sample_mult);
    c.removal_div = run.consts.get("removal_div", c.removal_div);
    c.s_const = run.consts.get("s_const", c.s_const);
    res = css_gnorm(A, run.opt.k, g, rng, c);
  }
  const double ratio_budget = run.consts.get("oracle_ratio", 2.0);
  run.report["css"] = {{"objective", obj.name()},
                       {"selected", to_json(res.selected)},
                       {"residual", res.residual},
                       {"rounds", res.rounds},
                       {"s", res.s}};
  run.report["budgets"] = {{"columns_guarantee", {{"formula", "c*k*loglog(k)*(log d)^2"}, {"value", res.budget_guarantee}}},
                           {"columns_listing", {{"formula", "k*(log d)^2"}, {"value", res.budget_listing}}}};
  run.check("columns", static_cast<double>(res.selected.size()), std::max<double>(res.budget_guarantee, A.cols()),
            static_cast<double>(res.selected.size()) <= std::max<double>(res.budget_guarantee, A.cols()));
  const Index size = static_cast<Index>(res.selected.size());
  if (A.cols() <= 12 && size >= 1 && size < A.cols()) {
    const BruteCssResult br = brute_css(A, size, obj);
    const double ratio = br.residual > 0.0 ? res.residual / br.residual : (res.residual == 0.0 ? 1.0 : INFINITY);
    run.report["oracle"] = {{"method", "brute_css"}, {"residual", br.residual}, {"subset", to_json(br.subset)},
                            {"ratio", ratio}};
    run.check("oracle_ratio", ratio, ratio_budget, ratio <= ratio_budget);
  }
  run.series.header = {"round", "surviving", "sample_size", "chosen_rep", "removed", "residual"};
  for (std::size_t l = 0; l < res.trace.size(); ++l) {
    const CssRound& r = res.trace[l];
    run.series.add({static_cast<double>(l), static_cast<double>(r.surviving), static_cast<double>(r.sample_size),
                    static_cast<double>(r.chosen_rep), static_cast<double>(r.removed.size()), r.residual});
  }
}

void cmd_online_subspace(Run& run) {
  const Matrix A = primary_matrix(run, true);
  OnlineSubspaceConfig cfg;
  cfg.c_t = run.consts.get("c_t", cfg.c_t);
  cfg.c0 = run.consts.get("c0", cfg.c0);
  cfg.c_lewis = run.consts.get("c_lewis", cfg.c_lewis);
  cfg.c_reps = run.consts.get("c_reps", cfg.c_reps);
  cfg.c_sample = run.consts.get("c_sample", cfg.c_sample);
  cfg.c_budget = run.consts.get("c_budget", cfg.c_budget);
  cfg.beta_override = run.consts.get("beta_override", 0.0);
  cfg.reps_override = static_cast<Index>(run.consts.get("reps_override", 0.0));
  const double net_res = run.consts.get("net_resolution_deg", 2.0);
  SeededRng rng(run.opt.seed);
  OnlineSubspaceTrace trace;
  const StrongCoreset cs = online_subspace_coreset(A, run.opt.k, run.opt.p, run.opt.eps, run.opt.delta, rng, cfg, &trace);
  run.report["coreset"] = {{"size", cs.indices.size()},
                           {"reps", trace.reps},
                           {"sketch_rows", trace.t},
                           {"beta", trace.beta},
                           {"eps_prime", trace.eps_prime},
                           {"sensitivity_total", trace.sensitivity_total}};
  run.report["budgets"] = {{"sensitivity_total",
                            {{"formula", "R*c_budget*(t^2 ln^2(n*Delta))^max(1,p/2)*max(1,ln^2 t)*ln n"},
                             {"value", trace.sensitivity_budget}}}};
  run.check("sensitivity_total", trace.sensitivity_total, trace.sensitivity_budget,
            trace.sensitivity_total <= trace.sensitivity_budget);
  if (A.cols() <= 4 && run.opt.k < A.cols()) {
    const CoresetCheck chk = strong_coreset_check(A, {cs.indices, cs.weights}, run.opt.k, run.opt.p, net_res);
    run.report["net_check"] = {{"max_deviation", chk.max_deviation},
                               {"net_size", chk.net_size},
                               {"resolution_deg", chk.resolution_deg}};
    run.check("net_deviation", chk.max_deviation, run.opt.eps, chk.max_deviation <= run.opt.eps);
  } else {
    run.report["net_check"] = nullptr;
  }
  run.series.header = {"row", "sensitivity", "probability", "kept_prefix_size"};
  std::size_t kept = 0;
  for (std::size_t i = 0; i < trace.sensitivities.size(); ++i) {
    while (kept < cs.indices.size() && cs.indices[kept] <= static_cast<Index>(i)) ++kept;
    run.series.add({static_cast<double>(i), trace.sensitivities[i], trace.probabilities[i], static_cast<double>(kept)});
  }
  run.extra_files.emplace_back("coreset.csv", [cs](std::ostream& o) {
    o << "index,weight\n";
    for (std::size_t i = 0; i < cs.indices.size(); ++i)
      o << cs.indices[i] << ',' << std::setprecision(17) << cs.weights[static_cast<Index>(i)] << '\n';
  });
}

void cmd_online_cluster(Run& run) {
  const Matrix P = primary_matrix(run, true);
  const double c_centers = run.consts.get("centers_const", 16.0);
  const double c_plan = run.consts.get("plan_const", 2.0);
  const double w_star_c = run.consts.get("w_star", 0.0);
  const Index k = run.opt.k, n = P.rows();
  const double p = run.opt.p;
  SeededRng rng(run.opt.seed);
  SeededRng r0 = rng.child(0), r1 = rng.child(1);
  const double w_star = w_star_c > 0.0 ? w_star_c : default_w_star(P, k, p);
  const double W = default_W_upper(P, p);
  const OnlineClusterer oc = online_cluster(P, k, p, w_star, r0);
  const double ln = std::max(1.0, std::log2(static_cast<double>(n)));
  const double center_budget = c_centers * static_cast<double>(k) * ln * std::max(1.0, std::log2(std::max(2.0, W / w_star)));
  const ClusterCoreset cc = cluster_coreset(P, k, p, run.opt.eps, run.opt.delta, r1, c_plan, w_star);
  run.report["online"] = {{"centers", oc.centers().size()},
                          {"center_rows", to_json(oc.center_rows())},
                          {"cost", oc.total_cost()},
                          {"rounds", oc.round()},
                          {"w_star", w_star},
                          {"W_upper", W}};
  run.report["coreset"] = {{"size", cc.coreset.indices.size()},
                           {"beta1", cc.plan.beta1},
                           {"beta2", cc.plan.beta2},
                           {"bicriteria_centers", cc.plan.num_centers}};
  run.report["budgets"] = {{"centers", {{"formula", "centers_const*k*log2(n)*log2(W/w)"}, {"value", center_budget}}}};
  run.check("centers", static_cast<double>(oc.centers().size()), center_budget,
            static_cast<double>(oc.centers().size()) <= center_budget);
  // Cluster-size preservation on every bicriteria cluster.
  std::map<Index, double> count, mass;
  for (Index i = 0; i < n; ++i) count[cc.plan.center_ids[static_cast<std::size_t>(i)]] += 1.0;
  for (std::size_t j = 0; j < cc.coreset.indices.size(); ++j)
    mass[cc.plan.center_ids[static_cast<std::size_t>(cc.coreset.indices[j])]] += cc.coreset.weights[static_cast<Index>(j)];
  double worst = 0.0;
  for (const auto& [c, cnt] : count) worst = std::max(worst, std::abs(mass[c] - cnt) / cnt);
  run.check("cluster_size", worst, run.opt.eps, worst <= run.opt.eps);
  if (P.cols() == 2 && k <= 2) {
    const double dev = cluster_coreset_grid_check(P, {cc.coreset.indices, cc.coreset.weights}, k, p);
    run.report["grid_check"] = {{"max_deviation", dev}, {"grid", 50}};
    run.check("grid_deviation", dev, run.opt.eps, dev <= run.opt.eps);
  } else {
    run.report["grid_check"] = nullptr;
  }
  run.series.header = {"point", "center", "arrival_cost", "open_centers", "threshold_round"};
  Index open = 0, round = 0;
  std::size_t next_round = 0;
  const auto& log = oc.round_log();
  for (Index i = 0; i < n; ++i) {
    while (open < static_cast<Index>(oc.center_rows().size()) && oc.center_rows()[static_cast<std::size_t>(open)] <= i) ++open;
    while (next_round < log.size() && log[next_round].at <= i) round = log[next_round++].round;
    run.series.add({static_cast<double>(i), static_cast<double>(oc.assignment()[static_cast<std::size_t>(i)]),
                    oc.costs()[static_cast<std::size_t>(i)], static_cast<double>(open), static_cast<double>(round)});
  }
  run.extra_files.emplace_back("coreset.csv", [cc](std::ostream& o) {
    o << "index,weight,center_id\n";
    for (std::size_t i = 0; i < cc.coreset.indices.size(); ++i)
      o << cc.coreset.indices[i] << ',' << std::setprecision(17) << cc.coreset.weights[static_cast<Index>(i)] << ','
        << cc.center_ids[i] << '\n';
  });
}

void cmd_active_regression(Run& run) {
  const Matrix A = primary_matrix(run, false);
  const Vector b = load_labels(run, A);
  const std::string mode = run.opt.mode.empty() ? "lp" : run.opt.mode;
  SeededRng rng(run.opt.seed);
  LabelOracle oracle = LabelOracle::from_vector(b);
  run.report["mode"] = mode;
  if (mode == "lp" || mode == "online") {
    if (run.opt.p <= 2.0) throw UsageError("active-regression needs p > 2 in lp/online mode");
    ActiveConfig cfg;
    cfg.theta = run.consts.get("theta", cfg.theta);
    cfg.polylog_exp = run.consts.get("polylog_exp", cfg.polylog_exp);
    cfg.ell_const = run.consts.get("ell_const", cfg.ell_const);
    cfg.online_weight_const = run.consts.get("online_weight_const", cfg.online_weight_const);
    const double err_slack = run.consts.get("error_slack", 1.0);
    const ActiveResult res = mode == "lp" ? active_lp_solve(A, oracle, run.opt.p, run.opt.eps, run.opt.delta, rng, cfg)
                                          : active_online_lp_solve(A, oracle, run.opt.p, run.opt.eps, run.opt.delta, rng, cfg);
    const ExactRegression ex = exact_lp_regression(A, b, run.opt.p);
    const double cost = (A * res.x - b).array().abs().pow(run.opt.p).sum();
    const double opt = std::pow(ex.opt, run.opt.p);
    // Costs at rounding level relative to the labels count as an exact fit.
    const double floor = 1e-20 * std::max(1.0, b.array().abs().pow(run.opt.p).sum());
    const double rel = std::max(cost, floor) / std::max(opt, floor);
    run.report["result"] = {{"x", to_json(res.x)},
                            {"chosen", res.chosen},
                            {"candidates", res.ell},
                            {"queries_expected", res.queries_expected},
                            {"queries_realized", res.queries_realized},
                            {"relative_error", rel},
                            {"oracle_method", ex.method}};
    run.report["budgets"] = {{"queries",
                              {{"formula", mode == "lp" ? "d^(p/2) eps^-(p-1) [(ln d)^2 ln n + ln 1/delta] (log2 2/eps)^2 ln 1/delta"
                                                        : "offline budget * (log2 n)^(p/2+1)"},
                               {"value", res.query_budget}}},
                             {"relative_error", {{"formula", "1+error_slack*eps"}, {"value", 1.0 + err_slack * run.opt.eps}}}};
    run.check("queries", static_cast<double>(res.queries_realized), res.query_budget,
              static_cast<double>(res.queries_realized) <= res.query_budget);
    run.check("relative_error", rel, 1.0 + err_slack * run.opt.eps, rel <= 1.0 + err_slack * run.opt.eps);
    run.series.header = {"candidate", "rows", "sampled_cost", "kkt", "converged", "chosen"};
    for (std::size_t c = 0; c < res.candidates.size(); ++c) {
      const ActiveCandidate& cd = res.candidates[c];
      run.series.add({static_cast<double>(c), static_cast<double>(cd.rows.size()), cd.sampled_cost, cd.kkt,
                      cd.converged ? 1.0 : 0.0, static_cast<Index>(c) == res.chosen ? 1.0 : 0.0});
    }
  } else if (mode == "linf" || mode == "lp_q") {
    const double cert_const = run.consts.get("certificate_const", 4.0);
    LargeDistortionResult res;
    double p_eval = run.opt.p;
    if (mode == "linf") {
      res = active_linf(A, oracle, rng, run.opt.eps);
      p_eval = std::numeric_limits<double>::infinity();
    } else {
      if (!(run.opt.q >= 2.0 && run.opt.q < run.opt.p)) throw UsageError("lp_q mode needs 2 <= q < p");
      res = active_lp_q(A, oracle, run.opt.p, run.opt.q, rng, run.opt.eps, run.opt.delta);
    }
    const ExactRegression ex = exact_lp_regression(A, b, p_eval);
    const Vector r = A * res.x - b;
    const double achieved = std::isinf(p_eval) ? r.cwiseAbs().maxCoeff() : std::pow(r.array().abs().pow(p_eval).sum(), 1.0 / p_eval);
    const double floor = 1e-10 * std::max(1.0, b.cwiseAbs().maxCoeff());
    const double ratio = std::max(achieved, floor) / std::max(ex.opt, floor);
    run.report["result"] = {{"x", to_json(res.x)},
                            {"rows", to_json(res.rows)},
                            {"queries_realized", res.queries},
                            {"distortion", ratio},
                            {"certificate", res.certificate},
                            {"oracle_method", ex.method}};
    run.report["budgets"] = {{"distortion", {{"formula", mode == "linf" ? "certificate_const*sqrt(d)" : "certificate_const*d^((1-q/p)/2)"},
                                             {"value", cert_const * res.certificate}}}};
    run.check("distortion", ratio, cert_const * res.certificate, ratio <= cert_const * res.certificate);
    run.series.header = {"row", "queried"};
    for (Index i = 0; i < A.rows(); ++i) run.series.add({static_cast<double>(i), oracle.was_read(i) ? 1.0 : 0.0});
  } else {
    throw UsageError("unknown --mode '" + mode + "' (lp, online, linf, lp_q)");
  }
}

void cmd_oracle(Run& run) {
  const Matrix A = primary_matrix(run, false);
  const std::string method = run.opt.method.empty() ? "regression" : run.opt.method;
  OracleReport rep;
  if (method == "regression") {
    const Vector b = load_labels(run, A);
    const ExactRegression ex = exact_lp_regression(A, b, run.opt.p);
    std::ostringstream params;
    params << "p=" << std::setprecision(17) << run.opt.p;
    rep = {instance_hash(A, params.str()), ex.opt, ex.method, 0.0};
    run.report["solution"] = to_json(ex.x);
    run.report["certified"] = ex.certified;
    run.check("certified", ex.certified ? 1.0 : 0.0, 1.0, ex.certified);
    run.series.header = {"row", "residual"};
    const Vector r = A * ex.x - b;
    for (Index i = 0; i < r.size(); ++i) run.series.add({static_cast<double>(i), r[i]});
  } else if (method == "brute-css") {
    const Index size = static_cast<Index>(run.consts.get("subset_size", static_cast<double>(run.opt.k)));
    CssObjective obj = run.opt.loss == "linf"                ? CssObjective::linf(A.rows())
                       : run.opt.loss.rfind("lp:", 0) == 0 ? CssObjective::lp(std::stod(run.opt.loss.substr(3)))
                                                             : CssObjective::gnorm(LossSpec::parse(run.opt.loss));
    BruteCssResult br;
    try {
      br = brute_css(A, size, obj);
    } catch (const BudgetExceeded& e) {
      throw UsageError(e.what());
    }
    rep = {instance_hash(A, obj.name() + ":" + std::to_string(size)), br.residual, "brute_css", 0.0};
    run.report["subset"] = to_json(br.subset);
    run.report["subsets_checked"] = br.subsets_checked;
    run.series.header = {"position", "column"};
    for (std::size_t i = 0; i < br.subset.size(); ++i) run.series.add({static_cast<double>(i), static_cast<double>(br.subset[i])});
  } else if (method == "cluster-sensitivity") {
    if (A.cols() != 2 || run.opt.k > 2) throw UsageError("cluster-sensitivity oracle needs 2-D points and k <= 2");
    const Vector s = exact_cluster_sensitivity(A, run.opt.k, run.opt.p);
    rep = {instance_hash(A, "k=" + std::to_string(run.opt.k)), s.sum(), "grid_sensitivity", 0.0};
    run.series.header = {"point", "sensitivity"};
    for (Index i = 0; i < s.size(); ++i) run.series.add({static_cast<double>(i), s[i]});
  } else {
    throw UsageError("unknown --method '" + method + "' (regression, brute-css, cluster-sensitivity)");
  }
  run.report["oracle"] = {{"instance_hash", rep.instance_hash}, {"value", rep.value}, {"method", rep.method}};
}

/// Seeded invariant suites at small scale; each contributes checks to the report.
void cmd_verify(Run& run) {
  const std::string suite = run.opt.suite;
  const std::vector<std::string> known = {"spanning", "lewis", "ose", "online-subspace", "clustering", "active"};
  if (suite != "all" && std::find(known.begin(), known.end(), suite) == known.end())
    throw UsageError("unknown --suite '" + suite + "'");
  const auto want = [&](const std::string& s) { return suite == "all" || suite == s; };
  const Index instances = static_cast<Index>(run.consts.get("instances", 10.0));
  SeededRng root(run.opt.seed);
  run.series.header = {"suite", "instance", "measured"};
  const auto gauss = [](Index n, Index d, SeededRng& r) {
    Matrix A(n, d);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) A(i, j) = r.normal();
    return A;
  };
  if (want("spanning")) {
    double worst_w = 0.0, worst_c = 0.0, worst_size = 0.0;
    for (Index t = 0; t < instances; ++t) {
      SeededRng r = root.child(1).child(static_cast<std::uint64_t>(t));
      const Index d = 2 + static_cast<Index>(r.below(7));
      const Matrix A = gauss(100 + static_cast<Index>(r.below(200)), d, r);
      SeededRng r0 = r.child(0), r1 = r.child(1);
      const EllipsoidCoreset ec = mvee_coreset(A, 0.25, MveeMethod::coordinate_ascent, r0);
      const SpanningSet ss = l2_spanning_set(A, 0.25, r1);
      worst_w = std::max(worst_w, ec.witnesses.maxCoeff());
      worst_c = std::max(worst_c, ss.max_certificate());
      worst_size = std::max(worst_size, static_cast<double>(ss.support.size()) / (8.0 * d * loglog2(d)));
      run.series.add({1, static_cast<double>(t), ss.max_certificate()});
    }
    run.check("spanning:witness", worst_w, 1.25 + 1e-6, worst_w <= 1.25 + 1e-6);
    run.check("spanning:certificate", worst_c, 1.25, worst_c <= 1.25);
    run.check("spanning:size_ratio", worst_size, 1.0, worst_size <= 1.0);
  }
  if (want("lewis")) {
    double worst_sum = 0.0, worst_side = 0.0;
    for (Index t = 0; t < instances; ++t) {
      SeededRng r = root.child(2).child(static_cast<std::uint64_t>(t));
      const Index d = 2 + static_cast<Index>(r.below(4));
      const Matrix A = gauss(200, d, r);
      for (double p : {1.0, 3.0, 6.0}) {
        const LewisWeights lw = compute_lewis(A, p);
        const Vector tau = lewis_leverage(A, lw.w, p);
        worst_sum = std::max(worst_sum, lw.w.sum() / (4.0 * d));
        for (Index i = 0; i < A.rows(); ++i) worst_side = std::max(worst_side, tau[i] - lw.w[i] / lw.alpha);
        run.series.add({2, static_cast<double>(t), lw.w.sum()});
      }
    }
    run.check("lewis:sum_ratio", worst_sum, 1.0, worst_sum <= 1.0);
    run.check("lewis:one_sided", worst_side, 1e-8, worst_side <= 1e-8);
  }
  if (want("ose")) {
    double lo = INFINITY, hi_ratio = 0.0;
    for (Index t = 0; t < instances; ++t) {
      SeededRng r = root.child(3).child(static_cast<std::uint64_t>(t));
      const Index d = 3;
      const Matrix A = gauss(300, d, r);
      const Index rows = static_cast<Index>(std::ceil(40.0 * d * std::log(static_cast<double>(d))));
      SeededRng rs = r.child(0);
      const Matrix SA = pstable_embed(A, 1.0, rows, rs);
      for (Index j = 0; j < 100; ++j) {
        SeededRng rd = r.child(1).child(static_cast<std::uint64_t>(j));
        Vector x(d);
        for (Index c = 0; c < d; ++c) x[c] = rd.normal();
        const double ratio = (SA * x).lpNorm<1>() / (A * x).lpNorm<1>();
        lo = std::min(lo, ratio);
        hi_ratio = std::max(hi_ratio, ratio / (8.0 * d));
      }
      run.series.add({3, static_cast<double>(t), lo});
    }
    run.check("ose:min_ratio", lo, 0.9, lo >= 0.9);
    run.check("ose:expansion_ratio", hi_ratio, 1.0, hi_ratio <= 1.0);
  }
  if (want("online-subspace")) {
    double worst = 0.0;
    for (Index t = 0; t < instances; ++t) {
      SeededRng r = root.child(4).child(static_cast<std::uint64_t>(t));
      const Matrix A = gauss(60, 3, r);
      OnlineSubspaceTrace tr;
      SeededRng rc = r.child(0);
      online_subspace_coreset(A, 1, 1.0, 0.5, 0.1, rc, {}, &tr);
      worst = std::max(worst, tr.sensitivity_total / tr.sensitivity_budget);
      run.series.add({4, static_cast<double>(t), tr.sensitivity_total});
    }
    run.check("online-subspace:budget_ratio", worst, 1.0, worst <= 1.0);
  }
  if (want("clustering")) {
    double worst = 0.0;
    for (Index t = 0; t < instances; ++t) {
      SeededRng r = root.child(5).child(static_cast<std::uint64_t>(t));
      const Matrix P = gauss(80, 2, r);
      SeededRng r0 = r.child(0);
      const OnlineClusterer oc = online_cluster(P, 2, 2.0, 0.0, r0);
      const double ws = default_w_star(P, 2, 2.0), W = default_W_upper(P, 2.0);
      const double budget = 16.0 * 2.0 * std::log2(80.0) * std::max(1.0, std::log2(std::max(2.0, W / ws)));
      worst = std::max(worst, static_cast<double>(oc.centers().size()) / budget);
      run.series.add({5, static_cast<double>(t), static_cast<double>(oc.centers().size())});
    }
    run.check("clustering:centers_ratio", worst, 1.0, worst <= 1.0);
  }
  if (want("active")) {
    double worst = 0.0;
    for (Index t = 0; t < instances; ++t) {
      SeededRng r = root.child(6).child(static_cast<std::uint64_t>(t));
      const Matrix A = gauss(200, 3, r);
      Vector x(3);
      for (Index j = 0; j < 3; ++j) x[j] = r.normal();
      Vector b = A * x;
      LabelOracle o = LabelOracle::from_vector(b);
      SeededRng ra = r.child(0);
      ActiveConfig cfg;
      cfg.theta = 1e-3;
      const ActiveResult res = active_lp_solve(A, o, 4.0, 0.25, 0.1, ra, cfg);
      const double err = (res.x - x).norm() / x.norm();
      worst = std::max(worst, err);
      run.series.add({6, static_cast<double>(t), err});
    }
    run.check("active:exact_recovery", worst, 1e-8, worst <= 1e-8);
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_outputs(const Run& run) {
  std::filesystem::create_directories(run.opt.out);
  {
    std::ofstream f(std::filesystem::path(run.opt.out) / "report.json");
    f << run.report.dump(2) << '\n';
  }
  {
    std::ofstream f(std::filesystem::path(run.opt.out) / "series.csv");
    for (std::size_t i = 0; i < run.series.header.size(); ++i) f << (i ? "," : "") << run.series.header[i];
    f << '\n' << std::setprecision(17);
    for (const auto& row : run.series.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
      f << '\n';
    }
  }
  for (const auto& [name, writer] : run.extra_files) {
    std::ofstream f(std::filesystem::path(run.opt.out) / name);
    writer(f);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coreset-kit: coresets, sketches and active regression experiments"};
  app.require_subcommand(1, 1);
  Options opt;
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"spanning-set", "ellipsoid coreset and l2 spanning set with certificates"},
      {"lewis", "Lewis weights and Lewis-weight sampling"},
      {"ose-bench", "p-stable oblivious subspace embedding distortion benchmark"},
      {"css", "column subset selection (g-norm loss, lp:<p>, or linf)"},
      {"online-subspace", "online strong coreset for rank-k subspace approximation"},
      {"online-cluster", "online bicriteria clustering and sensitivity-sampling coreset"},
      {"active-regression", "query-efficient regression (lp, online, linf, lp_q)"},
      {"oracle", "brute-force reference values (regression, brute-css, cluster-sensitivity)"},
      {"verify", "seeded invariant suites"}};
  for (const auto& [name, desc] : subs) {
    CLI::App* sc = app.add_subcommand(name, desc);
    sc->add_option("--input", opt.input, "matrix file or synth:gaussian:<n>x<d>");
    sc->add_option("--stream", opt.stream, "stream file (one row per line)");
    sc->add_option("--labels", opt.labels, "label file (one value per line) or synth:planted");
    sc->add_option("--k", opt.k, "rank / number of clusters")->check(CLI::PositiveNumber);
    sc->add_option("--p", opt.p, "norm exponent");
    sc->add_option("--q", opt.q, "target exponent for lp_q mode");
    sc->add_option("--eps", opt.eps, "accuracy parameter")->check(CLI::Range(1e-9, 1.0));
    sc->add_option("--delta", opt.delta, "failure probability")->check(CLI::Range(1e-12, 0.999999));
    sc->add_option("--seed", opt.seed, "random seed")->required();
    sc->add_option("--const", opt.consts, "constant override name=value (repeatable)");
    sc->add_option("--out", opt.out, "output directory");
    sc->add_option("--loss", opt.loss, "css loss: huber, l1_l2, fair:<c>, cauchy:<c>, abs:<p>, lp:<p>, linf");
    sc->add_option("--mode", opt.mode, "active-regression mode: lp, online, linf, lp_q");
    sc->add_option("--method", opt.method, "oracle method: regression, brute-css, cluster-sensitivity");
    sc->add_option("--suite", opt.suite, "verify suite: spanning, lewis, ose, online-subspace, clustering, active, all");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  opt.subcommand = app.get_subcommands().front()->get_name();

  const std::map<std::string, void (*)(Run&)> handlers = {
      {"spanning-set", cmd_spanning_set}, {"lewis", cmd_lewis},
      {"ose-bench", cmd_ose_bench},       {"css", cmd_css},
      {"online-subspace", cmd_online_subspace}, {"online-cluster", cmd_online_cluster},
      {"active-regression", cmd_active_regression}, {"oracle", cmd_oracle},
      {"verify", cmd_verify}};
  try {
    Run run{opt, Constants(opt.consts), ordered_json::object(), {}, true, {}};
    run.report["timestamp"] = utc_timestamp();
    run.report["config"] = {{"subcommand", opt.subcommand}, {"input", opt.input}, {"stream", opt.stream},
                            {"labels", opt.labels},         {"k", opt.k},         {"p", opt.p},
                            {"q", opt.q},                   {"eps", opt.eps},     {"delta", opt.delta},
                            {"seed", opt.seed},             {"loss", opt.loss},   {"mode", opt.mode},
                            {"method", opt.method},         {"suite", opt.suite}};
    run.report["checks"] = ordered_json::array();
    handlers.at(opt.subcommand)(run);
    run.consts.check_all_used();
    run.report["constants"] = run.consts.to_json();
    run.report["pass"] = run.pass;
    write_outputs(run);
    std::cout << opt.subcommand << ": " << (run.pass ? "PASS" : "FAIL") << " (" << opt.out << "/report.json)\n";
    return run.pass ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
