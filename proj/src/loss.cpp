#include "coreset/loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coreset/types.hpp"

namespace coreset {

namespace {

/// Numerical linear-growth constant of a loss over |x| ∈ (0, R]:
/// min_{x ≤ y} (g(y)/y)/(g(x)/x) = min_y h(y)/max_{x≤y} h(x), h(x) = g(x)/x.
double measured_lin(const LossSpec& g, double radius) {
  constexpr int kSteps = 4000;
  double running_max = 0.0;
  double best = 1.0;
  for (int i = 1; i <= kSteps; ++i) {
    // Geometric grid from 1e-6·R to R.
    const double x = radius * std::pow(1e-6, 1.0 - static_cast<double>(i) / kSteps);
    const double h = g(x) / x;
    running_max = std::max(running_max, h);
    best = std::min(best, h / running_max);
  }
  return best;
}

}  // namespace

LossSpec::LossSpec(LossKind kind, double param) : kind_(kind), param_(param) {}

LossSpec LossSpec::huber() { return {LossKind::huber, 1.0}; }

LossSpec LossSpec::abs_p(double p) {
  require(p >= 1.0 && std::isfinite(p), "abs_p loss needs finite p >= 1");
  return {LossKind::abs_p, p};
}

LossSpec LossSpec::l1_l2() { return {LossKind::l1_l2, 1.0}; }

LossSpec LossSpec::fair(double c) {
  require(c > 0.0, "fair loss needs c > 0");
  return {LossKind::fair, c};
}

LossSpec LossSpec::cauchy(double c) {
  require(c > 0.0, "cauchy loss needs c > 0");
  LossSpec g{LossKind::cauchy, c};
  // Cauchy grows only logarithmically, so linear growth holds on a bounded
  // range of residuals only; the constant is measured on |x| ≤ 1e3·c.
  g.lin_ = measured_lin(g, 1e3 * c);
  return g;
}

LossSpec LossSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const double arg = colon == std::string::npos ? 0.0 : std::stod(text.substr(colon + 1));
  if (head == "huber") return huber();
  if (head == "l1_l2") return l1_l2();
  if (head == "abs_p") return abs_p(arg);
  if (head == "fair") return fair(colon == std::string::npos ? 1.0 : arg);
  if (head == "cauchy") return cauchy(colon == std::string::npos ? 1.0 : arg);
  if (head.size() > 1 && head[0] == 'l') return abs_p(std::stod(head.substr(1)));
  throw InvalidInput("unknown loss: " + text);
}

std::string LossSpec::name() const {
  std::ostringstream os;
  switch (kind_) {
    case LossKind::huber: return "huber";
    case LossKind::l1_l2: return "l1_l2";
    case LossKind::abs_p: os << "abs_p:" << param_; return os.str();
    case LossKind::fair: os << "fair:" << param_; return os.str();
    case LossKind::cauchy: os << "cauchy:" << param_; return os.str();
  }
  return "?";
}

double LossSpec::operator()(double x) const {
  const double a = std::abs(x);
  switch (kind_) {
    case LossKind::huber: return a <= 1.0 ? 0.5 * a * a : a - 0.5;
    case LossKind::abs_p: return std::pow(a, param_);
    case LossKind::l1_l2: return 2.0 * (std::sqrt(1.0 + 0.5 * a * a) - 1.0);
    case LossKind::fair: {
      const double c = param_;
      return c * c * (a / c - std::log1p(a / c));
    }
    case LossKind::cauchy: {
      const double c = param_;
      return 0.5 * c * c * std::log1p((a / c) * (a / c));
    }
  }
  return 0.0;
}

double LossSpec::derivative(double x) const { return irls_weight(x) * x; }

double LossSpec::irls_weight(double r) const {
  const double a = std::abs(r);
  switch (kind_) {
    case LossKind::huber: return a <= 1.0 ? 1.0 : 1.0 / a;
    case LossKind::abs_p:
      if (param_ == 2.0) return 2.0;
      return a == 0.0 ? (param_ > 2.0 ? 0.0 : 1e300) : param_ * std::pow(a, param_ - 2.0);
    case LossKind::l1_l2: return 1.0 / std::sqrt(1.0 + 0.5 * a * a);
    case LossKind::fair: return 1.0 / (1.0 + a / param_);
    case LossKind::cauchy: return 1.0 / (1.0 + (a / param_) * (a / param_));
  }
  return 1.0;
}

double LossSpec::ati(double t) const {
  t = std::max(t, 1.0);
  switch (kind_) {
    case LossKind::abs_p: return std::pow(t, param_ - 1.0);
    // Convex, g(0) = 0 and x·g'(x) ≤ 2g(x): Jensen gives ati = t.
    case LossKind::huber:
    case LossKind::l1_l2:
    case LossKind::fair: return t;
    // Nondecreasing with g(sx) ≤ s²g(x) for s ≥ 1: g(Σx) ≤ g(t·max) ≤ t²Σg.
    case LossKind::cauchy: return t * t;
  }
  return t;
}

}  // namespace coreset
