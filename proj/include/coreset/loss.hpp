#pragma once

#include <string>

namespace coreset {

enum class LossKind { huber, abs_p, l1_l2, fair, cauchy };

/// Entrywise loss g together with its structural constants:
///   ati(t): g(x_1+…+x_t) ≤ ati(t)·Σ g(x_i)
///   mon:    g(x) ≤ mon·g(y) whenever |x| ≤ |y|
///   lin:    g(y)/|y| ≥ lin·g(x)/|x| whenever 0 < |x| ≤ |y|
class LossSpec {
 public:
  static LossSpec huber();
  static LossSpec abs_p(double p);
  static LossSpec l1_l2();
  static LossSpec fair(double c);
  static LossSpec cauchy(double c);
  /// Parses "huber", "l1_l2", "abs_p:<p>", "l<p>", "fair:<c>", "cauchy:<c>".
  static LossSpec parse(const std::string& text);

  [[nodiscard]] LossKind kind() const { return kind_; }
  [[nodiscard]] double param() const { return param_; }
  [[nodiscard]] std::string name() const;

  /// g(x).
  [[nodiscard]] double operator()(double x) const;
  /// g'(x).
  [[nodiscard]] double derivative(double x) const;
  /// IRLS weight g'(r)/r with the limit value at r = 0.
  [[nodiscard]] double irls_weight(double r) const;

  [[nodiscard]] double ati(double t) const;
  [[nodiscard]] double mon() const { return 1.0; }
  [[nodiscard]] double lin() const { return lin_; }

 private:
  LossSpec(LossKind kind, double param);
  LossKind kind_;
  double param_;
  double lin_ = 1.0;
};

}  // namespace coreset
