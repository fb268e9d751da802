#pragma once

#include <optional>

#include "coreset/loss.hpp"
#include "coreset/types.hpp"

namespace coreset {

/// Matrix norm selector. Rows are the outer index: p2 = (Σ_i ‖m_i‖₂^p)^{1/p},
/// inf2 = max_i ‖m_i‖₂. g reports the un-rooted sum Σ g(M_ij).
struct NormMode {
  enum class Kind { entrywise_p, p2, g, entrywise_inf, inf2 };
  Kind kind = Kind::entrywise_p;
  double p = 2.0;
  std::optional<LossSpec> loss;

  static NormMode entrywise(double p) { return {Kind::entrywise_p, p, std::nullopt}; }
  static NormMode row_p2(double p) { return {Kind::p2, p, std::nullopt}; }
  static NormMode gnorm(const LossSpec& g) { return {Kind::g, 0.0, g}; }
  static NormMode entrywise_inf() { return {Kind::entrywise_inf, 0.0, std::nullopt}; }
  static NormMode inf2() { return {Kind::inf2, 0.0, std::nullopt}; }
};

double norm(const Matrix& m, const NormMode& mode);

/// ‖v‖_p for p ≥ 1 (p = +∞ gives the max norm); accepts any p > 0 as a quasi-norm.
double vec_norm(const Vector& v, double p);
/// Σ |v_i|^p.
double vec_pow_sum(const Vector& v, double p);

/// Throws InvalidInput when any entry is non-finite.
void check_finite(const Matrix& m, const char* what);

}  // namespace coreset
