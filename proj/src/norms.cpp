#include "coreset/norms.hpp"

#include <cmath>
#include <string>

namespace coreset {

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entry");
}

double vec_pow_sum(const Vector& v, double p) {
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]), p);
  return s;
}

double vec_norm(const Vector& v, double p) {
  if (v.size() == 0) return 0.0;
  if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
  if (p == 2.0) return v.norm();
  // Scale by the max entry so large p does not overflow.
  const double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]) / m, p);
  return m * std::pow(s, 1.0 / p);
}

double norm(const Matrix& m, const NormMode& mode) {
  check_finite(m, "norm");
  switch (mode.kind) {
    case NormMode::Kind::entrywise_p: {
      require(mode.p >= 1.0, "entrywise norm needs p >= 1");
      const Vector flat = Eigen::Map<const Vector>(m.data(), m.size());
      return vec_norm(flat, mode.p);
    }
    case NormMode::Kind::p2: {
      require(mode.p >= 1.0, "(p,2) norm needs p >= 1");
      return vec_norm(m.rowwise().norm(), mode.p);
    }
    case NormMode::Kind::g: {
      require(mode.loss.has_value(), "g norm needs a loss");
      double s = 0.0;
      for (Index i = 0; i < m.size(); ++i) s += (*mode.loss)(m.data()[i]);
      return s;
    }
    case NormMode::Kind::entrywise_inf: return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
    case NormMode::Kind::inf2: return m.rows() == 0 ? 0.0 : m.rowwise().norm().maxCoeff();
  }
  return 0.0;
}

}  // namespace coreset
