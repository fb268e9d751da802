#include "coreset/sketch.hpp"

#include <cmath>

#include "coreset/norms.hpp"

namespace coreset {

double pstable_draw(double p, SeededRng& rng) {
  require(p > 0.0 && p <= 2.0, "pstable_draw: p must lie in (0, 2]");
  const double V = M_PI * (rng.uniform() - 0.5);
  const double W = rng.exponential();
  if (p == 1.0) return std::tan(V);
  const double a = p;
  return std::sin(a * V) / std::pow(std::cos(V), 1.0 / a) * std::pow(std::cos(V - a * V) / W, (1.0 - a) / a);
}

Matrix pstable_matrix(double p, Index r, Index n, SeededRng& rng, double C) {
  require(r >= 1, "pstable_matrix: r must be positive");
  Matrix S(r, n);
  const double scale = C / std::pow(static_cast<double>(r), 1.0 / p);
  for (Index i = 0; i < r; ++i) {
    SeededRng row = rng.child(static_cast<std::uint64_t>(i));
    for (Index j = 0; j < n; ++j) S(i, j) = scale * pstable_draw(p, row);
  }
  return S;
}

Matrix pstable_embed(const Matrix& A, double p, Index r, SeededRng& rng, double C) {
  require(p >= 1.0 && p < 2.0, "pstable_embed: p must lie in [1, 2)");
  check_finite(A, "pstable_embed");
  return pstable_matrix(p, r, A.rows(), rng, C) * A;
}

Index next_pow2(Index n) {
  Index m = 1;
  while (m < n) m <<= 1;
  return m;
}

void fwht_inplace(Matrix& X) {
  const Index n = X.rows();
  require(n > 0 && (n & (n - 1)) == 0, "fwht: length must be a power of two");
  for (Index h = 1; h < n; h <<= 1) {
    for (Index i = 0; i < n; i += 2 * h) {
      for (Index j = i; j < i + h; ++j) {
        for (Index c = 0; c < X.cols(); ++c) {
          const double a = X(j, c);
          const double b = X(j + h, c);
          X(j, c) = a + b;
          X(j + h, c) = a - b;
        }
      }
    }
  }
  X /= std::sqrt(static_cast<double>(n));
}

SrhtSketch make_srht(Index n, Index r, SeededRng& rng) {
  SrhtSketch s;
  s.n_input = n;
  s.n_padded = next_pow2(std::max<Index>(n, 1));
  if (r < 1 || r > s.n_padded) throw InvalidInput("srht: r must lie in [1, padded n]");
  s.r = r;
  s.signs.resize(s.n_padded);
  for (Index i = 0; i < s.n_padded; ++i) s.signs[i] = rng.rademacher();
  const auto pick = sample_without_replacement(static_cast<long>(s.n_padded), static_cast<long>(r), rng);
  for (long v : pick) s.rows.push_back(static_cast<Index>(v));
  return s;
}

Matrix SrhtSketch::apply(const Matrix& A) const {
  if (A.rows() != n_input) throw DimensionMismatch("srht apply: row count differs from sketch input size");
  Matrix X = Matrix::Zero(n_padded, A.cols());
  for (Index i = 0; i < n_input; ++i) X.row(i) = signs[i] * A.row(i);
  fwht_inplace(X);
  const double f = std::sqrt(static_cast<double>(n_padded) / static_cast<double>(r));
  Matrix out(r, A.cols());
  for (Index i = 0; i < r; ++i) out.row(i) = f * X.row(rows[static_cast<std::size_t>(i)]);
  return out;
}

Vector SrhtSketch::apply(const Vector& x) const {
  Matrix m = x;
  return apply(m).col(0);
}

Matrix SrhtSketch::dense() const { return apply(Matrix(Matrix::Identity(n_input, n_input))); }

Matrix srht_apply(const Matrix& A, Index r, SeededRng& rng) {
  check_finite(A, "srht_apply");
  const SrhtSketch s = make_srht(A.rows(), r, rng);
  return s.apply(A);
}

}  // namespace coreset
