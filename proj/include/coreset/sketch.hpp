#pragma once

#include "coreset/rng.hpp"
#include "coreset/types.hpp"

namespace coreset {

/// Standard symmetric p-stable draw (Chambers–Mallows–Stuck), p ∈ (0, 2].
/// p = 1 is the standard Cauchy law; p = 2 is Gaussian with variance 2.
double pstable_draw(double p, SeededRng& rng);

/// r×n matrix of i.i.d. p-stable entries scaled by C/r^{1/p}; row i uses stream rng.child(i).
Matrix pstable_matrix(double p, Index r, Index n, SeededRng& rng, double C = 4.0);

/// S·A for a fresh p-stable S (p ∈ [1, 2)).
Matrix pstable_embed(const Matrix& A, double p, Index r, SeededRng& rng, double C = 4.0);

/// √(n/r)·R·H·D with n the padded power of two, H the orthonormal Walsh–Hadamard
/// matrix, D random signs, and R a uniform choice of r distinct rows.
struct SrhtSketch {
  Index r = 0;
  Index n_input = 0;
  Index n_padded = 0;
  Vector signs;
  IndexList rows;

  [[nodiscard]] Matrix apply(const Matrix& A) const;  // (r × cols) from (n_input × cols)
  [[nodiscard]] Vector apply(const Vector& x) const;
  [[nodiscard]] Matrix dense() const;                 // r × n_input
};

SrhtSketch make_srht(Index n, Index r, SeededRng& rng);
Matrix srht_apply(const Matrix& A, Index r, SeededRng& rng);

/// In-place orthonormal fast Walsh–Hadamard transform over the leading index
/// (length must be a power of two).
void fwht_inplace(Matrix& X);

Index next_pow2(Index n);

}  // namespace coreset
