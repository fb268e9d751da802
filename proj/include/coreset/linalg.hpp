#pragma once

#include "coreset/types.hpp"

namespace coreset {

/// argmin_X ‖AX − B‖_F, minimum-norm solution when A is rank deficient.
Matrix least_squares(const Matrix& A, const Matrix& B);
Vector least_squares(const Matrix& A, const Vector& b);

/// Frobenius-optimal rank-k approximation (truncated SVD).
Matrix best_rank_k(const Matrix& A, Index k);

/// Numerical rank by column-pivoted Householder QR, tolerance 1e-10·‖A‖_F.
Index numerical_rank(const Matrix& A);

/// Orthonormal basis (as columns) of col(A), numerical rank as above.
Matrix column_basis(const Matrix& A);

/// Leverage scores of the rows of A (τ_i = ‖row i of an orthonormal col basis‖²).
Vector leverage_scores(const Matrix& A);

Matrix select_rows(const Matrix& A, const IndexList& rows);
Matrix select_cols(const Matrix& A, const IndexList& cols);

/// Quadratic forms q_i = a_iᵀ M⁻¹ a_i for symmetric positive-definite M.
Vector quadratic_forms(const Matrix& A, const Matrix& M);

/// Moore–Penrose pseudoinverse.
Matrix pseudo_inverse(const Matrix& A);

}  // namespace coreset
