#include "coreset/linalg.hpp"

#include <string>

#include "coreset/norms.hpp"

namespace coreset {

namespace {

double rank_threshold(const Matrix& A) {
  const double fro = A.norm();
  double max_col = 0.0;
  for (Index j = 0; j < A.cols(); ++j) max_col = std::max(max_col, A.col(j).norm());
  // Eigen compares |R_ii| against threshold·max|R_11|; R_11 ≈ max column norm.
  return max_col > 0.0 ? 1e-10 * fro / max_col : 1e-10;
}

}  // namespace

Matrix least_squares(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows()) {
    throw DimensionMismatch("least_squares: A has " + std::to_string(A.rows()) + " rows, B has " +
                            std::to_string(B.rows()));
  }
  check_finite(A, "least_squares A");
  check_finite(B, "least_squares B");
  if (A.cols() == 0) return Matrix::Zero(0, B.cols());
  Eigen::MatrixXd a = A;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(rank_threshold(A));
  cod.compute(a);
  Eigen::MatrixXd x = cod.solve(Eigen::MatrixXd(B));
  return x;
}

Vector least_squares(const Matrix& A, const Vector& b) {
  Matrix B = b;
  return least_squares(A, B).col(0);
}

Matrix best_rank_k(const Matrix& A, Index k) {
  const Index m = std::min(A.rows(), A.cols());
  require(k >= 1 && k <= m, "best_rank_k: k out of range");
  check_finite(A, "best_rank_k");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd{A}, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Matrix out = svd.matrixU().leftCols(k) * s.head(k).asDiagonal() * svd.matrixV().leftCols(k).transpose();
  return out;
}

Index numerical_rank(const Matrix& A) {
  if (A.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.rows(), A.cols());
  qr.setThreshold(rank_threshold(A));
  qr.compute(Eigen::MatrixXd{A});
  return qr.rank();
}

Matrix column_basis(const Matrix& A) {
  if (A.size() == 0) return Matrix::Zero(A.rows(), 0);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.rows(), A.cols());
  qr.setThreshold(rank_threshold(A));
  qr.compute(Eigen::MatrixXd{A});
  const Index r = qr.rank();
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), r);
  return q;
}

Vector leverage_scores(const Matrix& A) {
  const Matrix Q = column_basis(A);
  return Q.rowwise().squaredNorm();
}

Matrix select_rows(const Matrix& A, const IndexList& rows) {
  Matrix out(static_cast<Index>(rows.size()), A.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = A.row(rows[i]);
  return out;
}

Matrix select_cols(const Matrix& A, const IndexList& cols) {
  Matrix out(A.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = A.col(cols[j]);
  return out;
}

Vector quadratic_forms(const Matrix& A, const Matrix& M) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Eigen::MatrixXd{M});
  if (ldlt.info() != Eigen::Success) throw RankDeficient("quadratic_forms: factorization failed");
  Eigen::MatrixXd sol = ldlt.solve(Eigen::MatrixXd(A.transpose()));
  Vector q(A.rows());
  for (Index i = 0; i < A.rows(); ++i) q[i] = A.row(i).dot(sol.col(i));
  return q;
}

Matrix pseudo_inverse(const Matrix& A) {
  Eigen::MatrixXd a = A;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(rank_threshold(A));
  cod.compute(a);
  Eigen::MatrixXd p = cod.pseudoInverse();
  return p;
}

}  // namespace coreset
