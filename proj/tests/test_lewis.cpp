#include <cmath>

#include "coreset/lewis.hpp"
#include "coreset/linalg.hpp"
#include "coreset/norms.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace coreset;
using testutil::gaussian;
using testutil::gaussian_vec;

namespace {

/// τ_i(W^{1/2−1/p}A) evaluated from scratch through the normal equations.
Vector tau_direct(const Matrix& A, const Vector& w, double p) {
  Vector s(w.size());
  for (Index i = 0; i < w.size(); ++i) s[i] = std::pow(w[i], 0.5 - 1.0 / p);
  const Matrix B = s.asDiagonal() * A;
  const Matrix G = (B.transpose() * B).inverse();
  Vector t(w.size());
  for (Index i = 0; i < w.size(); ++i) t[i] = B.row(i) * G * B.row(i).transpose();
  return t;
}

}  // namespace

TEST_CASE("lewis weights of square invertible input are one") {
  SeededRng rng(1);
  Matrix A = gaussian(4, 4, rng);
  for (double p : {1.0, 3.0, 6.0}) {
    auto lw = compute_lewis(A, p);
    CHECK((lw.w - Vector::Ones(4)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("duplicated row closed form") {
  Matrix A(3, 2);
  A << 1, 0, 1, 0, 0, 1;
  auto lw = compute_lewis(A, 1.0);
  CHECK(std::abs(lw.w[0] - 0.5) < 1e-8);
  CHECK(std::abs(lw.w[1] - 0.5) < 1e-8);
  CHECK(std::abs(lw.w[2] - 1.0) < 1e-8);
}

TEST_CASE("one-sided inequality, sum and basis") {
  SeededRng rng(2);
  for (double p : {1.0, 1.5, 3.0, 4.0, 6.0}) {
    Matrix A = gaussian(60, 4, rng);
    auto lw = compute_lewis(A, p);
    const Vector tau = tau_direct(A, lw.w, p);
    for (Index i = 0; i < A.rows(); ++i) CHECK(lw.w[i] >= lw.alpha * tau[i] - 1e-6);
    CHECK(lw.w.sum() <= 4.0 * 4 + 1e-9);
    CHECK(lw.w.sum() >= 0.9 * 4);
    CHECK(lw.alpha >= 0.5);
    Vector s(A.rows());
    for (Index i = 0; i < A.rows(); ++i) s[i] = std::pow(lw.w[i], 0.5 - 1.0 / p);
    const Matrix Q = s.asDiagonal() * A * lw.basis;
    CHECK((Q.transpose() * Q - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("sensitivity bound for p >= 2") {
  SeededRng rng(3);
  for (double p : {3.0, 4.0}) {
    Matrix A = gaussian(80, 3, rng);
    auto lw = compute_lewis(A, p);
    const double W = lw.w.sum();
    for (int t = 0; t < 200; ++t) {
      const Vector x = gaussian_vec(3, rng);
      const Vector y = A * x;
      const double tot = vec_pow_sum(y, p);
      for (Index i = 0; i < A.rows(); ++i)
        CHECK(std::pow(std::abs(y[i]), p) / tot <= std::pow(W, p / 2 - 1) * lw.w[i] * (1 + 1e-9));
    }
  }
}

TEST_CASE("lewis sampling") {
  SeededRng rng(4);
  Matrix one(1, 3);
  one << 1, 2, 3;
  // A single row spanning its own column space has weight 1.
  Matrix single(1, 1);
  single << 2.0;
  auto lw1 = compute_lewis(single, 3.0);
  CHECK(lw1.w[0] == doctest::Approx(1.0));
  auto S1 = lewis_sample(lw1, 0.5, 0.1, rng);
  CHECK(S1.size() == 1);

  Matrix A = gaussian(50, 3, rng);
  auto lw = compute_lewis(A, 3.0);
  auto full = sample_with_probabilities(Vector::Constant(50, 2.0), 3.0, rng);
  CHECK(full.size() == 50);
  CHECK((full.scales - Vector::Ones(50)).norm() == 0.0);

  // Small oversampling constant so the sample is a strict subset.
  Matrix B = gaussian(500, 3, rng);
  auto lwb = compute_lewis(B, 3.0);
  int good = 0;
  for (int seed = 0; seed < 100; ++seed) {
    SeededRng r(1000 + seed);
    auto S = lewis_sample(lwb, 0.3, 0.1, r, 0.05);
    const Matrix SB = S.apply(B);
    bool ok = S.size() < 500;
    for (int t = 0; t < 200 && ok; ++t) {
      const Vector x = gaussian_vec(3, r);
      const double ratio = vec_norm(SB * x, 3.0) / vec_norm(B * x, 3.0);
      ok = ratio >= 0.7 && ratio <= 1.3;
    }
    good += ok;
  }
  MESSAGE("subset embeddings within 1±0.3: " << good << "/100");
  CHECK(good >= 95);
}

TEST_CASE("reweighting") {
  Matrix A = Matrix::Identity(3, 3);
  auto lw = compute_lewis(A, 4.0);
  CHECK((reweight_p_to_q(lw, 4.0) - Vector::Ones(3)).norm() < 1e-12);
  CHECK((reweight_p_to_q(lw, 2.0) - Vector::Ones(3)).norm() < 1e-8);
  SeededRng rng(5);
  LewisWeights rw;
  rw.p = 6.0;
  for (int t = 0; t < 200; ++t) {
    rw.w = gaussian_vec(20, rng).cwiseAbs();
    const Vector y = gaussian_vec(20, rng);
    const Vector D = reweight_p_to_q(rw, 2.0);
    const double lhs = vec_norm(D.cwiseProduct(y), 2.0);
    const double rhs = std::pow(rw.w.sum(), 0.5 - 1.0 / 6.0) * vec_norm(y, 6.0);
    CHECK(lhs <= rhs * (1 + 1e-12));
  }
}

TEST_CASE("online lewis") {
  for (double p : {1.0, 3.0}) {
    OnlineLewis ol(4, p, 0.0, SeededRng(1));
    for (Index i = 0; i < 4; ++i) {
      auto dec = ol.push(Matrix::Identity(4, 4).row(i).transpose());
      CHECK(dec.weight == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(dec.kept);
    }
  }
  // Scalar fixed point at p = 2 is the online leverage score q/(1+q).
  CHECK(online_lewis_scalar(3.0, 2.0) == doctest::Approx(0.75));
  for (double p : {1.0, 3.0}) {
    OnlineLewis ol(2, p, 0.0, SeededRng(2));
    Vector e1(2);
    e1 << 1, 0;
    const int n = 1000;
    double prev = 2.0;
    for (int i = 0; i < n; ++i) {
      auto dec = ol.push(e1);
      CHECK(dec.weight <= prev + 1e-12);
      prev = dec.weight;
    }
    MESSAGE("p=" << p << " sum of online weights over " << n << " copies: " << ol.weight_sum());
    CHECK(ol.weight_sum() <= 4.0 * std::log(static_cast<double>(n)) * (p > 2 ? std::pow(std::log(n), p / 2) : 1.0));
  }
  SeededRng rng(3);
  Matrix A = gaussian(200, 3, rng);
  OnlineLewis a(3, 3.0, 2.0, SeededRng(9));
  OnlineLewis b(3, 3.0, 2.0, SeededRng(9));
  for (Index i = 0; i < A.rows(); ++i) {
    auto da = a.push(A.row(i).transpose());
    auto db = b.push(A.row(i).transpose());
    CHECK(da.kept == db.kept);
    CHECK(da.weight == db.weight);
  }
  CHECK(a.kept() == b.kept());
}
