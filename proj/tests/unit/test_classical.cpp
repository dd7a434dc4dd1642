#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "../oracles.hpp"
#include "sonilab/classical.hpp"
#include "sonilab/error.hpp"
#include "sonilab/rng.hpp"

using namespace sonilab;

namespace {

struct Blobs {
  Matrix x;
  std::vector<int> y;
};

Blobs blobs(std::size_t n, double gap, std::uint64_t seed, std::size_t d = 2) {
  Rng rng(seed);
  Blobs b{Matrix(n, d), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    b.y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < d; ++j) b.x(i, j) = rng.normal() + (b.y[i] ? gap : 0.0) * (j == 0 ? 1.0 : 0.5);
  }
  return b;
}

double accuracy(const ClassicalModel& m, const Blobs& b) {
  const auto p = predict_all(m, b.x);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < p.size(); ++i) hit += p[i] == b.y[i];
  return double(hit) / double(p.size());
}

}  // namespace

TEST(Gnb, PosteriorMatchesHandComputation) {
  Matrix x(4, 1, std::vector<double>{0.0, 2.0, 10.0, 14.0});
  std::vector<int> y{0, 0, 1, 1};
  const auto m = fit_gnb(x, y);
  EXPECT_DOUBLE_EQ(m.gnb.mean[0][0], 1.0);
  EXPECT_DOUBLE_EQ(m.gnb.variance[1][0], 4.0);  // population variance
  auto log_gauss = [](double v, double mu, double var) {
    return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * (v - mu) * (v - mu) / var;
  };
  const double q = 5.0;
  const double expected = log_gauss(q, 12.0, 4.0) - log_gauss(q, 1.0, 1.0);
  const std::vector<double> probe{q};
  EXPECT_NEAR(decision_value(m, probe), expected, 1e-12);
  EXPECT_EQ(predict(m, probe), expected > 0 ? 1 : 0);
}

TEST(Lda, SeparatesShiftedGaussians) {
  const auto train = blobs(400, 3.0, 1), test = blobs(400, 3.0, 2);
  const auto m = fit_lda(train.x, train.y);
  EXPECT_GT(accuracy(m, test), 0.9);
  EXPECT_GT(m.lda.weights[0], 0.0);
}

TEST(Lda, CoincidentMeansAreNumericErrors) {
  Matrix x(4, 1, std::vector<double>{1, -1, 1, -1});
  std::vector<int> y{0, 0, 1, 1};
  try {
    fit_lda(x, y, 1e-6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numeric);
  }
}

TEST(Classical, SingleClassAndShapeMismatch) {
  Matrix x(3, 2, 1.0);
  std::vector<int> one{1, 1, 1};
  std::vector<int> short_y{0, 1};
  for (auto fit : {+[](const Matrix& a, std::span<const int> b) { return fit_gnb(a, b); },
                   +[](const Matrix& a, std::span<const int> b) { return fit_lda(a, b); }}) {
    EXPECT_THROW(fit(x, one), Error);
    EXPECT_THROW(fit(x, short_y), Error);
  }
  EXPECT_THROW(fit_svm(x, one, ClassicalKind::SvmRbf), Error);
}

TEST(Svm, DualMatchesBruteForceOptimumLinear) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto b = blobs(8, 1.0, seed);
    SvmOptions opt;
    opt.c = 0.7;
    opt.tolerance = 1e-8;
    const auto m = fit_svm(b.x, b.y, ClassicalKind::SvmLinear, opt);
    Eigen::MatrixXd k(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) k(i, j) = b.x(i, 0) * b.x(j, 0) + b.x(i, 1) * b.x(j, 1);
    const double best = oracle::brute_force_svm_dual(k, m.svm.sign, opt.c);
    EXPECT_NEAR(m.svm.dual_objective, best, 1e-6 * std::max(1.0, std::abs(best))) << "seed " << seed;
    EXPECT_TRUE(m.svm.converged);
  }
}

TEST(Svm, DualMatchesBruteForceOptimumRbf) {
  const auto b = blobs(9, 0.8, 7);
  SvmOptions opt;
  opt.c = 2.0;
  opt.gamma = 0.5;
  opt.tolerance = 1e-8;
  const auto m = fit_svm(b.x, b.y, ClassicalKind::SvmRbf, opt);
  Eigen::MatrixXd k(9, 9);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      const double du = b.x(i, 0) - b.x(j, 0), dv = b.x(i, 1) - b.x(j, 1);
      k(i, j) = std::exp(-0.5 * (du * du + dv * dv));
    }
  const double best = oracle::brute_force_svm_dual(k, m.svm.sign, opt.c);
  EXPECT_NEAR(m.svm.dual_objective, best, 1e-6 * std::max(1.0, std::abs(best)));
  double balance = 0.0;
  for (std::size_t i = 0; i < m.svm.alpha.size(); ++i) {
    EXPECT_GE(m.svm.alpha[i], -1e-12);
    EXPECT_LE(m.svm.alpha[i], opt.c + 1e-12);
    balance += m.svm.alpha[i] * m.svm.sign[i];
  }
  EXPECT_NEAR(balance, 0.0, 1e-9);
}

TEST(Svm, LinearWeightsAgreeWithDecisionValues) {
  const auto b = blobs(60, 2.5, 9);
  const auto m = fit_svm(b.x, b.y, ClassicalKind::SvmLinear);
  const auto w = svm_linear_weights(m);
  for (std::size_t i = 0; i < 10; ++i) {
    const double primal = w[0] * b.x(i, 0) + w[1] * b.x(i, 1) + m.svm.bias;
    EXPECT_NEAR(primal, decision_value(m, b.x.row(i)), 1e-9);
  }
  EXPECT_GT(accuracy(m, blobs(200, 2.5, 10)), 0.85);
}

TEST(Svm, RbfSolvesXor) {
  Rng rng(12);
  Blobs b{Matrix(200, 2), std::vector<int>(200)};
  for (std::size_t i = 0; i < 200; ++i) {
    const double u = rng.uniform(-1, 1), v = rng.uniform(-1, 1);
    b.x(i, 0) = u;
    b.x(i, 1) = v;
    b.y[i] = (u > 0) != (v > 0);
  }
  SvmOptions opt;
  opt.c = 10.0;
  const auto m = fit_svm(b.x, b.y, ClassicalKind::SvmRbf, opt);
  EXPECT_GT(accuracy(m, b), 0.9);
  EXPECT_LT(accuracy(fit_svm(b.x, b.y, ClassicalKind::SvmLinear), b), 0.75);
}

TEST(Svm, IterationCapReportsNonConvergence) {
  const auto b = blobs(60, 0.3, 13);
  SvmOptions opt;
  opt.max_iterations = 2;
  const auto m = fit_svm(b.x, b.y, ClassicalKind::SvmRbf, opt);
  EXPECT_FALSE(m.svm.converged);
  EXPECT_EQ(m.svm.iterations, 2u);
}

TEST(Classical, JsonRoundTripIsExact) {
  const auto b = blobs(40, 2.0, 14, 3);
  for (auto kind : {ClassicalKind::GNB, ClassicalKind::LDA, ClassicalKind::SvmLinear, ClassicalKind::SvmRbf}) {
    const ClassicalModel m = kind == ClassicalKind::GNB   ? fit_gnb(b.x, b.y)
                             : kind == ClassicalKind::LDA ? fit_lda(b.x, b.y)
                                                          : fit_svm(b.x, b.y, kind);
    const auto back = model_from_json(model_to_json(m));
    for (std::size_t i = 0; i < b.x.rows(); ++i)
      EXPECT_EQ(decision_value(back, b.x.row(i)), decision_value(m, b.x.row(i))) << to_string(kind);
  }
}

TEST(Classical, NamesParse) {
  EXPECT_EQ(parse_classical_kind("svm-rbf"), ClassicalKind::SvmRbf);
  EXPECT_EQ(to_string(ClassicalKind::LDA), "lda");
  EXPECT_THROW(parse_classical_kind("knn"), Error);
  EXPECT_EQ(parse_hex_double(hex_double(0.1)), 0.1);
}
