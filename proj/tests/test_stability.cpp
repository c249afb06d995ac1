#include <gtest/gtest.h>

#include "dkfsel/dkf.hpp"
#include "dkfsel/errors.hpp"
#include "dkfsel/stability.hpp"
#include "oracle.hpp"

using namespace dkfsel;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

LtvSystem scalar_system(double a, double q, long n) {
  LtvSystem sys;
  sys.state_dim = 1;
  sys.transition = TableTransition{std::vector<Matrix>(static_cast<std::size_t>(n), scalar(a))};
  sys.process_noise_cov = scalar(q);
  sys.initial_state = Vector::Ones(1);
  return sys;
}

SensorNode selector_node(int state, double r) {
  SensorNode n;
  n.id = 1;
  n.h = Matrix::Zero(1, 2);
  n.h(0, state) = 1.0;
  n.r = scalar(r);
  return n;
}

/// Direct evaluation of the bound. P_tau^{-1} is formed from scratch for each
/// tau as A(k-tau+1)^{-1} ... A(k-1)^{-1}; inverting the product itself would
/// be too ill-conditioned to serve as a reference.
Matrix i_tilde_oracle(long k, int k_bar, double beta, const LtvSystem& sys, const Matrix& l) {
  const int m = sys.state_dim;
  Matrix sum = Matrix::Zero(m, m);
  for (int tau = 1; tau <= k_bar; ++tau) {
    Matrix inv = Matrix::Identity(m, m);
    for (int j = tau - 1; j >= 1; --j) inv = inv * transition_matrix(sys, k - j).inverse();
    sum += std::pow(beta, tau - 1) * inv.transpose() * l * inv;
  }
  return sum;
}

/// Random PSD info with info <= bound: bound^{1/2} U bound^{1/2}, 0 <= U <= I.
Matrix below(const Matrix& bound, std::mt19937_64& rng) {
  const int m = static_cast<int>(bound.rows());
  Eigen::HouseholderQR<Matrix> qr(oracle::random_matrix(m, m, rng));
  const Matrix v = qr.householderQ();
  const Vector d = (oracle::random_matrix(m, 1, rng).array() * 0.5 + 0.5).matrix();
  const Matrix u = v * d.asDiagonal() * v.transpose();
  const Matrix s = psd_sqrt(bound);
  return s * u * s;
}

}  // namespace

TEST(Psi, IdentityCase) {
  const Matrix i = Matrix::Identity(2, 2);
  EXPECT_LT((psi(i, i, i) - 0.5 * i).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Psi, ScalarCase) { EXPECT_NEAR(psi(scalar(1), scalar(2), scalar(1))(0, 0), 0.2, 1e-15); }

TEST(Psi, ZeroInformation) {
  EXPECT_EQ(psi(Matrix::Zero(2, 2), oracle::benchmark_a(0), 0.1 * Matrix::Identity(2, 2)),
            Matrix::Zero(2, 2));
}

TEST(Psi, ExpandedFormAgreesOnInvertibleInputs) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const Matrix info = oracle::random_psd(2, 2, rng, 0.05);
    const Matrix a = oracle::random_invertible(2, rng);
    const Matrix q = oracle::random_psd(2, 2, rng, 0.1);
    EXPECT_LT((psi(info, a, q) - psi_expanded(info, a, q)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Psi, SingularInputMatchesLimit) {
  // Rank-one information as the limit of ever weaker regularization.
  Matrix info = Matrix::Zero(2, 2);
  info(0, 0) = 3.0;
  const Matrix a = oracle::benchmark_a(50);
  const Matrix q = 0.1 * Matrix::Identity(2, 2);
  // The regularized closed form converges at rate O(eps).
  for (double eps : {1e-6, 1e-8}) {
    const Matrix reg = eps * Matrix::Identity(2, 2);
    const Matrix closed = (a * (info + reg).inverse() * a.transpose() + q).inverse();
    EXPECT_LT((psi(info, a, q) - closed).cwiseAbs().maxCoeff(), 1e3 * eps);
  }
}

TEST(PsiMonotone, TrivialPairs) {
  const Matrix a = oracle::benchmark_a(0);
  const Matrix q = 0.1 * Matrix::Identity(2, 2);
  EXPECT_TRUE(psi_monotone_check(Matrix::Zero(2, 2), Matrix::Identity(2, 2), a, q));
  const Matrix i = 2.0 * Matrix::Identity(2, 2);
  EXPECT_TRUE(psi_monotone_check(i, i, a, q));
}

TEST(PsiMonotone, RandomOrderedPairs) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const Matrix i1 = oracle::random_psd(2, 1 + t % 2, rng);
    const Matrix i2 = i1 + oracle::random_psd(2, 1 + (t / 2) % 2, rng);
    const Matrix a = oracle::random_invertible(2, rng);
    const Matrix q = oracle::random_psd(2, 2, rng, 0.05);
    EXPECT_TRUE(psi_monotone_check(i1, i2, a, q));
    EXPECT_GE(oracle::min_eig(psi(i2, a, q) - psi(i1, a, q)), -1e-9);
  }
}

TEST(PsiMonotone, UnorderedPairRejected) {
  EXPECT_THROW(psi_monotone_check(Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                                  Matrix::Identity(2, 2), Matrix::Identity(2, 2)),
               OrderingError);
}

TEST(GammaHat, ScalarCase) {
  EXPECT_NEAR(gamma_hat(scalar(1), scalar(1), scalar(0), 1.0), 1.0, 1e-15);
}

TEST(GammaHat, VanishesWithNoise) {
  const Matrix a = oracle::benchmark_a(0);
  const Matrix info = Matrix::Identity(2, 2);
  EXPECT_LT(gamma_hat(a, 1e-12 * Matrix::Identity(2, 2), info, 1e-6), 1e-10);
}

TEST(GammaHat, LinearInQ) {
  const Matrix a = oracle::benchmark_a(30);
  Matrix info(2, 2);
  info << 3, 1, 1, 2;
  const Matrix q = 0.1 * Matrix::Identity(2, 2);
  EXPECT_NEAR(gamma_hat(a, 4.0 * q, info, 1e-6), 4.0 * gamma_hat(a, q, info, 1e-6), 1e-12);
}

TEST(GammaHat, IsTheSmallestFeasibleScalar) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const Matrix a = oracle::random_invertible(2, rng);
    const Matrix q = oracle::random_psd(2, 2, rng, 0.05);
    const Matrix info = oracle::random_psd(2, 2, rng);
    const double alpha = 1e-3;
    const double g = gamma_hat(a, q, info, alpha);
    const Matrix lhs = a.inverse() * q * a.inverse().transpose();
    const Matrix rhs = (info + alpha * Matrix::Identity(2, 2)).inverse();
    EXPECT_GE(oracle::min_eig(g * rhs - lhs), -1e-9 * g);
    EXPECT_LT(oracle::min_eig(0.99 * g * rhs - lhs), 0.0);
  }
}

TEST(BetaHat, ScalarCase) {
  const auto sys = scalar_system(1.0, 1.0, 10);
  EXPECT_NEAR(beta_hat(sys, 10, scalar(0), 1.0), 0.5, 1e-15);
}

TEST(BetaHat, NoiselessLimit) {
  auto sys = benchmark_system(1e-12);
  EXPECT_NEAR(beta_hat(sys, 100, Matrix::Identity(2, 2), 1e-6), 1.0, 1e-9);
}

TEST(BetaHat, BenchmarkInRange) {
  const auto sys = benchmark_system();
  const double b = beta_hat(sys, 500, 10.0 * Matrix::Identity(2, 2), kDefaultAlpha);
  EXPECT_GT(b, 0.0);
  EXPECT_LE(b, 1.0);
}

TEST(Lemma1, LowerBoundWithComputedBeta) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const Matrix a = oracle::random_invertible(2, rng);
    const Matrix q = oracle::random_psd(2, 2, rng, 0.05);
    const Matrix bound = oracle::random_psd(2, 2, rng, 0.1) * 5.0;
    const double alpha = kDefaultAlpha;
    const double beta = 1.0 / (1.0 + gamma_hat(a, q, bound, alpha));
    const Matrix info = below(bound, rng);
    const Matrix ainv = a.inverse();
    const Matrix diff = psi(info, a, q) - beta * ainv.transpose() * info * ainv;
    EXPECT_GE(oracle::min_eig(diff), -1e-8);
  }
}

TEST(ITilde, SingleTermIsNodeGain) {
  const auto sys = benchmark_system();
  const Matrix l = node_information_gain(selector_node(1, 0.25));
  const auto r = i_tilde(40, 1, 0.3, sys, l);
  EXPECT_EQ(r.value, l);
  EXPECT_DOUBLE_EQ(r.value(1, 1), 4.0);
  Eigen::FullPivLU<Matrix> lu(r.value);
  EXPECT_EQ(lu.rank(), 1);
}

TEST(ITilde, IdentityDynamics) {
  LtvSystem sys = scalar_system(1.0, 1.0, 10);
  sys.state_dim = 2;
  sys.transition = TableTransition{std::vector<Matrix>(10, Matrix::Identity(2, 2))};
  sys.process_noise_cov = Matrix::Identity(2, 2);
  const Matrix l = node_information_gain(selector_node(0, 0.5));
  EXPECT_LT((i_tilde(5, 2, 0.5, sys, l).value - 1.5 * l).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ITilde, MatchesDirectProducts) {
  const auto sys = benchmark_system();
  const Matrix l = node_information_gain(selector_node(0, 0.1));
  for (long k : {20L, 21L, 57L, 150L, 400L}) {
    const Matrix lib = i_tilde(k, 20, 0.7, sys, l).value;
    const Matrix ref = i_tilde_oracle(k, 20, 0.7, sys, l);
    EXPECT_LT((lib - ref).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, ref.norm())) << k;
  }
}

TEST(ITilde, SymmetricPsdAndGrowsWithWindow) {
  const auto sys = benchmark_system();
  const Matrix l = node_information_gain(selector_node(1, 0.2));
  for (long k = 21; k <= 300; k += 17) {
    const Matrix a = i_tilde(k, 20, 0.4, sys, l).value;
    const Matrix b = i_tilde(k, 21, 0.4, sys, l).value;
    EXPECT_TRUE(is_symmetric(a, 1e-9 * a.norm()));
    EXPECT_GE(oracle::min_eig(a), -1e-9 * a.norm());
    EXPECT_GE(oracle::min_eig(b - a), -1e-9 * b.norm());
  }
}

TEST(ITilde, RequiresFullWindow) {
  const auto sys = benchmark_system();
  EXPECT_THROW(i_tilde(5, 20, 0.5, sys, Matrix::Identity(2, 2)), ValidationError);
}

TEST(ITildeKernel, TraceMatchesFullMatrix) {
  const auto sys = benchmark_system();
  const ITildeKernel kernel(sys, 300, 20, 0.6);
  const Matrix l1 = node_information_gain(selector_node(0, 0.3));
  const Matrix l2 = node_information_gain(selector_node(1, 0.01));
  for (long k = 20; k <= 300; k += 7) {
    EXPECT_NEAR(kernel.trace(k, l1), i_tilde(k, 20, 0.6, sys, l1).value.trace(),
                1e-9 * std::max(1.0, kernel.trace(k, l1)));
    EXPECT_NEAR(kernel.trace(k, l2), i_tilde(k, 20, 0.6, sys, l2).value.trace(),
                1e-9 * std::max(1.0, kernel.trace(k, l2)));
  }
}

TEST(CheckBound, Examples) {
  const Matrix i = Matrix::Identity(2, 2);
  EXPECT_TRUE(check_bound(2.0 * i, i));
  EXPECT_FALSE(check_bound(i, i));
  const Matrix l = node_information_gain(selector_node(0, 1.0));
  EXPECT_FALSE(check_bound(Matrix::Zero(2, 2), l));
}

TEST(Theorem1, NodeInformationInverseIsRiccatiCovariance) {
  const auto sys = benchmark_system();
  const auto node = selector_node(0, 0.05);
  const Matrix p0 = Matrix::Identity(2, 2);
  const auto hist = local_information_history(sys, node, 200, p0.inverse());
  std::vector<Matrix> a;
  for (long k = 0; k < 200; ++k) a.push_back(transition_matrix(sys, k));
  const auto ref = oracle::riccati_posterior(a, sys.process_noise_cov, node.h, node.r, p0, 201);
  for (long k = 0; k <= 200; ++k) {
    EXPECT_LT((Matrix(hist[k]).inverse() - ref[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff(),
              1e-8)
        << k;
  }
}

TEST(Pilot, BoundDominatesTheDelayFreeRun) {
  const auto sys = benchmark_system();
  Rng rng(3);
  const auto net = sample_network(50, 2, {0.0, 0.5}, {0.0, 0.0}, rng);
  const auto ids = net.ids();
  const Matrix bound = pilot_information_bound(sys, net, ids, 200);
  EXPECT_TRUE(is_symmetric(bound, 1e-12));
  Rng r2(1);
  const auto run = run_dkf(sys, net, ids, 200, r2);
  double max_trace = 0.0;
  for (const auto& f : run.result.fused) max_trace = std::max(max_trace, f.info.trace());
  EXPECT_NEAR(bound.trace(), max_trace, 1e-8 * max_trace);
}

TEST(Params, OverrideAndValidation) {
  const auto sys = benchmark_system();
  Rng rng(3);
  const auto net = sample_network(10, 2, {0.0, 0.5}, {0.0, 1.0}, rng);
  const auto p = make_stability_params(sys, net, 100, 20, 1e-6, 0.3);
  EXPECT_DOUBLE_EQ(p.beta_hat, 0.3);
  const auto q = make_stability_params(sys, net, 100);
  EXPECT_GT(q.beta_hat, 0.0);
  EXPECT_LE(q.beta_hat, 1.0);
  StabilityParams bad = q;
  bad.beta_hat = 0.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = q;
  bad.k_bar = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
}
