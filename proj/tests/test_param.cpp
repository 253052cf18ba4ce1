#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stiefel/errors.hpp"
#include "stiefel/linalg.hpp"
#include "stiefel/normal.hpp"
#include "stiefel/param.hpp"
#include "support/fd.hpp"

using namespace stiefel;
using stiefel::testing::fd_gradient;
using stiefel::testing::fd_jacobian;
using stiefel::testing::max_rel_diff;
using stiefel::testing::normal_matrix;
using stiefel::testing::normal_vector;

namespace {

// Givens phi with every angle inside (-pi/2, pi/2) and radii near one.
std::vector<double> givens_phi(std::size_t J, std::size_t K, std::mt19937_64& rng) {
  const std::size_t n = stiefel_dimension(J, K);
  std::uniform_real_distribution<double> angle(-1.2, 1.2);
  std::normal_distribution<double> radius(1.0, 0.1);
  std::vector<double> phi(2 * n);
  for (std::size_t a = 0; a < n; ++a) {
    const double th = angle(rng);
    const double r = std::abs(radius(rng));
    phi[2 * a] = r * std::cos(th);
    phi[2 * a + 1] = r * std::sin(th);
  }
  return phi;
}

std::vector<double> random_phi(const ParamSpec& spec, std::mt19937_64& rng) {
  if (spec.kind == Kind::Givens) return givens_phi(spec.J, spec.K, rng);
  const double sd = spec.kind == Kind::Cayley ? 0.5 : 1.0;
  return normal_vector(phi_length(spec), rng, sd);
}

struct Shape {
  std::size_t J;
  std::size_t K;
};

const Shape kShapes[] = {{2, 1}, {3, 1}, {3, 2}, {4, 2}, {5, 3}, {6, 2}, {4, 4}, {7, 3}};

}  // namespace

TEST(ParamCount, MatchesConstructionCounts) {
  for (const auto& [J, K] : kShapes) {
    EXPECT_EQ(param_count({Kind::Polar, J, K}).phi_length, J * K);
    EXPECT_EQ(param_count({Kind::Householder, J, K}).phi_length, J * K - K * (K - 1) / 2);
    EXPECT_EQ(param_count({Kind::Givens, J, K}).essential, J * K - K * (K + 1) / 2);
    EXPECT_EQ(param_count({Kind::Givens, J, K}).phi_length, 2 * (J * K - K * (K + 1) / 2));
    if (K < J) EXPECT_EQ(param_count({Kind::Cayley, J, K}).phi_length, K * (K - 1) / 2 + K * (J - K));
  }
  // Cayley dimension equals the manifold dimension.
  for (std::size_t J = 2; J < 9; ++J)
    for (std::size_t K = 1; K < J; ++K) EXPECT_EQ(param_count({Kind::Cayley, J, K}).essential, stiefel_dimension(J, K));
}

TEST(ParamSpec, RejectsBadShapes) {
  EXPECT_THROW((ParamSpec{Kind::Polar, 2, 3}.validate()), PreconditionError);
  EXPECT_THROW((ParamSpec{Kind::Polar, 2, 0}.validate()), PreconditionError);
  EXPECT_THROW((ParamSpec{Kind::Cayley, 3, 3}.validate()), PreconditionError);
  EXPECT_NO_THROW((ParamSpec{Kind::Givens, 3, 3}.validate()));
  std::vector<double> phi(5, 0.1);
  EXPECT_THROW(evaluate({Kind::Polar, 3, 2}, phi), PreconditionError);
}

TEST(ParamKind, ParsesNames) {
  EXPECT_EQ(parse_kind("Polar"), Kind::Polar);
  EXPECT_EQ(parse_kind("householder"), Kind::Householder);
  EXPECT_EQ(parse_kind("CAYLEY"), Kind::Cayley);
  EXPECT_EQ(parse_kind("givens"), Kind::Givens);
  EXPECT_THROW(parse_kind("qr"), PreconditionError);
}

class EveryKind : public ::testing::TestWithParam<Kind> {};

TEST_P(EveryKind, OutputIsOrthonormal) {
  std::mt19937_64 rng(100 + static_cast<int>(GetParam()));
  for (const auto& [J, K] : kShapes) {
    ParamSpec spec{GetParam(), J, K};
    if (spec.kind == Kind::Cayley && J == K) continue;
    for (int trial = 0; trial < 10; ++trial) {
      const auto phi = random_phi(spec, rng);
      MapResult res = evaluate(spec, phi);
      ASSERT_EQ(res.upsilon.rows(), J);
      ASSERT_EQ(res.upsilon.cols(), K);
      EXPECT_LT(orthogonality_error(res.upsilon), 1e-10) << kind_name(spec.kind) << " J=" << J << " K=" << K;
      EXPECT_TRUE(std::isfinite(res.log_adjust));
    }
  }
}

TEST_P(EveryKind, PullbackMatchesFiniteDifferences) {
  std::mt19937_64 rng(200 + static_cast<int>(GetParam()));
  for (const auto& [J, K] : kShapes) {
    ParamSpec spec{GetParam(), J, K};
    if (spec.kind == Kind::Cayley && J == K) continue;
    for (int trial = 0; trial < 3; ++trial) {
      const auto phi = random_phi(spec, rng);
      const Matrix ubar = normal_matrix(J, K, rng);
      const double w = 0.7;
      auto f = [&](std::span<const double> x) {
        MapResult r = evaluate(spec, x);
        return frobenius_dot(ubar, r.upsilon) + w * r.log_adjust;
      };
      const auto expected = fd_gradient(f, phi);
      const auto got = pullback(spec, phi, ubar, w);
      EXPECT_LT(max_rel_diff(got, expected), 1e-6) << kind_name(spec.kind) << " J=" << J << " K=" << K;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, EveryKind,
                         ::testing::Values(Kind::Polar, Kind::Householder, Kind::Cayley, Kind::Givens),
                         [](const auto& info) { return std::string(kind_label(info.param)); });

TEST(Polar, MatchesInverseSquareRootFormula) {
  std::mt19937_64 rng(1);
  const std::size_t J = 5, K = 3;
  const auto phi = normal_vector(J * K, rng);
  const Matrix y = Matrix::from_col_major(J, K, phi);
  const Matrix expected = matmul(y, inv_sqrt_sym(matmul_tn(y, y)));
  MapResult res = polar_eval(phi, {Kind::Polar, J, K});
  EXPECT_LT(max_abs(res.upsilon - expected), 1e-12);
  EXPECT_NEAR(res.log_adjust, -0.5 * dot(phi, phi), 1e-12);
}

TEST(Polar, ScaleInvariant) {
  std::mt19937_64 rng(2);
  auto phi = normal_vector(12, rng);
  const Matrix a = polar_eval(phi, {Kind::Polar, 4, 3}).upsilon;
  for (double& x : phi) x *= 3.5;
  EXPECT_LT(max_abs(polar_eval(phi, {Kind::Polar, 4, 3}).upsilon - a), 1e-12);
}

TEST(Polar, RankDeficientThrows) {
  std::vector<double> phi{1, 2, 3, 2, 4, 6};  // second column = 2 * first
  EXPECT_THROW(polar_eval(phi, {Kind::Polar, 3, 2}), SingularityError);
}

TEST(Householder, SingleColumnIsNormalizedVector) {
  std::vector<double> phi{-0.3, 1.2, 2.0, -0.5};
  const Matrix u = householder_eval(phi, {Kind::Householder, 4, 1}).upsilon;
  const double norm = std::sqrt(dot(phi, phi));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(u(i, 0), phi[i] / norm, 1e-14);
}

TEST(Householder, ZeroReflectorThrows) {
  std::vector<double> phi{1, 0.5, 0.2, 0, 0};
  EXPECT_THROW(householder_eval(phi, {Kind::Householder, 3, 2}), DomainError);
}

TEST(Householder, ColumnParityUnderNegation) {
  // Column k of Upsilon is even or odd in phi with sign (-1)^(k+1).
  std::mt19937_64 rng(4);
  const ParamSpec spec{Kind::Householder, 5, 3};
  auto phi = normal_vector(phi_length(spec), rng);
  const Matrix a = evaluate(spec, phi).upsilon;
  for (double& x : phi) x = -x;
  const Matrix b = evaluate(spec, phi).upsilon;
  for (std::size_t k = 0; k < 3; ++k) {
    const double sign = (k % 2 == 0) ? -1.0 : 1.0;
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(b(i, k), sign * a(i, k), 1e-12);
  }
}

TEST(Cayley, UpsilonMatchesDenseSolve) {
  std::mt19937_64 rng(6);
  for (const auto& [J, K] : kShapes) {
    if (J == K) continue;
    const ParamSpec spec{Kind::Cayley, J, K};
    const auto phi = normal_vector(phi_length(spec), rng, 0.8);
    EXPECT_LT(max_abs(evaluate(spec, phi).upsilon - cayley_upsilon_dense(phi, J, K)), 1e-12);
  }
}

TEST(Cayley, SkewMatrixLayout) {
  // J=4, K=2: b has one entry, A is 2x2 stored row-major.
  std::vector<double> phi{0.1, 1, 2, 3, 4};
  const Matrix x = cayley_skew(phi, 4, 2);
  EXPECT_EQ(x(1, 0), 0.1);
  EXPECT_EQ(x(0, 1), -0.1);
  EXPECT_EQ(x(2, 0), 1);
  EXPECT_EQ(x(2, 1), 2);
  EXPECT_EQ(x(3, 0), 3);
  EXPECT_EQ(x(3, 1), 4);
  EXPECT_LT(max_abs(x + x.transposed()), 1e-15);
  EXPECT_EQ(x(2, 2), 0);
}

TEST(Cayley, LogJacobianRoutesAgree) {
  std::mt19937_64 rng(8);
  const ParamOptions gram{CayleyJacobian::Gram};
  for (const auto& [J, K] : kShapes) {
    if (J == K) continue;
    const ParamSpec spec{Kind::Cayley, J, K};
    for (int trial = 0; trial < 3; ++trial) {
      const auto phi = normal_vector(phi_length(spec), rng, 0.8);
      const double closed = evaluate(spec, phi).log_adjust;
      const double via_gram = evaluate(spec, phi, gram).log_adjust;
      const double via_kron = cayley_log_jacobian_kronecker(phi, J, K);
      EXPECT_NEAR(closed, via_gram, 1e-9) << "J=" << J << " K=" << K;
      EXPECT_NEAR(closed, via_kron, 1e-9) << "J=" << J << " K=" << K;
    }
  }
}

TEST(Cayley, LogJacobianMatchesFiniteDifferenceGram) {
  // Independent of every analytic formula: Gram determinant of the numerical Jacobian.
  std::mt19937_64 rng(10);
  const std::size_t J = 5, K = 2;
  const ParamSpec spec{Kind::Cayley, J, K};
  const auto phi = normal_vector(phi_length(spec), rng, 0.6);
  const Matrix jac = fd_jacobian([&](std::span<const double> x) { return evaluate(spec, x).upsilon; }, phi);
  const double expected = 0.5 * log_abs_det(matmul_tn(jac, jac));
  EXPECT_NEAR(evaluate(spec, phi).log_adjust, expected, 1e-6);
}

TEST(Cayley, ConstantAtOrigin) {
  const std::size_t J = 6, K = 3;
  std::vector<double> phi(phi_length({Kind::Cayley, J, K}), 0.0);
  const double c = (0.75 * K * (K - 1) + K * (J - K)) * std::log(2.0);
  EXPECT_NEAR(cayley_log_jacobian_constant(J, K), c, 1e-14);
  EXPECT_NEAR(evaluate({Kind::Cayley, J, K}, phi).log_adjust, c, 1e-12);
  EXPECT_LT(max_abs(evaluate({Kind::Cayley, J, K}, phi).upsilon - Matrix::eye(J, K)), 1e-15);
}

TEST(Cayley, GramPullbackMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  const ParamOptions gram{CayleyJacobian::Gram};
  for (const auto& [J, K] : kShapes) {
    if (J == K) continue;
    const ParamSpec spec{Kind::Cayley, J, K};
    const auto phi = normal_vector(phi_length(spec), rng, 0.6);
    const Matrix ubar = normal_matrix(J, K, rng);
    auto f = [&](std::span<const double> x) {
      MapResult r = evaluate(spec, x, gram);
      return frobenius_dot(ubar, r.upsilon) - 1.3 * r.log_adjust;
    };
    EXPECT_LT(max_rel_diff(pullback(spec, phi, ubar, -1.3, gram), fd_gradient(f, phi)), 1e-6);
  }
}

TEST(Cayley, DuplicationAndCommutation) {
  const std::size_t K = 4;
  std::vector<double> b{1, 2, 3, 4, 5, 6};
  const Matrix d = skew_duplication_matrix(K);
  Matrix vb(K * K, 1);
  for (std::size_t i = 0; i < K * K; ++i)
    for (std::size_t c = 0; c < b.size(); ++c) vb(i, 0) += d(i, c) * b[c];
  std::vector<double> phi = b;
  phi.resize(b.size() + K, 0.0);  // J = K + 1
  const Matrix bm = Matrix::from_col_major(K, K, vb.data());
  const Matrix x = cayley_skew(phi, K + 1, K);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) EXPECT_EQ(bm(i, j), x(i, j));

  Matrix a{{1, 2, 3}, {4, 5, 6}};
  const auto p = commutation_permutation(2, 3);
  const auto va = a.vec();
  const auto vat = a.transposed().vec();
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(va[p[i]], vat[i]);
}

TEST(Givens, QuarterTurnSendsE1ToE2) {
  std::vector<double> theta{std::numbers::pi / 2};
  const Matrix u = givens_upsilon_from_angles(theta, 2, 1);
  EXPECT_NEAR(u(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(u(1, 0), 1.0, 1e-15);
}

TEST(Givens, IndexOrderAndCount) {
  const auto idx = givens_indices(4, 2);
  ASSERT_EQ(idx.size(), 5u);
  EXPECT_EQ(idx[0].k, 0u);
  EXPECT_EQ(idx[0].j, 1u);
  EXPECT_EQ(idx[2].j, 3u);
  EXPECT_EQ(idx[3].k, 1u);
  EXPECT_EQ(idx[3].j, 2u);
}

TEST(Givens, AnglesFromPairs) {
  std::vector<double> phi{0.0, 2.0, -1.0, 0.0};  // J=3, K=1
  const auto ang = givens_angles(phi, 3, 1);
  EXPECT_NEAR(ang.theta[0], std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(ang.r[0], 2.0, 1e-15);
  EXPECT_NEAR(std::abs(ang.theta[1]), std::numbers::pi, 1e-15);
  std::vector<double> origin{0.0, 0.0, 1.0, 0.0};
  EXPECT_THROW(givens_angles(origin, 3, 1), DomainError);
}

namespace {

// 1/2 log det of the Gram matrix of d vec(Upsilon) / d theta, by finite differences.
double numeric_angle_volume(std::span<const double> theta, std::size_t J, std::size_t K) {
  const Matrix jac =
      fd_jacobian([&](std::span<const double> t) { return givens_upsilon_from_angles(t, J, K); }, theta, 1e-6);
  return 0.5 * log_abs_det(matmul_tn(jac, jac));
}

double alternative_log_jacobian(std::span<const double> theta, std::size_t J, std::size_t K) {
  const auto idx = givens_indices(J, K);
  double total = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) total += (J - idx[a].j - 1) * std::log(std::cos(theta[a]));
  return total;
}

}  // namespace

TEST(Givens, CosExponentMatchesVolumeElement) {
  // The analytic volume must differ from the numerical one by a constant only.
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> angle(-1.2, 1.2);
  for (const auto& [J, K] : std::vector<Shape>{{3, 1}, {4, 2}, {5, 2}, {5, 3}, {4, 3}, {5, 5}}) {
    const std::size_t n = stiefel_dimension(J, K);
    std::vector<double> offsets;
    std::vector<double> alt_offsets;
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<double> theta(n);
      for (double& t : theta) t = angle(rng);
      const double numeric = numeric_angle_volume(theta, J, K);
      offsets.push_back(numeric - givens_log_jacobian(theta, J, K));
      alt_offsets.push_back(numeric - alternative_log_jacobian(theta, J, K));
    }
    for (double o : offsets) EXPECT_NEAR(o, offsets.front(), 1e-6) << "J=" << J << " K=" << K;
    double alt_spread = 0.0;
    for (double o : alt_offsets) alt_spread = std::max(alt_spread, std::abs(o - alt_offsets.front()));
    if (J >= 4) EXPECT_GT(alt_spread, 1e-3) << "J=" << J << " K=" << K;
  }
}

TEST(Givens, MirroredBranchHasSameFrameAndVolume) {
  // J=3, K=1: (t1, t2) and (t1 + pi, pi - t2) give the same frame; the
  // volume element is |cos t2| on both branches.
  const double t1 = 0.4;
  const double t2 = -0.7;
  const std::vector<double> a{t1, t2};
  const std::vector<double> b{t1 + std::numbers::pi - 2 * std::numbers::pi, std::numbers::pi - t2 - 2 * std::numbers::pi};
  const Matrix ua = givens_upsilon_from_angles(a, 3, 1);
  const Matrix ub = givens_upsilon_from_angles(b, 3, 1);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(ua(j, 0), ub(j, 0), 1e-14);
  EXPECT_NEAR(givens_log_jacobian(a, 3, 1), givens_log_jacobian(b, 3, 1), 1e-14);
  EXPECT_TRUE(std::isfinite(givens_log_jacobian(b, 3, 1)));
}

TEST(Givens, AreaCorrectionSubtractsLogRadius) {
  std::mt19937_64 rng(16);
  const ParamSpec spec{Kind::Givens, 4, 2};
  const auto phi = givens_phi(4, 2, rng);
  const ParamOptions area{CayleyJacobian::ClosedForm, true};
  const auto ang = givens_angles(phi, 4, 2);
  double log_r = 0.0;
  for (double r : ang.r) log_r += std::log(r);
  EXPECT_NEAR(evaluate(spec, phi, area).log_adjust, evaluate(spec, phi).log_adjust - log_r, 1e-12);
  const Matrix ubar = normal_matrix(4, 2, rng);
  auto f = [&](std::span<const double> x) {
    MapResult r = evaluate(spec, x, area);
    return frobenius_dot(ubar, r.upsilon) + r.log_adjust;
  };
  EXPECT_LT(max_rel_diff(pullback(spec, phi, ubar, 1.0, area), fd_gradient(f, phi)), 1e-6);
}

TEST(Polar, IdentityInputExamples) {
  const std::size_t J = 4, K = 2;
  const auto phi = Matrix::eye(J, K).vec();
  MapResult res = polar_eval(phi, {Kind::Polar, J, K});
  EXPECT_LT(max_abs(res.upsilon - Matrix::eye(J, K)), 1e-15);
  EXPECT_NEAR(res.log_adjust, -0.5 * K, 1e-15);
  std::vector<double> twice = phi;
  for (double& x : twice) x *= 2.0;
  MapResult res2 = polar_eval(twice, {Kind::Polar, J, K});
  EXPECT_LT(max_abs(res2.upsilon - Matrix::eye(J, K)), 1e-15);
  EXPECT_NEAR(res2.log_adjust, -2.0 * K, 1e-15);
  const auto grad = pullback({Kind::Polar, J, K}, phi, Matrix(J, K), 1.0);
  for (std::size_t i = 0; i < phi.size(); ++i) EXPECT_NEAR(grad[i], -phi[i], 1e-15);

  const Matrix scaled{{3, 0}, {0, 4}, {0, 0}};
  EXPECT_LT(max_abs(polar_eval(scaled.vec(), {Kind::Polar, 3, 2}).upsilon - Matrix::eye(3, 2)), 1e-15);
}

TEST(Polar, ScaleInvarianceForSeveralFactors) {
  std::mt19937_64 rng(21);
  const auto phi = normal_vector(15, rng);
  const Matrix base = polar_eval(phi, {Kind::Polar, 5, 3}).upsilon;
  for (double c : {0.5, 2.0, 10.0}) {
    std::vector<double> s = phi;
    for (double& x : s) x *= c;
    EXPECT_LT(max_abs(polar_eval(s, {Kind::Polar, 5, 3}).upsilon - base), 1e-12);
  }
}

TEST(Householder, ScalarCase) {
  std::vector<double> phi{2.5};
  EXPECT_NEAR(householder_eval(phi, {Kind::Householder, 1, 1}).upsilon(0, 0), 1.0, 1e-15);
  std::vector<double> neg{-2.5};
  EXPECT_NEAR(householder_eval(neg, {Kind::Householder, 1, 1}).upsilon(0, 0), -1.0, 1e-15);
}

TEST(Givens, IdentityAtZeroAngles) {
  const std::size_t J = 5, K = 3;
  const std::size_t n = stiefel_dimension(J, K);
  std::vector<double> phi(2 * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) phi[2 * a] = 1.0;
  MapResult res = givens_eval(phi, {Kind::Givens, J, K});
  EXPECT_LT(max_abs(res.upsilon - Matrix::eye(J, K)), 1e-15);
  EXPECT_NEAR(res.log_adjust - n * log_normal_pdf(1.0, 1.0, 0.1), 0.0, 1e-12);
}

TEST(Givens, ScoreAtZeroAngles) {
  // theta = 0, r = 1.2: no angle component, radial score -(r-1)/0.1^2 along (1, 0).
  const std::size_t J = 3, K = 1;
  std::vector<double> phi{1.2, 0.0, 1.2, 0.0};
  const auto grad = pullback({Kind::Givens, J, K}, phi, Matrix(J, K), 1.0);
  for (std::size_t a = 0; a < 2; ++a) {
    EXPECT_NEAR(grad[2 * a], -(1.2 - 1.0) / 0.01, 1e-10);
    EXPECT_NEAR(grad[2 * a + 1], 0.0, 1e-12);
  }
}

TEST_P(EveryKind, PullbackTwentySeedsOnSpecShapes) {
  std::mt19937_64 rng(300 + static_cast<int>(GetParam()));
  for (const auto& [J, K] : std::vector<Shape>{{5, 2}, {6, 3}}) {
    ParamSpec spec{GetParam(), J, K};
    for (int trial = 0; trial < 20; ++trial) {
      const auto phi = random_phi(spec, rng);
      const Matrix ubar = normal_matrix(J, K, rng);
      auto f = [&](std::span<const double> x) {
        MapResult r = evaluate(spec, x);
        return frobenius_dot(ubar, r.upsilon) + r.log_adjust;
      };
      const auto expected = fd_gradient(f, phi, 1e-5);
      EXPECT_LT(stiefel::testing::rel_error_inf(pullback(spec, phi, ubar, 1.0), expected), 1e-6)
          << kind_name(spec.kind) << " J=" << J << " K=" << K;
    }
  }
}

namespace {

std::size_t numeric_rank(const Matrix& m) {
  const Svd d = svd(m.rows() >= m.cols() ? m : m.transposed());
  std::size_t r = 0;
  for (double s : d.s)
    if (s > 1e-6 * d.s.front()) ++r;
  return r;
}

}  // namespace

TEST_P(EveryKind, JacobianHasManifoldRank) {
  std::mt19937_64 rng(400 + static_cast<int>(GetParam()));
  const ParamSpec spec{GetParam(), 4, 2};
  const auto phi = random_phi(spec, rng);
  const Matrix jac = fd_jacobian([&](std::span<const double> x) { return evaluate(spec, x).upsilon; }, phi);
  EXPECT_EQ(numeric_rank(jac), std::min(phi.size(), stiefel_dimension(4, 2)));
}
