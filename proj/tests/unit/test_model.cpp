#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qef/errors.hpp"
#include "qef/model.hpp"
#include "qef/model_io.hpp"

namespace qef {
namespace {

using testing::two_mode_model;
using testing::random_matrix;

Matrix canonical_theta(int n) { return 0.5 * kron(symplectic_unit(), Matrix::Identity(n / 2, n / 2)); }

TEST(BuildFromEnergy, ZeroMatricesGiveDegenerateModel) {
  const OqhoModel m = build_from_energy(canonical_theta(2), Matrix::Zero(2, 2), Matrix::Zero(2, 2));
  EXPECT_EQ(m.a().norm(), 0.0);
  EXPECT_EQ(m.b().norm(), 0.0);
  EXPECT_EQ(m.c()->norm(), 0.0);
  EXPECT_FALSE(validate(m).hurwitz());
  EXPECT_THROW(gramian(m), Error);
}

TEST(BuildFromEnergy, PhysicalRealizabilityHoldsIdentically) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 * (1 + trial % 3);
    const int m = n + 2 * (trial % 2);
    Matrix theta = canonical_theta(n);
    if (trial % 4 == 0) {
      const Matrix s = Matrix::Identity(n, n) + 0.3 * random_matrix(rng, n, n);
      theta = s * theta * s.transpose();
      theta = 0.5 * (theta - theta.transpose()).eval();
    }
    const Matrix g = random_matrix(rng, n, n);
    const OqhoModel model = build_from_energy(theta, g + g.transpose(), random_matrix(rng, m, n));
    const ModelDiagnostics d = validate(model);
    const double scale = 1.0 + model.a().norm() * model.theta().norm() + model.b().squaredNorm();
    EXPECT_LE(d.pr1_residual, 1e-12 * scale) << trial;
    ASSERT_TRUE(d.pr2_residual.has_value());
    EXPECT_LE(*d.pr2_residual, 1e-12 * scale) << trial;
  }
}

TEST(Validate, TwoModeModel) {
  const OqhoModel model = two_mode_model();
  const ModelDiagnostics d = validate(model);
  EXPECT_LE(d.pr1_residual, 1e-3 * (model.a() * model.theta()).norm());
  EXPECT_NEAR(d.spectral_abscissa, -1.3480, 1e-3);
  EXPECT_FALSE(d.pr2_residual.has_value());
  EXPECT_GT(d.bbt_min_eigenvalue, 0.0);
  EXPECT_LT(d.mho_condition, 1e3);
  EXPECT_GT(std::abs(mho(model).determinant()), 1e-6);
}

TEST(Validate, SingularNoiseMatrixIsReported) {
  Matrix b = Matrix::Identity(2, 2);
  b.row(1).setZero();
  const OqhoModel m(canonical_theta(2), -Matrix::Identity(2, 2), b);
  EXPECT_LE(validate(m).bbt_min_eigenvalue, 0.0);
}

TEST(Mho, AntisymmetricAndZeroForZeroB) {
  std::mt19937_64 rng(2);
  const OqhoModel z(canonical_theta(2), -Matrix::Identity(2, 2), Matrix::Zero(2, 4));
  EXPECT_EQ(mho(z).norm(), 0.0);
  const OqhoModel r(canonical_theta(4), -Matrix::Identity(4, 4), random_matrix(rng, 4, 6));
  const Matrix w = mho(r);
  EXPECT_EQ((w + w.transpose()).norm(), 0.0);
}

TEST(Model, ConstructorRejectsBadInput) {
  EXPECT_THROW(OqhoModel(Matrix::Identity(2, 2), -Matrix::Identity(2, 2), Matrix::Identity(2, 2)), Error);
  EXPECT_THROW(OqhoModel(Matrix::Zero(3, 3), -Matrix::Identity(3, 3), Matrix::Identity(3, 2)), Error);
  EXPECT_THROW(OqhoModel(canonical_theta(2), -Matrix::Identity(2, 2), Matrix::Identity(2, 3)), Error);
  EXPECT_THROW(OqhoModel(canonical_theta(2), -Matrix::Identity(3, 3), Matrix::Identity(2, 2)), Error);
}

TEST(CoordinateTransform, IdentityAndScalar) {
  const OqhoModel model = two_mode_model();
  const OqhoModel same = coordinate_transform(model, Matrix::Identity(4, 4));
  EXPECT_LT((same.a() - model.a()).norm(), 1e-14);
  EXPECT_LT((same.theta() - model.theta()).norm(), 1e-14);
  const OqhoModel two = coordinate_transform(model, 2.0 * Matrix::Identity(4, 4));
  EXPECT_LT((two.theta() - 4.0 * model.theta()).norm(), 1e-13);
  EXPECT_LT((two.a() - model.a()).norm(), 1e-13);
  EXPECT_LT((two.b() - 2.0 * model.b()).norm(), 1e-13);
}

TEST(CoordinateTransform, PreservesRealizability) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix g = random_matrix(rng, 4, 4);
    const OqhoModel model = build_from_energy(canonical_theta(4), g + g.transpose(), random_matrix(rng, 6, 4));
    const Matrix sigma = Matrix::Identity(4, 4) + 0.4 * random_matrix(rng, 4, 4);
    const double cond = condition_number(sigma);
    const OqhoModel t = coordinate_transform(model, sigma);
    const ModelDiagnostics d = validate(t);
    EXPECT_LE(d.pr1_relative(), 1e-8 * cond * cond);
    EXPECT_LE(d.pr2_relative(), 1e-8 * cond * cond);
  }
}

TEST(CoordinateTransform, SingularSigma) {
  try {
    coordinate_transform(two_mode_model(), Matrix::Zero(4, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularTransform);
  }
}

TEST(Gramian, ScalarZeroAndTwoMode) {
  const OqhoModel scalar(canonical_theta(2), -Matrix::Identity(2, 2), std::sqrt(2.0) * Matrix::Identity(2, 2));
  EXPECT_LT((gramian(scalar) - Matrix::Identity(2, 2)).norm(), 1e-14);
  const OqhoModel zero(canonical_theta(2), -Matrix::Identity(2, 2), Matrix::Zero(2, 2));
  EXPECT_EQ(gramian(zero).norm(), 0.0);

  const OqhoModel model = two_mode_model();
  const Matrix g = gramian(model);
  const Matrix bbt = model.b() * model.b().transpose();
  EXPECT_LE((model.a() * g + g * model.a().transpose() + bbt).norm(), 1e-10 * (1.0 + bbt.norm()));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  EXPECT_LT(testing::relative_error(g, testing::kronecker_lyapunov(model.a(), bbt)), 1e-10);
}

TEST(Kernels, ZeroLagAndDecay) {
  const OqhoModel model = two_mode_model();
  const KernelPair k0 = two_point_kernels(model, 0.0);
  EXPECT_LT((k0.covariance - gramian(model)).norm(), 1e-14);
  EXPECT_LT((k0.commutator - model.theta()).norm(), 1e-14);
  const KernelPair far = two_point_kernels(model, 40.0);
  EXPECT_LT(far.covariance.norm(), 1e-15);
  EXPECT_LT(far.commutator.norm(), 1e-15);
}

TEST(Kernels, MatchOdeIntegration) {
  const OqhoModel model = two_mode_model();
  const Matrix g = gramian(model);
  const Matrix want = testing::integrate_linear(model.a(), g, 0.3, 3000);
  EXPECT_LT(testing::relative_error(two_point_kernels(model, 0.3).covariance, want), 1e-8);
}

TEST(Kernels, LagSymmetries) {
  const OqhoModel model = two_mode_model();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lag(0.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const double tau = lag(rng);
    const KernelPair plus = two_point_kernels(model, tau);
    const KernelPair minus = two_point_kernels(model, -tau);
    const double scale = 1.0 + plus.covariance.norm();
    EXPECT_LE((minus.covariance - plus.covariance.transpose()).norm(), 1e-12 * scale);
    EXPECT_LE((minus.commutator + plus.commutator.transpose()).norm(), 1e-12 * scale);
  }
}

TEST(RandomModel, SmallAndMedium) {
  const OqhoModel small = random_pr_model(2, 2, 1, 0.1);
  const ModelDiagnostics d = validate(small);
  EXPECT_LE(d.pr1_residual, 1e-10);
  EXPECT_LE(d.pr2_relative(), 1e-10);
  EXPECT_TRUE(d.hurwitz());

  const OqhoModel medium = random_pr_model(4, 6, 7, 0.1);
  EXPECT_EQ(medium.n(), 4);
  EXPECT_EQ(medium.m(), 6);
  EXPECT_LT(validate(medium).mho_condition, 1e8);
  EXPECT_LE(validate(medium).spectral_abscissa, -0.1);
}

TEST(RandomModel, DeterministicInSeed) {
  const OqhoModel a = random_pr_model(4, 4, 99, 0.05);
  const OqhoModel b = random_pr_model(4, 4, 99, 0.05);
  EXPECT_EQ((a.a() - b.a()).norm(), 0.0);
  EXPECT_EQ((a.b() - b.b()).norm(), 0.0);
}

TEST(RandomModel, ConjugatedTheta) {
  RandomModelOptions opts;
  opts.conjugate_theta = true;
  const OqhoModel m = random_pr_model(4, 6, 5, 0.05, opts);
  EXPECT_LE(validate(m).pr1_relative(), 1e-12);
  EXPECT_GT((m.theta() - canonical_theta(4)).norm(), 1e-3);
}

TEST(RandomModel, InfeasibleMarginFails) {
  RandomModelOptions opts;
  opts.max_attempts = 200;
  try {
    random_pr_model(2, 2, 1, 1e3, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGenerationFailure);
  }
}

TEST(ModelJson, RoundTripIsExact) {
  std::mt19937_64 rng(5);
  const Matrix g = random_matrix(rng, 4, 4);
  const OqhoModel m = build_from_energy(canonical_theta(4), g + g.transpose(), random_matrix(rng, 6, 4));
  const OqhoModel back = parse_model_json(model_to_json(m));
  EXPECT_EQ((back.theta() - m.theta()).norm(), 0.0);
  EXPECT_EQ((back.a() - m.a()).norm(), 0.0);
  EXPECT_EQ((back.b() - m.b()).norm(), 0.0);
  EXPECT_EQ((*back.c() - *m.c()).norm(), 0.0);
  EXPECT_EQ((*back.energy() - *m.energy()).norm(), 0.0);
  EXPECT_EQ((*back.coupling() - *m.coupling()).norm(), 0.0);
}

TEST(ModelJson, BundledFileParses) {
  const OqhoModel m = two_mode_model();
  EXPECT_EQ(m.n(), 4);
  EXPECT_EQ(m.m(), 6);
  EXPECT_DOUBLE_EQ(m.a()(1, 2), -14.7367);
  EXPECT_DOUBLE_EQ(m.b()(3, 4), 3.6763);
}

void expect_parse_error(const std::string& text) {
  try {
    parse_model_json(text);
    FAIL() << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError) << text;
  }
}

TEST(ModelJson, MalformedInput) {
  expect_parse_error("{");
  expect_parse_error("[]");
  expect_parse_error(R"({"n": 2, "m": 2, "Theta": [[0, 0.5], [-0.5, 0]], "A": [[-1, 0], [0, -1]]})");
  expect_parse_error(R"({"n": 3, "m": 2, "Theta": [], "A": [], "B": []})");
  expect_parse_error(R"({"n": 2, "m": 1, "Theta": [[0, 0.5], [-0.5, 0]], "A": [[-1, 0], [0, -1]], "B": [[1], [1]]})");
  expect_parse_error(R"({"n": 2, "m": 2, "Theta": [[0, 0.5], [-0.5, 0]], "A": [[-1, 0], [0, -1]], "B": [[1, 0]]})");
  expect_parse_error(R"({"n": 2, "m": 2, "Theta": [[0, 0.5], [-0.5, 0]], "A": [[-1, "x"], [0, -1]], "B": [[1, 0], [0, 1]]})");
  expect_parse_error(R"({"n": 2.5, "m": 2, "Theta": [], "A": [], "B": []})");
  expect_parse_error(R"({"n": 2, "m": 2, "Theta": [[0, 0.5], [0.5, 0]], "A": [[-1, 0], [0, -1]], "B": [[1, 0], [0, 1]]})");
}

TEST(ModelJson, MissingFile) {
  EXPECT_THROW(load_model("/nonexistent/model.json"), Error);
}

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(-2.5e-20), "-2.5e-20");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

}  // namespace
}  // namespace qef
