#include "qef/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "qef/errors.hpp"

namespace qef {

namespace {

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " must be " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

Matrix field_commutation_matrix(int m) {
  if (m <= 0 || m % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "field dimension must be even and positive");
  }
  return kron(symplectic_unit(), Matrix::Identity(m / 2, m / 2));
}

OqhoModel::OqhoModel(Matrix theta, Matrix a, Matrix b, std::optional<Matrix> c,
                     std::optional<Matrix> energy, std::optional<Matrix> coupling)
    : theta_(std::move(theta)),
      a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(c)),
      energy_(std::move(energy)),
      coupling_(std::move(coupling)) {
  const Eigen::Index n = theta_.rows();
  const Eigen::Index m = b_.cols();
  if (n <= 0 || n % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "number of system variables n must be even and positive");
  }
  if (m <= 0 || m % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "number of field channels m must be even and positive");
  }
  require_shape(theta_, n, n, "Theta");
  require_shape(a_, n, n, "A");
  require_shape(b_, n, m, "B");
  if (c_) require_shape(*c_, m, n, "C");
  if (energy_) require_shape(*energy_, n, n, "R");
  if (coupling_) require_shape(*coupling_, m, n, "M");

  if (!all_finite(theta_) || !all_finite(a_) || !all_finite(b_) ||
      (c_ && !all_finite(*c_)) || (energy_ && !all_finite(*energy_)) ||
      (coupling_ && !all_finite(*coupling_))) {
    throw Error(ErrorCode::kInvalidArgument, "model matrices must have finite entries");
  }
  if ((theta_ + theta_.transpose()).norm() > 1e-12 * std::max(1.0, theta_.norm())) {
    throw Error(ErrorCode::kInvalidArgument, "Theta must be antisymmetric");
  }
  if (energy_ && (*energy_ - energy_->transpose()).norm() > 1e-12 * std::max(1.0, energy_->norm())) {
    throw Error(ErrorCode::kInvalidArgument, "energy matrix R must be symmetric");
  }
}

Matrix OqhoModel::field_j() const { return field_commutation_matrix(m()); }

OqhoModel build_from_energy(const Matrix& theta, const Matrix& energy, const Matrix& coupling) {
  const Eigen::Index n = theta.rows();
  require_shape(theta, n, n, "Theta");
  require_shape(energy, n, n, "R");
  if (coupling.cols() != n) {
    throw Error(ErrorCode::kInvalidArgument, "coupling matrix M must have n columns");
  }
  const Matrix j = field_commutation_matrix(static_cast<int>(coupling.rows()));
  Matrix a = 2.0 * theta * (energy + coupling.transpose() * j * coupling);
  Matrix b = 2.0 * theta * coupling.transpose();
  Matrix c = 2.0 * j * coupling;
  return OqhoModel(theta, std::move(a), std::move(b), std::move(c), energy, coupling);
}

Matrix mho(const OqhoModel& model) {
  const Matrix raw = model.b() * model.field_j() * model.b().transpose();
  return 0.5 * (raw - raw.transpose());
}

ModelDiagnostics validate(const OqhoModel& model) {
  ModelDiagnostics d;
  const Matrix& theta = model.theta();
  const Matrix& a = model.a();
  const Matrix& b = model.b();
  const Matrix j = model.field_j();

  d.pr1_residual = (a * theta + theta * a.transpose() + b * j * b.transpose()).norm();
  if (model.c()) d.pr2_residual = (theta * model.c()->transpose() + b * j).norm();
  d.spectral_abscissa = spectral_abscissa(a);
  d.mho_condition = condition_number(mho(model));
  const Matrix bbt = b * b.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (bbt + bbt.transpose()), Eigen::EigenvaluesOnly);
  d.bbt_min_eigenvalue = eig.eigenvalues()(0);
  d.pr_scale = 1.0 + a.norm() * theta.norm();
  return d;
}

OqhoModel coordinate_transform(const OqhoModel& model, const Matrix& sigma) {
  require_shape(sigma, model.n(), model.n(), "sigma");
  Eigen::FullPivLU<Matrix> lu(sigma);
  if (!lu.isInvertible() || condition_number(sigma) > 1e14) {
    throw Error(ErrorCode::kSingularTransform, "coordinate transform is singular");
  }
  const Matrix inv = lu.inverse();
  Matrix theta = sigma * model.theta() * sigma.transpose();
  theta = 0.5 * (theta - theta.transpose()).eval();
  Matrix a = sigma * model.a() * inv;
  Matrix b = sigma * model.b();
  std::optional<Matrix> c, energy, coupling;
  if (model.c()) c = *model.c() * inv;
  if (model.energy()) {
    Matrix r = inv.transpose() * *model.energy() * inv;
    energy = 0.5 * (r + r.transpose());
  }
  if (model.coupling()) coupling = *model.coupling() * inv;
  return OqhoModel(std::move(theta), std::move(a), std::move(b), std::move(c), std::move(energy),
                   std::move(coupling));
}

void require_hurwitz(const OqhoModel& model) {
  const double abscissa = spectral_abscissa(model.a());
  if (!(abscissa < -kHurwitzMargin)) {
    std::ostringstream os;
    os << "A has spectral abscissa " << abscissa;
    throw Error(ErrorCode::kNotHurwitz, os.str());
  }
}

Matrix gramian(const OqhoModel& model) {
  require_hurwitz(model);
  const Matrix bbt = model.b() * model.b().transpose();
  return solve_lyapunov(model.a(), 0.5 * (bbt + bbt.transpose()));
}

KernelPair two_point_kernels(const OqhoModel& model, double tau) {
  require_hurwitz(model);
  const Matrix gamma = gramian(model);
  if (tau >= 0.0) {
    const Matrix e = expm(tau * model.a());
    return {e * gamma, e * model.theta()};
  }
  const Matrix et = expm(-tau * model.a().transpose());
  return {gamma * et, model.theta() * et};
}

OqhoModel random_pr_model(int n, int m, std::uint64_t seed, double stability_margin,
                          const RandomModelOptions& options) {
  if (n <= 0 || m <= 0 || n % 2 != 0 || m % 2 != 0 || n > m) {
    throw Error(ErrorCode::kInvalidArgument, "random_pr_model requires even 0 < n <= m");
  }
  if (!(stability_margin > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "stability margin must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto randn = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index k = 0; k < cols; ++k) out(i, k) = normal(rng);
    return out;
  };

  Matrix theta = 0.5 * kron(symplectic_unit(), Matrix::Identity(n / 2, n / 2));
  if (options.conjugate_theta) {
    const Matrix sigma = Matrix::Identity(n, n) + 0.3 * randn(n, n);
    theta = sigma * theta * sigma.transpose();
    theta = 0.5 * (theta - theta.transpose()).eval();
  }

  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    const Matrix g = randn(n, n);
    const Matrix energy = 0.5 * (g + g.transpose());
    const Matrix coupling = randn(m, n);
    OqhoModel model = build_from_energy(theta, energy, coupling);
    if (spectral_abscissa(model.a()) > -stability_margin) continue;
    if (condition_number(mho(model)) > 1e8) continue;
    return model;
  }
  std::ostringstream os;
  os << "no model with stability margin " << stability_margin << " after " << options.max_attempts
     << " attempts";
  throw Error(ErrorCode::kGenerationFailure, os.str());
}

}  // namespace qef
