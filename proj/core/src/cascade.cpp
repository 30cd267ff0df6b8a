#include "qef/cascade.hpp"

#include <cmath>
#include <sstream>

#include "qef/errors.hpp"

namespace qef {

std::vector<double> phi_taylor_coeffs(int max_index) {
  if (max_index < 0) throw Error(ErrorCode::kInvalidArgument, "coefficient index must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(max_index) + 1);
  double factorial = 1.0;  // (k+1)!
  for (int k = 0; k <= max_index; ++k) {
    factorial *= static_cast<double>(k + 1);
    out[static_cast<std::size_t>(k)] = 1.0 / factorial;
  }
  return out;
}

std::vector<double> psi_coeffs(int max_index) {
  const std::vector<double> phi = phi_taylor_coeffs(max_index);
  std::vector<double> psi(phi.size(), 0.0);
  psi[0] = 1.0;
  for (int k = 1; k <= max_index; ++k) {
    double acc = phi[static_cast<std::size_t>(k)];
    for (int j = 1; j < k; ++j) acc -= psi[static_cast<std::size_t>(j)] * psi[static_cast<std::size_t>(k - j)];
    psi[static_cast<std::size_t>(k)] = 0.5 * acc;
  }
  return psi;
}

std::string_view to_string(SchemeKind kind) {
  return kind == SchemeKind::kTaylor ? "taylor" : "sqrtpoly";
}

SchemeKind parse_scheme(std::string_view name) {
  if (name == "taylor") return SchemeKind::kTaylor;
  if (name == "sqrtpoly") return SchemeKind::kSqrtPoly;
  throw Error(ErrorCode::kInvalidArgument, "unknown coefficient scheme '" + std::string(name) + "'");
}

CoefficientScheme scheme_weights(SchemeKind kind, int order) {
  if (order < 0) throw Error(ErrorCode::kInvalidArgument, "truncation order must be >= 0");
  CoefficientScheme scheme{kind, order, phi_taylor_coeffs(2 * order + 1)};
  if (kind == SchemeKind::kSqrtPoly) {
    const std::vector<double> psi = psi_coeffs(order);
    for (int k = order + 1; k <= 2 * order; ++k) {
      double acc = 0.0;
      for (int j = k - order; j <= order; ++j) {
        acc += psi[static_cast<std::size_t>(j)] * psi[static_cast<std::size_t>(k - j)];
      }
      scheme.weights[static_cast<std::size_t>(k)] = acc;
    }
    scheme.weights[static_cast<std::size_t>(2 * order + 1)] = 0.0;
  }
  return scheme;
}

namespace {
// Symmetric or antisymmetric part.
Matrix with_parity(const Matrix& m, bool symmetric) {
  return symmetric ? Matrix(0.5 * (m + m.transpose())) : Matrix(0.5 * (m - m.transpose()));
}
}  // namespace

CascadeCoefficients compute_cascade(const OqhoModel& model, int order, const CascadeOptions& options) {
  if (order < 0) throw Error(ErrorCode::kInvalidArgument, "truncation order must be >= 0");
  require_hurwitz(model);
  const int n = model.n();
  const int top = 2 * order + 1;
  const Matrix& a = model.a();
  const Matrix& theta = model.theta();

  const double theta_cond = condition_number(theta);
  if (theta_cond > options.gamma_condition_limit) throw GammaSingularError(0, theta_cond);

  CascadeCoefficients out;
  out.order = order;
  out.alpha.assign(static_cast<std::size_t>(top) + 1, Matrix());
  out.beta.assign(static_cast<std::size_t>(top) + 1, Matrix());
  out.gamma.assign(static_cast<std::size_t>(top) + 1, Matrix());
  out.gamma_condition_numbers.assign(static_cast<std::size_t>(top) + 1, 0.0);

  const Matrix mho_matrix = mho(model);
  out.alpha[0] = Matrix::Identity(n, n);
  out.alpha[1] = theta;
  out.gamma[0] = theta;
  out.gamma_condition_numbers[0] = theta_cond;
  out.beta[0] = Matrix::Identity(n, n);
  out.beta[1] = with_parity(inverse_sandwich(theta, mho_matrix), false);

  for (int j = 1; j <= top; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    // alpha_j gamma_{j-1} = gamma_{j-1} beta_{j-1} gamma_{j-1}; the congruence has the
    // parity of gamma_j, which is imposed exactly so rounding cannot accumulate in it.
    const Matrix product = with_parity(out.gamma[uj - 1] * out.beta[uj - 1] * out.gamma[uj - 1], j % 2 != 0);
    out.gamma[uj] = with_parity(solve_lyapunov(a, product), j % 2 != 0);
    const double cond = condition_number(out.gamma[uj]);
    out.gamma_condition_numbers[uj] = cond;
    if (j == top) break;  // gamma_{2r+1} is diagnostic only
    if (!(cond <= options.gamma_condition_limit)) throw GammaSingularError(j, cond);

    out.alpha[uj + 1] = out.gamma[uj] * out.beta[uj];
    out.beta[uj + 1] = with_parity(inverse_sandwich(out.gamma[uj], product), (j + 1) % 2 == 0);
  }

  out.scales.assign(static_cast<std::size_t>(top) + 1, 1.0);
  if (options.balance) {
    double cumulative = 1.0;
    for (int k = 1; k <= top; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const double s = out.alpha[uk].norm();
      if (s > 0.0 && std::isfinite(s)) {
        out.scales[uk] = s;
        out.alpha[uk] /= s;
      }
      cumulative *= out.scales[uk] * out.scales[uk];
      out.beta[uk] *= cumulative;
    }
    out.balanced = true;
  }
  return out;
}

CMatrix bob_sqrt(const OqhoModel& model) {
  const Matrix bbt = model.b() * model.b().transpose();
  CMatrix bob(model.n(), model.n());
  bob.real() = 0.5 * (bbt + bbt.transpose());
  bob.imag() = -mho(model);
  return hermitian_sqrt(bob, 1e-10);
}

Matrix realified_sqrt(const OqhoModel& model) {
  Matrix rs = realify(bob_sqrt(model));
  return 0.5 * (rs + rs.transpose());
}

Matrix realified_bob(const OqhoModel& model) {
  const int n = model.n();
  const Matrix bbt = model.b() * model.b().transpose();
  const Matrix w = mho(model);
  Matrix out(2 * n, 2 * n);
  out << 0.5 * (bbt + bbt.transpose()), w, -w, 0.5 * (bbt + bbt.transpose());
  return out;
}

TruncatedFilter assemble_filter(const OqhoModel& model, const CascadeCoefficients& coeffs) {
  const int n = model.n();
  const int blocks = 2 * coeffs.order + 2;
  const int block = 2 * n;
  TruncatedFilter f;
  f.nu = blocks * block;
  f.acal = Matrix::Zero(f.nu, f.nu);
  const Matrix i2 = Matrix::Identity(2, 2);
  const Matrix diag = kron(i2, model.a());
  for (int j = 0; j < blocks; ++j) {
    f.acal.block(j * block, j * block, block, block) = diag;
    if (j > 0) {
      f.acal.block(j * block, (j - 1) * block, block, block) =
          kron(i2, coeffs.alpha[static_cast<std::size_t>(j)]);
    }
  }
  f.rs = realified_sqrt(model);
  f.bcal = Matrix::Zero(f.nu, block);
  f.bcal.topRows(block) = f.rs;
  return f;
}

WeightMatrix assemble_weight(const CascadeCoefficients& coeffs, const CoefficientScheme& scheme,
                             double theta) {
  if (theta < 0.0) throw Error(ErrorCode::kInvalidArgument, "theta must be nonnegative");
  if (scheme.order != coeffs.order) {
    throw Error(ErrorCode::kInvalidArgument, "scheme and cascade truncation orders differ");
  }
  const Eigen::Index n = coeffs.beta[0].rows();
  const int r = coeffs.order;
  const Eigen::Index block = 4 * n;
  WeightMatrix w;
  w.theta = theta;
  w.h = Matrix::Zero(block * (r + 1), block * (r + 1));
  const Matrix i2 = Matrix::Identity(2, 2);
  const Matrix bj = symplectic_unit();
  double power = 1.0;  // (-4 theta^2)^k
  for (int k = 0; k <= r; ++k) {
    const auto even = static_cast<std::size_t>(2 * k);
    const auto odd = even + 1;
    const Matrix f = power * scheme.weights[even] * coeffs.beta[even];
    const Matrix g = -2.0 * theta * power * scheme.weights[odd] * coeffs.beta[odd];
    w.h.block(k * block, k * block, 2 * n, 2 * n) = kron(i2, f);
    w.h.block(k * block + 2 * n, k * block + 2 * n, 2 * n, 2 * n) = -kron(bj, g);
    power *= -4.0 * theta * theta;
  }
  w.h = 0.5 * (w.h + w.h.transpose()).eval();
  return w;
}

CMatrix resolvent(const Matrix& a, double lambda) {
  CMatrix m = -a.cast<Complex>();
  m.diagonal().array() += Complex(0.0, lambda);
  return m.partialPivLu().inverse();
}

namespace {
double relative_gap(const CMatrix& lhs, const CMatrix& rhs) {
  const double scale = std::max(lhs.norm(), rhs.norm());
  if (scale == 0.0) return 0.0;
  return (lhs - rhs).norm() / scale;
}
}  // namespace

double verify_transposition(const OqhoModel& model, const Matrix& u, double lambda) {
  const Matrix v = solve_lyapunov(model.a(), u);
  if (condition_number(v) > 1e12) {
    throw Error(ErrorCode::kSingularV, "Lyapunov solution V is numerically singular");
  }
  const CMatrix e = resolvent(model.a(), lambda);
  const CMatrix ec = e.adjoint();
  const CMatrix vc = v.cast<Complex>();
  const CMatrix vinv = v.inverse().cast<Complex>();
  const CMatrix uc = u.cast<Complex>();
  const CMatrix lhs = e * uc * ec;
  const CMatrix rhs = vc * ec * vinv * uc * vinv * e * vc;
  return relative_gap(lhs, rhs);
}

double verify_ordered_factorization(const OqhoModel& model, const CascadeCoefficients& coeffs, int k,
                                    double lambda) {
  if (k < 1 || k > coeffs.max_index()) {
    throw Error(ErrorCode::kInvalidArgument, "factorization index out of range");
  }
  const CMatrix e = resolvent(model.a(), lambda);
  const CMatrix ec = e.adjoint();
  const CMatrix psi = e * mho(model).cast<Complex>() * ec;
  CMatrix lhs = psi;
  for (int i = 1; i < k; ++i) lhs = (lhs * psi).eval();

  CMatrix left = CMatrix::Identity(model.n(), model.n());
  CMatrix right = CMatrix::Identity(model.n(), model.n());
  for (int j = 1; j <= k; ++j) {
    const CMatrix aj = coeffs.alpha[static_cast<std::size_t>(j)].cast<Complex>();
    left = (left * aj.transpose() * ec).eval();
    right = (e * aj * right).eval();
  }
  CMatrix rhs = left * coeffs.beta[static_cast<std::size_t>(k)].cast<Complex>() * right;
  if (k % 2 != 0) rhs = -rhs;
  return relative_gap(lhs, rhs);
}

CMatrix delta_cascade(const OqhoModel& model, const CascadeCoefficients& coeffs,
                      const std::vector<double>& weights, double theta, double lambda, int max_term) {
  if (max_term < 0 || max_term > coeffs.max_index() ||
      static_cast<int>(weights.size()) <= max_term) {
    throw Error(ErrorCode::kInvalidArgument, "delta_cascade: not enough cascade terms");
  }
  const CMatrix e = resolvent(model.a(), lambda);
  const CMatrix s = bob_sqrt(model);
  CMatrix sigma = CMatrix::Zero(model.n(), model.n());
  CMatrix g = e;  // G_0
  Complex power(1.0, 0.0);
  const Complex step(0.0, -2.0 * theta);
  for (int k = 0; k <= max_term; ++k) {
    if (k > 0) {
      g = (e * coeffs.alpha[static_cast<std::size_t>(k)].cast<Complex>() * g).eval();
      power *= step;
    }
    sigma += power * weights[static_cast<std::size_t>(k)] * g.adjoint() *
             coeffs.beta[static_cast<std::size_t>(k)].cast<Complex>() * g;
  }
  CMatrix delta = s * sigma * s;
  return 0.5 * (delta + delta.adjoint());
}

}  // namespace qef
