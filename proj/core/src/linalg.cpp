#include "qef/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qef/errors.hpp"

namespace qef {

double spectral_abscissa(const Matrix& a) {
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kSolveFailure, "eigenvalue iteration did not converge");
  }
  return solver.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Matrix& a, double margin) { return spectral_abscissa(a) < -margin; }

double condition_number(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix inverse_sandwich(const Matrix& g, const Matrix& p) {
  const Matrix left = g.partialPivLu().solve(p);
  const Matrix gt = g.transpose();
  return gt.partialPivLu().solve(left.transpose()).transpose();
}

Matrix symplectic_unit() {
  Matrix j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  return j;
}

Matrix realify(const CMatrix& c) {
  const Eigen::Index r = c.rows(), k = c.cols();
  Matrix out(2 * r, 2 * k);
  out.topLeftCorner(r, k) = c.real();
  out.topRightCorner(r, k) = -c.imag();
  out.bottomLeftCorner(r, k) = c.imag();
  out.bottomRightCorner(r, k) = c.real();
  return out;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& u) {
  if (a.rows() != a.cols() || u.rows() != a.rows() || u.cols() != a.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "solve_lyapunov: shape mismatch");
  }
  const Eigen::Index n = a.rows();
  if (n == 0) return Matrix(0, 0);

  Eigen::ComplexSchur<Matrix> schur(a, /*computeU=*/true);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::kSolveFailure, "complex Schur decomposition did not converge");
  }
  const CMatrix& t = schur.matrixT();
  const CMatrix& q = schur.matrixU();

  const double abscissa = t.diagonal().real().maxCoeff();
  if (!(abscissa < -kHurwitzMargin)) {
    std::ostringstream os;
    os << "spectral abscissa " << abscissa << " is not below " << -kHurwitzMargin;
    throw Error(ErrorCode::kNotHurwitz, os.str());
  }

  // T Y + Y T^* = -F with F = Q^* U Q, solved column by column from the right:
  // (T + conj(t_kk) I) y_k = -f_k - sum_{j>k} conj(t_kj) y_j.
  const CMatrix f = q.adjoint() * u.cast<Complex>() * q;
  CMatrix y = CMatrix::Zero(n, n);
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    CVector rhs = -f.col(k);
    for (Eigen::Index j = k + 1; j < n; ++j) rhs -= std::conj(t(k, j)) * y.col(j);
    const Complex shift = std::conj(t(k, k));
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      Complex acc = rhs(i);
      for (Eigen::Index j = i + 1; j < n; ++j) acc -= t(i, j) * y(j, k);
      const Complex pivot = t(i, i) + shift;
      if (std::abs(pivot) <= 1e-14 * scale) {
        throw Error(ErrorCode::kSolveFailure, "Lyapunov operator is numerically singular");
      }
      y(i, k) = acc / pivot;
    }
  }

  Matrix v = (q * y * q.adjoint()).real();
  if (u == u.transpose()) {
    v = 0.5 * (v + v.transpose()).eval();
  } else if (u == -u.transpose()) {
    v = 0.5 * (v - v.transpose()).eval();
  }
  return v;
}

double are_residual(const Matrix& acal, const Matrix& sigma, const Matrix& q, const Matrix& a) {
  return (acal.transpose() * a + a * acal + q + a * sigma * a).norm();
}

AreSolution solve_are_stabilizing(const Matrix& acal, const Matrix& sigma, const Matrix& q,
                                  const AreOptions& options, const Matrix& initial) {
  const Eigen::Index n = acal.rows();
  if (acal.cols() != n || sigma.rows() != n || sigma.cols() != n || q.rows() != n ||
      q.cols() != n) {
    throw Error(ErrorCode::kInvalidArgument, "solve_are_stabilizing: shape mismatch");
  }
  if (!is_hurwitz(acal)) {
    throw Error(ErrorCode::kNotHurwitz, "ARE dynamics matrix is not Hurwitz");
  }

  Matrix a = initial.size() == 0 ? Matrix::Zero(n, n) : Matrix(initial);
  if (a.rows() != n || a.cols() != n) {
    throw Error(ErrorCode::kInvalidArgument, "solve_are_stabilizing: bad initial guess shape");
  }
  const double target = options.tolerance * (1.0 + q.norm());

  AreSolution out;
  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    const Matrix closed = acal + sigma * a;
    const double abscissa = spectral_abscissa(closed);
    if (!(abscissa < -kHurwitzMargin)) {
      std::ostringstream os;
      os << "Newton iterate " << iter << " has closed-loop spectral abscissa " << abscissa;
      throw Error(ErrorCode::kStabilizingSolutionLost, os.str());
    }
    const double residual = are_residual(acal, sigma, q, a);
    out.a = a;
    out.iterations = iter;
    out.residual = residual;
    out.closed_loop_abscissa = abscissa;
    if (residual <= target) return out;
    if (iter == options.max_iterations) break;

    // closed^T a_next + a_next closed + Q - a Sigma a = 0
    const Matrix rhs = q - a * sigma * a;
    Matrix next = solve_lyapunov(closed.transpose(), 0.5 * (rhs + rhs.transpose()));
    a = 0.5 * (next + next.transpose());
  }
  std::ostringstream os;
  os << "Newton-Kleinman stalled at residual " << out.residual << " (target " << target << ")";
  throw Error(ErrorCode::kNoConvergence, os.str());
}

CMatrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

double hermitian_defect(const CMatrix& m) {
  return (m - m.adjoint()).norm() / std::max(1.0, m.norm());
}

SpectralDecomposition hermitian_eigen(const CMatrix& m, double tolerance) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "hermitian_eigen: matrix is not square");
  }
  const double defect = hermitian_defect(m);
  if (defect > tolerance) {
    std::ostringstream os;
    os << "relative Hermitian defect " << defect << " exceeds " << tolerance;
    throw Error(ErrorCode::kNotHermitian, os.str());
  }
  const CMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kSolveFailure, "Hermitian eigensolver did not converge");
  }
  return SpectralDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

CMatrix hermitian_matfun(const CMatrix& m, const std::function<Complex(double)>& f,
                         double tolerance) {
  return hermitian_eigen(m, tolerance).apply(f);
}

CMatrix hermitian_sqrt(const CMatrix& m, double psd_tolerance) {
  const SpectralDecomposition dec = hermitian_eigen(m);
  if (dec.eigenvalues.size() > 0 && dec.eigenvalues(0) < -psd_tolerance) {
    std::ostringstream os;
    os << "minimum eigenvalue " << dec.eigenvalues(0) << " is below " << -psd_tolerance;
    throw Error(ErrorCode::kNotPsd, os.str());
  }
  CMatrix root = dec.apply([](double x) { return std::sqrt(std::max(x, 0.0)); });
  return 0.5 * (root + root.adjoint());
}

Matrix expm(const Matrix& a) { return a.exp(); }

double phi_scalar(double u) { return u == 0.0 ? 1.0 : std::expm1(u) / u; }

double tanhc_scalar(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 3.0;
  return std::tanh(x) / x;
}

}  // namespace qef
