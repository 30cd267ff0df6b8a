#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace qef {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

// A matrix counts as Hurwitz only if its spectral abscissa is below -kHurwitzMargin.
inline constexpr double kHurwitzMargin = 1e-9;

double spectral_abscissa(const Matrix& a);
bool is_hurwitz(const Matrix& a, double margin = kHurwitzMargin);

// Ratio of extreme singular values; +inf for a singular matrix.
double condition_number(const Matrix& a);

Matrix kron(const Matrix& a, const Matrix& b);

// g^{-1} p g^{-1} by two LU solves, without forming g^{-1}.
Matrix inverse_sandwich(const Matrix& g, const Matrix& p);

// The 2x2 symplectic unit [[0, 1], [-1, 0]].
Matrix symplectic_unit();

// [[Re c, -Im c], [Im c, Re c]]
Matrix realify(const CMatrix& c);

// Solves A V + V A^T + U = 0 for Hurwitz A (Bartels-Stewart on the complex
// Schur form of A). Throws kNotHurwitz / kSolveFailure. Exactly symmetric or
// antisymmetric U yields a V projected onto the same subspace.
Matrix solve_lyapunov(const Matrix& a, const Matrix& u);

struct AreOptions {
  double tolerance = 1e-10;  // relative to 1 + ||Q||_F
  int max_iterations = 100;
};

struct AreSolution {
  Matrix a;
  int iterations = 0;
  double residual = 0.0;
  double closed_loop_abscissa = 0.0;
};

// ||Acal^T a + a Acal + Q + a Sigma a||_F
double are_residual(const Matrix& acal, const Matrix& sigma, const Matrix& q, const Matrix& a);

/// Stabilizing solution of Acal^T a + a Acal + Q + a Sigma a = 0, i.e. the
/// symmetric a with Acal + Sigma a Hurwitz, by Newton-Kleinman iteration.
///
/// The iteration starts from `initial` (zero when empty), which must itself be
/// stabilizing. Q may be indefinite. Throws kNotHurwitz when Acal is not
/// Hurwitz, kStabilizingSolutionLost when an iterate leaves the stabilizing
/// set, and kNoConvergence after `max_iterations`.
AreSolution solve_are_stabilizing(const Matrix& acal, const Matrix& sigma, const Matrix& q,
                                  const AreOptions& options = {}, const Matrix& initial = Matrix());

struct SpectralDecomposition {
  Vector eigenvalues;    // ascending
  CMatrix eigenvectors;  // unitary, columns paired with eigenvalues

  CMatrix reconstruct() const;

  template <class F>
  CMatrix apply(F&& f) const {
    CVector values(eigenvalues.size());
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) values(i) = Complex(f(eigenvalues(i)));
    return eigenvectors * values.asDiagonal() * eigenvectors.adjoint();
  }
};

// ||M - M^*||_F / max(||M||_F, 1)
double hermitian_defect(const CMatrix& m);

// Throws kNotHermitian when hermitian_defect(m) exceeds `tolerance`.
SpectralDecomposition hermitian_eigen(const CMatrix& m, double tolerance = 1e-12);

CMatrix hermitian_matfun(const CMatrix& m, const std::function<Complex(double)>& f,
                         double tolerance = 1e-12);

// Nonnegative square root of a Hermitian PSD matrix; eigenvalues below
// -psd_tolerance raise kNotPsd, the rest are clipped at zero.
CMatrix hermitian_sqrt(const CMatrix& m, double psd_tolerance = 1e-10);

Matrix expm(const Matrix& a);

// Scalar kernels used as matrix-function arguments.
double phi_scalar(double u);   // (e^u - 1)/u, 1 at 0
double tanhc_scalar(double x); // tanh(x)/x, 1 at 0

}  // namespace qef
