#pragma once

#include <string_view>
#include <vector>

#include "qef/linalg.hpp"
#include "qef/model.hpp"

namespace qef {

// phi(u) = (e^u - 1)/u has Taylor coefficients 1/(k+1)!.
std::vector<double> phi_taylor_coeffs(int max_index);

// Taylor coefficients of sqrt(phi): psi_0 = 1, psi_k = (phi_k - sum_{j=1}^{k-1} psi_j psi_{k-j}) / 2.
std::vector<double> psi_coeffs(int max_index);

enum class SchemeKind { kTaylor, kSqrtPoly };

std::string_view to_string(SchemeKind kind);
SchemeKind parse_scheme(std::string_view name);

/// Weights standing in for phi_0..phi_{2r+1} in the truncated weight matrix.
///
/// kTaylor keeps the Taylor coefficients. kSqrtPoly takes the coefficients of
/// (sum_{k<=r} psi_k u^k)^2, which match phi_k for k <= r, replace phi_k by
/// sum_{j=k-r}^{r} psi_j psi_{k-j} for r < k <= 2r, and set the last weight to 0.
struct CoefficientScheme {
  SchemeKind kind = SchemeKind::kTaylor;
  int order = 0;
  std::vector<double> weights;  // size 2r+2
};

CoefficientScheme scheme_weights(SchemeKind kind, int order);

struct CascadeOptions {
  // Rescale alpha_k to unit Frobenius norm, compensating in beta_k. Off by
  // default: the compensation piles all growth into beta_k and the truncated
  // ARE becomes badly scaled.
  bool balance = false;
  double gamma_condition_limit = 1e12;
};

/// The three matrix sequences of the recurrent Lyapunov scheme
///
///     gamma_j = L_A(alpha_j gamma_{j-1}),  alpha_{j+1} = gamma_j beta_j,
///     beta_{j+1} = gamma_j^{-1} alpha_j gamma_{j-1} gamma_j^{-1},
///
/// started from alpha_1 = gamma_0 = Theta, beta_0 = I, beta_1 = Theta^{-1} mho Theta^{-1}.
///
/// alpha[0] = I by convention, alpha and beta are stored for indices up to
/// 2r+1, gamma up to 2r+1 (the last one only for diagnostics). When
/// balancing is on, alpha_k / beta_k hold the rescaled pair
/// alpha_k / s_k, beta_k * prod_{j<=k} s_j^2 and `scales` holds s_k; the gamma
/// sequence is always the raw one.
struct CascadeCoefficients {
  int order = 0;
  std::vector<Matrix> alpha;
  std::vector<Matrix> beta;
  std::vector<Matrix> gamma;
  std::vector<double> gamma_condition_numbers;
  std::vector<double> scales;  // s_0 = 1
  bool balanced = false;

  int max_index() const { return 2 * order + 1; }
};

/// Throws GammaSingularError when cond(gamma_j) exceeds the limit for some
/// j <= 2r; gamma_{2r+1} is reported in gamma_condition_numbers only.
CascadeCoefficients compute_cascade(const OqhoModel& model, int order,
                                    const CascadeOptions& options = {});

/// S = sqrt(B Omega^T B^T) = sqrt(B B^T - i mho), Hermitian PSD.
CMatrix bob_sqrt(const OqhoModel& model);

/// Realified square root R(S); R(S)^2 = [[BB^T, mho], [-mho, BB^T]].
Matrix realified_sqrt(const OqhoModel& model);

// [[BB^T, mho], [-mho, BB^T]]
Matrix realified_bob(const OqhoModel& model);

struct TruncatedFilter {
  int nu = 0;          // 4 (r+1) n
  Matrix acal;         // block lower bidiagonal: I2 (x) A on the diagonal, I2 (x) alpha_j below
  Matrix bcal;         // [R(S); 0; ...; 0]
  Matrix rs;           // R(S)
};

TruncatedFilter assemble_filter(const OqhoModel& model, const CascadeCoefficients& coeffs);

struct WeightMatrix {
  double theta = 0.0;
  Matrix h;  // diag(h_0(theta), ..., h_r(theta))
};

/// h_k = diag(I2 (x) f_k, -bJ (x) g_k) with
/// f_k = (-4 theta^2)^k w_{2k} beta_{2k}, g_k = -2 theta (-4 theta^2)^k w_{2k+1} beta_{2k+1}.
WeightMatrix assemble_weight(const CascadeCoefficients& coeffs, const CoefficientScheme& scheme,
                             double theta);

// E(i lambda) = (i lambda I - A)^{-1}
CMatrix resolvent(const Matrix& a, double lambda);

/// Relative residual of E U E^* = V E^* V^{-1} U V^{-1} E V with V = L_A(U).
/// Throws kSingularV when V is numerically singular.
double verify_transposition(const OqhoModel& model, const Matrix& u, double lambda);

/// Relative residual of the ordered-product identity for (E mho E^*)^k,
/// k <= coeffs.max_index().
double verify_ordered_factorization(const OqhoModel& model, const CascadeCoefficients& coeffs,
                                    int k, double lambda);

/// Truncated cascade factorization of the spectral density Delta_theta:
/// S (sum_{k<=K} (-2i theta)^k w_k G_k^* beta_k G_k) S with G_k = E alpha_k ... E alpha_1 E.
CMatrix delta_cascade(const OqhoModel& model, const CascadeCoefficients& coeffs,
                      const std::vector<double>& weights, double theta, double lambda,
                      int max_term);

}  // namespace qef
