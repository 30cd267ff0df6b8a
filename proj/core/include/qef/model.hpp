#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "qef/linalg.hpp"

namespace qef {

/// Open quantum harmonic oscillator
///
///     dX = A X dt + B dW,   dY = C X dt + dW,   [X, X^T] = 2i Theta,
///
/// driven by m vacuum field channels with Ito matrix I_m + iJ,
/// J = [[0, 1], [-1, 0]] (x) I_{m/2}.
///
/// Construction checks shapes, parity of n and m and antisymmetry of Theta.
/// Stability, physical realizability and the rank conditions on B are
/// reported by validate() rather than enforced, because user-supplied
/// matrices are often rounded.
class OqhoModel {
 public:
  OqhoModel(Matrix theta, Matrix a, Matrix b, std::optional<Matrix> c = std::nullopt,
            std::optional<Matrix> energy = std::nullopt,
            std::optional<Matrix> coupling = std::nullopt);

  int n() const { return static_cast<int>(theta_.rows()); }
  int m() const { return static_cast<int>(b_.cols()); }

  const Matrix& theta() const { return theta_; }
  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const std::optional<Matrix>& c() const { return c_; }
  const std::optional<Matrix>& energy() const { return energy_; }
  const std::optional<Matrix>& coupling() const { return coupling_; }

  // J for this model's field dimension.
  Matrix field_j() const;

 private:
  Matrix theta_;
  Matrix a_;
  Matrix b_;
  std::optional<Matrix> c_;
  std::optional<Matrix> energy_;
  std::optional<Matrix> coupling_;
};

// bJ (x) I_{m/2}
Matrix field_commutation_matrix(int m);

struct ModelDiagnostics {
  double pr1_residual = 0.0;                // ||A Theta + Theta A^T + B J B^T||_F
  std::optional<double> pr2_residual;       // ||Theta C^T + B J||_F, when C is present
  double spectral_abscissa = 0.0;
  double mho_condition = 0.0;
  double bbt_min_eigenvalue = 0.0;
  double pr_scale = 1.0;                    // 1 + ||A||_F ||Theta||_F

  double pr1_relative() const { return pr1_residual / pr_scale; }
  double pr2_relative() const { return pr2_residual.value_or(0.0) / pr_scale; }
  bool hurwitz() const { return spectral_abscissa < -kHurwitzMargin; }
};

/// A = 2 Theta (R + M^T J M), B = 2 Theta M^T, C = 2 J M.
OqhoModel build_from_energy(const Matrix& theta, const Matrix& energy, const Matrix& coupling);

ModelDiagnostics validate(const OqhoModel& model);

// B J B^T, antisymmetrized.
Matrix mho(const OqhoModel& model);

/// X -> sigma X. Throws kSingularTransform when sigma is (numerically) singular.
OqhoModel coordinate_transform(const OqhoModel& model, const Matrix& sigma);

/// Controllability Gramian L_A(B B^T).
Matrix gramian(const OqhoModel& model);

struct KernelPair {
  Matrix covariance;   // P(tau)
  Matrix commutator;   // Lambda(tau)
};

/// Real covariance and commutator kernels of the invariant Gaussian state at lag tau.
KernelPair two_point_kernels(const OqhoModel& model, double tau);

struct RandomModelOptions {
  bool conjugate_theta = false;  // apply a random well-conditioned sigma to the canonical form
  int max_attempts = 2000;
};

/// Random physically realizable model with spectral abscissa <= -stability_margin
/// and nonsingular mho. Deterministic in `seed`. Throws kGenerationFailure.
OqhoModel random_pr_model(int n, int m, std::uint64_t seed, double stability_margin,
                          const RandomModelOptions& options = {});

// Throws kNotHurwitz if A is not Hurwitz.
void require_hurwitz(const OqhoModel& model);

}  // namespace qef
