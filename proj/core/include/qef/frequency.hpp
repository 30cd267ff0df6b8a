#pragma once

#include <vector>

#include "qef/linalg.hpp"
#include "qef/model.hpp"

namespace qef {

/// Quadrature for integrals over the real frequency axis.
///
/// lambda = c tan(u) maps (-pi/2, pi/2) onto the line; u is covered by equal
/// panels of Gauss-Legendre points (16 per panel when the node count allows),
/// and weights carry the Jacobian c sec^2(u).
struct FrequencyGrid {
  Vector nodes;    // ascending, symmetric about 0
  Vector weights;  // positive
  double scale = 1.0;

  Eigen::Index size() const { return nodes.size(); }
};

FrequencyGrid make_grid(int nodes, double scale);

// c = 10 ||A||_F
double default_grid_scale(const OqhoModel& model);
FrequencyGrid default_grid(const OqhoModel& model, int nodes = 2048);

// Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
void gauss_legendre(int points, Vector& abscissae, Vector& weights);

struct SpectralSample {
  double lambda = 0.0;
  CMatrix phi;  // E B B^T E^*
  CMatrix psi;  // E mho E^*, skew-Hermitian
};

SpectralSample spectral_sample(const OqhoModel& model, double lambda);
std::vector<SpectralSample> spectral_samples(const OqhoModel& model, const FrequencyGrid& grid);

/// Node-wise data reused across theta: eigen-decomposition of the Hermitian
/// matrix i Psi and the square root of Phi.
struct NodeFactors {
  SpectralDecomposition ipsi;
  CMatrix sqrt_phi;
};

NodeFactors factor_sample(const SpectralSample& sample);
std::vector<NodeFactors> factor_grid(const OqhoModel& model, const FrequencyGrid& grid);

// sqrt(Phi) tanhc(theta i Psi) sqrt(Phi), the symmetrized form of Phi tanc(theta Psi).
CMatrix tanc_form(const NodeFactors& f, double theta);

/// Integrand of the log-determinant rate at one node:
/// ln det cos(theta Psi) + ln det(I - theta sqrt(Phi) tanc(theta Psi) sqrt(Phi)).
/// Since i Psi is Hermitian, cos(theta Psi) = cosh(theta i Psi) and tanc(theta Psi) =
/// tanhc(theta i Psi) have no poles. Throws kThetaBeyondThreshold when the second
/// matrix is not positive definite.
double log_det_integrand(const NodeFactors& f, double theta);

/// Upsilon(theta) = -(1/4 pi) integral of log_det_integrand.
double qef_rate_direct(const OqhoModel& model, double theta, const FrequencyGrid& grid);

struct HomotopyOptions {
  int steps = 200;           // RK4 steps in theta
  double blowup_norm = 1e12; // ||U||_F limit, kOdeBlowup beyond
};

/// Integrates U' = Psi^2 + U^2, U(0) = Phi at every node by RK4 in theta and
/// returns (1/4 pi) integral over [0, theta] of the weighted sum of Tr U.
double qef_rate_homotopy(const OqhoModel& model, double theta, const FrequencyGrid& grid,
                         const HomotopyOptions& options = {});

// RK4 solution U(theta) at one node.
CMatrix homotopy_node(const SpectralSample& sample, double theta, const HomotopyOptions& options = {});

// sup over the grid of lambda_max(theta sqrt(Phi) tanhc(theta i Psi) sqrt(Phi))
double threshold_margin(const std::vector<NodeFactors>& factors, double theta);

// As threshold_margin, with the sup refined by golden-section search between the
// neighbours of the best node. `factors` must belong to `grid`.
double threshold_margin_refined(const OqhoModel& model, const FrequencyGrid& grid,
                            const std::vector<NodeFactors>& factors, double theta);

struct ThresholdOptions {
  double tolerance = 1e-12;  // relative bisection tolerance
  int max_expansions = 60;
  bool refine = true;         // refine the sup between grid nodes
};

/// Quantum threshold theta_*: root of the threshold margin = 1 by bisection.
/// The margin is nondecreasing in theta (each eigenvalue tanh(theta x)/x is), so
/// bisection on [0, 4 theta_0] (expanded geometrically when needed) is safe.
/// Returns +inf when the margin stays below 1.
double theta_star(const OqhoModel& model, const FrequencyGrid& grid,
                  const ThresholdOptions& options = {});

/// Classical threshold theta_0 = 1 / sup lambda_max(Phi), the grid sup refined by
/// golden-section search between the neighbours of the best node.
double theta_zero(const OqhoModel& model, const FrequencyGrid& grid);

/// Delta_theta(lambda) = S E^* phi(2 theta i Psi) E S.
CMatrix delta_spectral(const OqhoModel& model, double theta, double lambda);

}  // namespace qef
