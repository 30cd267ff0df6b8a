#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qef/cascade.hpp"
#include "qef/errors.hpp"
#include "qef/frequency.hpp"
#include "qef/linalg.hpp"
#include "qef/model.hpp"

namespace qef {

struct RateOptions {
  CascadeOptions cascade;
  AreOptions are;
};

struct RateResult {
  double theta = 0.0;
  int order = 0;
  SchemeKind scheme = SchemeKind::kTaylor;
  double rate = 0.0;
  int newton_iterations = 0;
  double are_residual = 0.0;
  double closed_loop_abscissa = 0.0;
  bool valid = false;
  // Set on sweep points whose computation failed; rate is NaN then.
  std::optional<ErrorCode> error;
  std::string message;
};

/// Everything the truncated ARE needs at one (theta, r, scheme).
struct TruncatedProblem {
  CascadeCoefficients coeffs;
  CoefficientScheme scheme;
  TruncatedFilter filter;
  WeightMatrix weight;
};

TruncatedProblem prepare_truncated(const OqhoModel& model, double theta, int order,
                                   SchemeKind scheme, const CascadeOptions& options = {});

/// Solves Acal^T a + a Acal + theta H + a Bcal Bcal^T a = 0 for the stabilizing a.
/// `initial` (if nonempty) seeds Newton-Kleinman and must itself be stabilizing.
AreSolution solve_truncated_are(const TruncatedProblem& problem, const AreOptions& options = {},
                                const Matrix& initial = Matrix());

// 1/4 Tr(R(B Omega^T B^T) a_11), with a_11 the leading 2n x 2n block.
double rate_from_solution(const TruncatedFilter& filter, const Matrix& a);

/// Truncated QEF growth rate Upsilon_r(theta). Throws GammaSingularError and
/// kStabilizingSolutionLost (theta too large for this truncation).
RateResult qef_rate_ss(const OqhoModel& model, double theta, int order,
                       SchemeKind scheme = SchemeKind::kTaylor, const RateOptions& options = {});

/// Upsilon_0 assembled from Acal_0 = [[I2 (x) A, 0], [I2 (x) Theta, I2 (x) A]]
/// and h_0 = diag(I_2n, theta bJ (x) Theta^{-1} mho Theta^{-1}) without the cascade.
RateResult qef_rate_zeroth(const OqhoModel& model, double theta, const AreOptions& options = {});

struct Spec2Check {
  double margin = 0.0;  // theta * sup_lambda lambda_max(f_r^* H f_r) over the grid
  bool pass = true;     // margin < 1
};

Spec2Check check_spec2(const OqhoModel& model, double theta, int order, SchemeKind scheme,
                       const FrequencyGrid& grid);

// Pi_{theta,r}(lambda) = f_r(i lambda)^* H f_r(i lambda), f_r = (i lambda - Acal)^{-1} Bcal.
CMatrix pi_truncated(const TruncatedFilter& filter, const WeightMatrix& weight, double lambda);

/// Covariance L_{Acal}(Bcal Bcal^T) of the filter state. Throws kNotHurwitz.
Matrix invariant_covariance(const TruncatedFilter& filter);

/// One result per theta; failures are recorded in the result, not thrown.
/// Each Newton solve is seeded with the previous point's solution when that is
/// still stabilizing.
std::vector<RateResult> rate_sweep(const OqhoModel& model, const std::vector<double>& thetas,
                                   int order, SchemeKind scheme, const RateOptions& options = {});

// Header plus one row per result:
// theta,r,method,scheme,rate,valid,are_residual,closed_loop_abscissa,newton_iterations
void write_rate_csv(std::ostream& out, const std::vector<RateResult>& results,
                    bool header = true);

}  // namespace qef
