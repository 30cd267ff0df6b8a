#include "qef/statespace_rate.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "qef/model_io.hpp"
#include "qef/parallel.hpp"

namespace qef {

namespace {

Matrix filter_sigma(const TruncatedFilter& filter) {
  Matrix sigma = filter.bcal * filter.bcal.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

RateResult package(double theta, int order, SchemeKind scheme, const TruncatedFilter& filter,
                   const AreSolution& sol) {
  RateResult r;
  r.theta = theta;
  r.order = order;
  r.scheme = scheme;
  r.rate = rate_from_solution(filter, sol.a);
  r.newton_iterations = sol.iterations;
  r.are_residual = sol.residual;
  r.closed_loop_abscissa = sol.closed_loop_abscissa;
  r.valid = sol.closed_loop_abscissa < 0.0;
  return r;
}

bool retryable(const Error& e) {
  return e.code() == ErrorCode::kStabilizingSolutionLost || e.code() == ErrorCode::kNoConvergence;
}

// Newton-Kleinman from a = 0; if that leaves the stabilizing set, walk theta
// up from 0 and seed each solve with the previous solution.
AreSolution solve_with_continuation(const CascadeCoefficients& coeffs,
                                    const CoefficientScheme& scheme, const TruncatedFilter& filter,
                                    const Matrix& sigma, double theta, const AreOptions& options) {
  auto solve_at = [&](double t, const Matrix& initial) {
    const Matrix q = t * assemble_weight(coeffs, scheme, t).h;
    return solve_are_stabilizing(filter.acal, sigma, q, options, initial);
  };
  try {
    return solve_at(theta, Matrix());
  } catch (const Error& e) {
    if (!retryable(e) || theta == 0.0) throw;
  }
  Matrix a = Matrix::Zero(filter.nu, filter.nu);
  double reached = 0.0;
  double step = theta / 8.0;
  AreSolution sol;
  while (reached < theta) {
    const double t = std::min(theta, reached + step);
    try {
      sol = solve_at(t, a);
      a = sol.a;
      reached = t;
      step *= 1.5;
    } catch (const Error& e) {
      if (!retryable(e)) throw;
      step *= 0.5;
      if (step < 1e-9 * theta) {
        std::ostringstream os;
        os << "no stabilizing solution found beyond theta = " << reached << " (target " << theta
           << ")";
        throw Error(ErrorCode::kStabilizingSolutionLost, os.str());
      }
    }
  }
  return sol;
}

}  // namespace

TruncatedProblem prepare_truncated(const OqhoModel& model, double theta, int order,
                                   SchemeKind scheme, const CascadeOptions& options) {
  if (!(theta >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "theta must be nonnegative");
  TruncatedProblem p;
  p.coeffs = compute_cascade(model, order, options);
  p.scheme = scheme_weights(scheme, order);
  p.filter = assemble_filter(model, p.coeffs);
  p.weight = assemble_weight(p.coeffs, p.scheme, theta);
  return p;
}

AreSolution solve_truncated_are(const TruncatedProblem& problem, const AreOptions& options,
                                const Matrix& initial) {
  const Matrix q = problem.weight.theta * problem.weight.h;
  return solve_are_stabilizing(problem.filter.acal, filter_sigma(problem.filter), q, options,
                               initial);
}

double rate_from_solution(const TruncatedFilter& filter, const Matrix& a) {
  const Eigen::Index block = filter.rs.rows();
  const Matrix bob = filter.rs * filter.rs;
  return 0.25 * (bob.cwiseProduct(a.topLeftCorner(block, block).transpose())).sum();
}

RateResult qef_rate_ss(const OqhoModel& model, double theta, int order, SchemeKind scheme,
                       const RateOptions& options) {
  const TruncatedProblem p = prepare_truncated(model, theta, order, scheme, options.cascade);
  const AreSolution sol = solve_with_continuation(p.coeffs, p.scheme, p.filter,
                                                  filter_sigma(p.filter), theta, options.are);
  return package(theta, order, scheme, p.filter, sol);
}

RateResult qef_rate_zeroth(const OqhoModel& model, double theta, const AreOptions& options) {
  if (!(theta >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "theta must be nonnegative");
  require_hurwitz(model);
  const int n = model.n();
  const Matrix i2 = Matrix::Identity(2, 2);
  const Matrix& th = model.theta();

  TruncatedFilter f;
  f.nu = 4 * n;
  f.acal = Matrix::Zero(4 * n, 4 * n);
  f.acal.topLeftCorner(2 * n, 2 * n) = kron(i2, model.a());
  f.acal.bottomRightCorner(2 * n, 2 * n) = kron(i2, model.a());
  f.acal.bottomLeftCorner(2 * n, 2 * n) = kron(i2, th);
  f.rs = realified_sqrt(model);
  f.bcal = Matrix::Zero(4 * n, 2 * n);
  f.bcal.topRows(2 * n) = f.rs;

  const Matrix beta1 = inverse_sandwich(th, mho(model));
  Matrix h = Matrix::Zero(4 * n, 4 * n);
  h.topLeftCorner(2 * n, 2 * n) = Matrix::Identity(2 * n, 2 * n);
  h.bottomRightCorner(2 * n, 2 * n) = theta * kron(symplectic_unit(), beta1);
  h = 0.5 * (h + h.transpose()).eval();

  const AreSolution sol =
      solve_are_stabilizing(f.acal, filter_sigma(f), theta * h, options);
  return package(theta, 0, SchemeKind::kTaylor, f, sol);
}

CMatrix pi_truncated(const TruncatedFilter& filter, const WeightMatrix& weight, double lambda) {
  CMatrix m = -filter.acal.cast<Complex>();
  m.diagonal().array() += Complex(0.0, lambda);
  const CMatrix f = m.partialPivLu().solve(filter.bcal.cast<Complex>());
  const CMatrix pi = f.adjoint() * weight.h.cast<Complex>() * f;
  return 0.5 * (pi + pi.adjoint());
}

Spec2Check check_spec2(const OqhoModel& model, double theta, int order, SchemeKind scheme,
                       const FrequencyGrid& grid) {
  Spec2Check out;
  if (theta == 0.0) return out;
  const TruncatedProblem p = prepare_truncated(model, theta, order, scheme);
  std::vector<double> values(static_cast<std::size_t>(grid.size()));
  parallel_for(values.size(), [&](std::size_t i) {
    const CMatrix pi = pi_truncated(p.filter, p.weight, grid.nodes(static_cast<Eigen::Index>(i)));
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(pi, Eigen::EigenvaluesOnly);
    values[i] = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  });
  double best = -std::numeric_limits<double>::infinity();
  for (double v : values) best = std::max(best, v);
  out.margin = theta * best;
  out.pass = out.margin < 1.0;
  return out;
}

Matrix invariant_covariance(const TruncatedFilter& filter) {
  Matrix p = solve_lyapunov(filter.acal, filter_sigma(filter));
  return 0.5 * (p + p.transpose());
}

std::vector<RateResult> rate_sweep(const OqhoModel& model, const std::vector<double>& thetas,
                                   int order, SchemeKind scheme, const RateOptions& options) {
  std::vector<RateResult> out;
  out.reserve(thetas.size());
  auto failed = [&](double theta, const Error& e) {
    RateResult r;
    r.theta = theta;
    r.order = order;
    r.scheme = scheme;
    r.rate = std::numeric_limits<double>::quiet_NaN();
    r.valid = false;
    r.error = e.code();
    r.message = e.what();
    return r;
  };

  CascadeCoefficients coeffs;
  try {
    coeffs = compute_cascade(model, order, options.cascade);
  } catch (const Error& e) {
    for (double theta : thetas) out.push_back(failed(theta, e));
    return out;
  }
  const CoefficientScheme weights = scheme_weights(scheme, order);
  const TruncatedFilter filter = assemble_filter(model, coeffs);
  const Matrix sigma = filter_sigma(filter);

  Matrix warm;
  for (double theta : thetas) {
    try {
      if (!(theta >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "theta must be nonnegative");
      const WeightMatrix w = assemble_weight(coeffs, weights, theta);
      const Matrix q = theta * w.h;
      AreSolution sol;
      bool solved = false;
      if (warm.size() != 0 && is_hurwitz(filter.acal + sigma * warm)) {
        try {
          sol = solve_are_stabilizing(filter.acal, sigma, q, options.are, warm);
          solved = true;
        } catch (const Error& e) {
          if (!retryable(e)) throw;
        }
      }
      if (!solved) sol = solve_with_continuation(coeffs, weights, filter, sigma, theta, options.are);
      out.push_back(package(theta, order, scheme, filter, sol));
      warm = sol.a;
    } catch (const Error& e) {
      out.push_back(failed(theta, e));
      warm.resize(0, 0);
    }
  }
  return out;
}

void write_rate_csv(std::ostream& out, const std::vector<RateResult>& results, bool header) {
  if (header) {
    out << "theta,r,method,scheme,rate,valid,are_residual,closed_loop_abscissa,newton_iterations\n";
  }
  for (const RateResult& r : results) {
    out << format_number(r.theta) << ',' << r.order << ",statespace," << to_string(r.scheme) << ','
        << format_number(r.rate) << ',' << (r.valid ? "true" : "false") << ','
        << format_number(r.are_residual) << ',' << format_number(r.closed_loop_abscissa) << ','
        << r.newton_iterations << '\n';
  }
}

}  // namespace qef
