#include "qef/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qef/cascade.hpp"
#include "qef/errors.hpp"
#include "qef/parallel.hpp"

namespace qef {

namespace {

constexpr double kPi = std::numbers::pi;

int panel_points(int nodes) {
  for (int p = 16; p >= 1; --p) {
    if (nodes % p == 0) return p;
  }
  return 1;
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

// ln cosh(y) without overflow
double log_cosh(double y) {
  const double a = std::abs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double lambda_max(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(eig.eigenvalues().size() - 1);
}

// Maximizes f on [lo, hi] by golden-section search; returns the best value seen.
template <class F>
double golden_max(F&& f, double lo, double hi) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::max(f1, f2);
}

}  // namespace

void gauss_legendre(int points, Vector& abscissae, Vector& weights) {
  if (points < 1) throw Error(ErrorCode::kInvalidArgument, "Gauss-Legendre rule needs >= 1 point");
  Matrix jacobi = Matrix::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  abscissae = eig.eigenvalues();
  weights = 2.0 * eig.eigenvectors().row(0).array().square().transpose();
  // exact mirror symmetry
  for (int i = 0; i < points / 2; ++i) {
    const int j = points - 1 - i;
    const double x = 0.5 * (abscissae(j) - abscissae(i));
    const double w = 0.5 * (weights(i) + weights(j));
    abscissae(i) = -x;
    abscissae(j) = x;
    weights(i) = weights(j) = w;
  }
  if (points % 2 == 1) abscissae(points / 2) = 0.0;
}

FrequencyGrid make_grid(int nodes, double scale) {
  if (nodes < 2) throw Error(ErrorCode::kInvalidArgument, "frequency grid needs >= 2 nodes");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidArgument, "frequency grid scale must be positive");
  }
  const int points = panel_points(nodes);
  const int panels = nodes / points;
  Vector x, w;
  gauss_legendre(points, x, w);

  FrequencyGrid grid;
  grid.scale = scale;
  grid.nodes.resize(nodes);
  grid.weights.resize(nodes);
  const double width = kPi / panels;
  for (int p = 0; p < panels; ++p) {
    const double left = -0.5 * kPi + p * width;
    for (int k = 0; k < points; ++k) {
      const double u = left + 0.5 * width * (x(k) + 1.0);
      const double c = std::cos(u);
      const int i = p * points + k;
      grid.nodes(i) = scale * std::tan(u);
      grid.weights(i) = scale * 0.5 * width * w(k) / (c * c);
    }
  }
  for (int i = 0; i < nodes / 2; ++i) {
    const int j = nodes - 1 - i;
    const double lam = 0.5 * (grid.nodes(j) - grid.nodes(i));
    const double wt = 0.5 * (grid.weights(i) + grid.weights(j));
    grid.nodes(i) = -lam;
    grid.nodes(j) = lam;
    grid.weights(i) = grid.weights(j) = wt;
  }
  if (nodes % 2 == 1) grid.nodes(nodes / 2) = 0.0;
  return grid;
}

double default_grid_scale(const OqhoModel& model) {
  const double s = 10.0 * model.a().norm();
  return s > 0.0 ? s : 1.0;
}

FrequencyGrid default_grid(const OqhoModel& model, int nodes) {
  return make_grid(nodes, default_grid_scale(model));
}

SpectralSample spectral_sample(const OqhoModel& model, double lambda) {
  const CMatrix e = resolvent(model.a(), lambda);
  const CMatrix ec = e.adjoint();
  SpectralSample s;
  s.lambda = lambda;
  s.phi = hermitian_part(e * (model.b() * model.b().transpose()).cast<Complex>() * ec);
  const CMatrix psi = e * mho(model).cast<Complex>() * ec;
  s.psi = 0.5 * (psi - psi.adjoint());
  return s;
}

std::vector<SpectralSample> spectral_samples(const OqhoModel& model, const FrequencyGrid& grid) {
  require_hurwitz(model);
  std::vector<SpectralSample> out(static_cast<std::size_t>(grid.size()));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = spectral_sample(model, grid.nodes(static_cast<Eigen::Index>(i)));
  });
  return out;
}

std::vector<NodeFactors> factor_grid(const OqhoModel& model, const FrequencyGrid& grid) {
  std::vector<NodeFactors> out(static_cast<std::size_t>(grid.size()));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = factor_sample(spectral_sample(model, grid.nodes(static_cast<Eigen::Index>(i))));
  });
  return out;
}

NodeFactors factor_sample(const SpectralSample& sample) {
  const CMatrix ipsi = Complex(0.0, 1.0) * sample.psi;
  return NodeFactors{hermitian_eigen(hermitian_part(ipsi)), hermitian_sqrt(sample.phi)};
}

CMatrix tanc_form(const NodeFactors& f, double theta) {
  const CMatrix t = f.ipsi.apply([theta](double x) { return tanhc_scalar(theta * x); });
  return hermitian_part(f.sqrt_phi * t * f.sqrt_phi);
}

double log_det_integrand(const NodeFactors& f, double theta) {
  if (theta == 0.0) return 0.0;
  double cos_part = 0.0;
  for (Eigen::Index j = 0; j < f.ipsi.eigenvalues.size(); ++j) {
    cos_part += log_cosh(theta * f.ipsi.eigenvalues(j));
  }
  const Eigen::Index n = f.sqrt_phi.rows();
  const CMatrix d = CMatrix::Identity(n, n) - theta * tanc_form(f, theta);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(d, Eigen::EigenvaluesOnly);
  const Vector& values = eig.eigenvalues();
  if (!(values(0) > 0.0)) {
    std::ostringstream os;
    os << "theta = " << theta << " violates the spectral condition (min eigenvalue " << values(0)
       << ")";
    throw Error(ErrorCode::kThetaBeyondThreshold, os.str());
  }
  return cos_part + values.array().log().sum();
}

double qef_rate_direct(const OqhoModel& model, double theta, const FrequencyGrid& grid) {
  if (theta < 0.0) throw Error(ErrorCode::kInvalidArgument, "theta must be nonnegative");
  require_hurwitz(model);
  if (theta == 0.0) return 0.0;
  std::vector<double> values(static_cast<std::size_t>(grid.size()));
  parallel_for(values.size(), [&](std::size_t i) {
    const auto k = static_cast<Eigen::Index>(i);
    values[i] = grid.weights(k) *
                log_det_integrand(factor_sample(spectral_sample(model, grid.nodes(k))), theta);
  });
  double sum = 0.0;
  for (double v : values) sum += v;
  return -sum / (4.0 * kPi);
}

namespace {

struct HomotopyState {
  CMatrix u;
  double trace_integral = 0.0;
};

HomotopyState integrate_node(const SpectralSample& sample, double theta,
                             const HomotopyOptions& options) {
  if (options.steps < 1) throw Error(ErrorCode::kInvalidArgument, "homotopy needs >= 1 step");
  const CMatrix psi2 = hermitian_part(sample.psi * sample.psi);
  const double h = theta / options.steps;
  HomotopyState st{sample.phi, 0.0};
  auto rhs = [&psi2](const CMatrix& u) -> CMatrix { return psi2 + u * u; };
  for (int step = 0; step < options.steps; ++step) {
    const CMatrix& u = st.u;
    const CMatrix k1 = rhs(u);
    const CMatrix u2 = u + 0.5 * h * k1;
    const CMatrix k2 = rhs(u2);
    const CMatrix u3 = u + 0.5 * h * k2;
    const CMatrix k3 = rhs(u3);
    const CMatrix u4 = u + h * k3;
    const CMatrix k4 = rhs(u4);
    st.trace_integral +=
        h / 6.0 * (u.trace() + 2.0 * u2.trace() + 2.0 * u3.trace() + u4.trace()).real();
    st.u = hermitian_part(u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    const double norm = st.u.norm();
    if (!(norm <= options.blowup_norm)) {
      std::ostringstream os;
      os << "Riccati ODE blew up at lambda = " << sample.lambda << ", theta = " << (step + 1) * h;
      throw Error(ErrorCode::kOdeBlowup, os.str());
    }
  }
  return st;
}

}  // namespace

CMatrix homotopy_node(const SpectralSample& sample, double theta, const HomotopyOptions& options) {
  return integrate_node(sample, theta, options).u;
}

double qef_rate_homotopy(const OqhoModel& model, double theta, const FrequencyGrid& grid,
                         const HomotopyOptions& options) {
  if (theta < 0.0) throw Error(ErrorCode::kInvalidArgument, "theta must be nonnegative");
  require_hurwitz(model);
  if (theta == 0.0) return 0.0;
  std::vector<double> values(static_cast<std::size_t>(grid.size()));
  parallel_for(values.size(), [&](std::size_t i) {
    const auto k = static_cast<Eigen::Index>(i);
    values[i] = grid.weights(k) *
                integrate_node(spectral_sample(model, grid.nodes(k)), theta, options).trace_integral;
  });
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / (4.0 * kPi);
}

double threshold_margin(const std::vector<NodeFactors>& factors, double theta) {
  if (theta == 0.0) return 0.0;
  std::vector<double> values(factors.size());
  parallel_for(values.size(), [&](std::size_t i) {
    values[i] = lambda_max(tanc_form(factors[i], theta));
  });
  double best = 0.0;
  for (double v : values) best = std::max(best, v);
  return theta * best;
}

double threshold_margin_refined(const OqhoModel& model, const FrequencyGrid& grid,
                            const std::vector<NodeFactors>& factors, double theta) {
  if (theta == 0.0) return 0.0;
  std::vector<double> values(factors.size());
  parallel_for(values.size(), [&](std::size_t i) {
    values[i] = lambda_max(tanc_form(factors[i], theta));
  });
  const auto best_it = std::max_element(values.begin(), values.end());
  const auto best = static_cast<Eigen::Index>(best_it - values.begin());
  auto at = [&](double lambda) {
    return lambda_max(tanc_form(factor_sample(spectral_sample(model, lambda)), theta));
  };
  const double lo = grid.nodes(std::max<Eigen::Index>(best - 1, 0));
  const double hi = grid.nodes(std::min<Eigen::Index>(best + 1, grid.size() - 1));
  return theta * std::max(*best_it, golden_max(at, lo, hi));
}

double theta_zero(const OqhoModel& model, const FrequencyGrid& grid) {
  require_hurwitz(model);
  auto peak = [&model](double lambda) { return lambda_max(spectral_sample(model, lambda).phi); };
  std::vector<double> values(static_cast<std::size_t>(grid.size()));
  parallel_for(values.size(), [&](std::size_t i) {
    values[i] = peak(grid.nodes(static_cast<Eigen::Index>(i)));
  });
  const auto best_it = std::max_element(values.begin(), values.end());
  const auto best = static_cast<Eigen::Index>(best_it - values.begin());
  double sup = *best_it;

  const double lo = grid.nodes(std::max<Eigen::Index>(best - 1, 0));
  const double hi = grid.nodes(std::min<Eigen::Index>(best + 1, grid.size() - 1));
  sup = std::max(sup, golden_max(peak, lo, hi));
  if (!(sup > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / sup;
}

double theta_star(const OqhoModel& model, const FrequencyGrid& grid,
                  const ThresholdOptions& options) {
  require_hurwitz(model);
  const std::vector<NodeFactors> factors = factor_grid(model, grid);
  const double t0 = theta_zero(model, grid);
  if (!std::isfinite(t0)) return std::numeric_limits<double>::infinity();

  double lo = 0.0;
  double hi = 4.0 * t0;
  int expansions = 0;
  auto margin = [&](double theta) {
    return options.refine ? threshold_margin_refined(model, grid, factors, theta)
                          : threshold_margin(factors, theta);
  };
  while (margin(hi) < 1.0) {
    if (++expansions > options.max_expansions) return std::numeric_limits<double>::infinity();
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > options.tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (margin(mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

CMatrix delta_spectral(const OqhoModel& model, double theta, double lambda) {
  const CMatrix e = resolvent(model.a(), lambda);
  const SpectralSample sample = spectral_sample(model, lambda);
  const CMatrix arg = hermitian_part(Complex(0.0, 2.0 * theta) * sample.psi);
  const CMatrix weight = hermitian_matfun(arg, [](double u) { return Complex(phi_scalar(u)); });
  const CMatrix s = bob_sqrt(model);
  return hermitian_part(s * e.adjoint() * weight * e * s);
}

}  // namespace qef
