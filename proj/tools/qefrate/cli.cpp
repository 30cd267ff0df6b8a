#include "qefrate/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qef/cascade.hpp"
#include "qef/errors.hpp"
#include "qef/frequency.hpp"
#include "qef/model.hpp"
#include "qef/model_io.hpp"
#include "qef/statespace_rate.hpp"

namespace qefrate {

namespace {

using nlohmann::ordered_json;

constexpr double kPrWarn = 1e-8;
constexpr double kPrFail = 1e-2;
constexpr int kMaxOrder = 16;

struct Config {
  std::string model_path;
  std::optional<double> theta;
  std::vector<double> thetas;
  std::vector<double> linspace;
  int order = 3;
  std::string scheme = "taylor";
  int nodes = 2048;
  double scale = 0.0;  // 0 selects 10 ||A||_F
  std::string method = "direct";
  int steps = 200;
  std::string output;
  std::string format = "csv";
  bool dump_model = false;
  bool no_reference = false;
};

// Rows of already formatted cells; the first row is the header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string num(double v) { return qef::format_number(v); }

ordered_json cell_json(const std::string& cell) {
  if (cell.empty() || cell == "nan") return nullptr;
  if (cell == "true") return true;
  if (cell == "false") return false;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != nullptr && *end == '\0' && std::isfinite(v)) {
    if (cell.find_first_of(".eE") == std::string::npos) return std::stoll(cell);
    return v;
  }
  return cell;
}

void emit_table(const Table& t, const std::string& format, std::ostream& os) {
  if (format == "json") {
    ordered_json rows = ordered_json::array();
    for (const auto& row : t.rows) {
      ordered_json obj = ordered_json::object();
      for (std::size_t i = 0; i < t.header.size(); ++i) obj[t.header[i]] = cell_json(row[i]);
      rows.push_back(std::move(obj));
    }
    os << rows.dump(2) << '\n';
    return;
  }
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

// quantity,value pairs; JSON renders them as one object
void emit_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                const std::string& format, std::ostream& os) {
  if (format == "json") {
    ordered_json obj = ordered_json::object();
    for (const auto& [k, v] : pairs) obj[k] = cell_json(v);
    os << obj.dump(2) << '\n';
    return;
  }
  os << "quantity,value\n";
  for (const auto& [k, v] : pairs) os << k << ',' << v << '\n';
}

int exit_code_for(qef::ErrorCode code) {
  switch (code) {
    case qef::ErrorCode::kParseError:
      return kParse;
    case qef::ErrorCode::kValidationError:
    case qef::ErrorCode::kNotHurwitz:
    case qef::ErrorCode::kNotPsd:
      return kValidation;
    case qef::ErrorCode::kGammaSingular:
      return kGammaSingular;
    case qef::ErrorCode::kStabilizingSolutionLost:
      return kStabilizingLost;
    case qef::ErrorCode::kThetaBeyondThreshold:
    case qef::ErrorCode::kOdeBlowup:
      return kThetaThreshold;
    default:
      return kFailure;
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

[[noreturn]] void validation_fail(const std::string& what) {
  throw qef::Error(qef::ErrorCode::kValidationError, what);
}

qef::ModelDiagnostics screen(const qef::OqhoModel& model, std::ostream& err, bool enforce) {
  const qef::ModelDiagnostics d = qef::validate(model);
  const double pr = std::max(d.pr1_relative(), d.pr2_relative());
  if (pr > kPrWarn && pr <= kPrFail) {
    err << "warning: code=pr_residual relative=" << num(pr)
        << " message=physical realizability holds only approximately\n";
  }
  if (!enforce) return d;
  if (pr > kPrFail) validation_fail("PR residual " + num(pr) + " exceeds " + num(kPrFail));
  if (!d.hurwitz()) validation_fail("A is not Hurwitz (spectral abscissa " + num(d.spectral_abscissa) + ")");
  if (!(d.mho_condition < 1e12)) validation_fail("B J B^T is singular");
  if (!(d.bbt_min_eigenvalue > 0.0)) validation_fail("B B^T is not positive definite");
  return d;
}

std::vector<double> theta_list(const Config& cfg, bool allow_single) {
  const int given = (cfg.theta ? 1 : 0) + (cfg.thetas.empty() ? 0 : 1) + (cfg.linspace.empty() ? 0 : 1);
  if (given != 1) {
    throw qef::Error(qef::ErrorCode::kInvalidArgument,
                     allow_single ? "give exactly one of --theta, --thetas, --linspace"
                                  : "give exactly one of --thetas, --linspace");
  }
  std::vector<double> out;
  if (cfg.theta) {
    if (!allow_single) throw qef::Error(qef::ErrorCode::kInvalidArgument, "use --thetas or --linspace");
    out.push_back(*cfg.theta);
  } else if (!cfg.thetas.empty()) {
    out = cfg.thetas;
  } else {
    const double lo = cfg.linspace[0];
    const double hi = cfg.linspace[1];
    const double count = cfg.linspace[2];
    if (!(count >= 1.0) || count != std::floor(count)) {
      throw qef::Error(qef::ErrorCode::kInvalidArgument, "--linspace count must be a positive integer");
    }
    const int k = static_cast<int>(count);
    for (int i = 0; i < k; ++i) out.push_back(k == 1 ? lo : lo + (hi - lo) * i / (k - 1));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] >= 0.0) || !std::isfinite(out[i])) {
      throw qef::Error(qef::ErrorCode::kInvalidArgument, "theta values must be finite and >= 0");
    }
    if (i > 0 && out[i] < out[i - 1]) {
      throw qef::Error(qef::ErrorCode::kInvalidArgument, "theta values must be ascending");
    }
  }
  return out;
}

qef::FrequencyGrid grid_for(const Config& cfg, const qef::OqhoModel& model) {
  const double scale = cfg.scale > 0.0 ? cfg.scale : qef::default_grid_scale(model);
  return qef::make_grid(cfg.nodes, scale);
}

std::vector<std::string> rate_row(const qef::RateResult& r) {
  return {num(r.theta),
          std::to_string(r.order),
          "statespace",
          std::string(qef::to_string(r.scheme)),
          num(r.rate),
          r.valid ? "true" : "false",
          r.error ? "" : num(r.are_residual),
          r.error ? "" : num(r.closed_loop_abscissa),
          r.error ? "" : std::to_string(r.newton_iterations)};
}

const std::vector<std::string> kRateHeader = {
    "theta", "r", "method", "scheme", "rate", "valid", "are_residual", "closed_loop_abscissa",
    "newton_iterations"};

double fd_rate(const Config& cfg, const qef::OqhoModel& model, const qef::FrequencyGrid& grid,
               double theta) {
  if (cfg.method == "homotopy") {
    qef::HomotopyOptions opts;
    opts.steps = cfg.steps;
    return qef::qef_rate_homotopy(model, theta, grid, opts);
  }
  return qef::qef_rate_direct(model, theta, grid);
}

int cmd_validate(const Config& cfg, const qef::OqhoModel& model, std::ostream& os, std::ostream& err) {
  const qef::ModelDiagnostics d = qef::validate(model);
  std::vector<std::pair<std::string, std::string>> p;
  p.emplace_back("n", std::to_string(model.n()));
  p.emplace_back("m", std::to_string(model.m()));
  p.emplace_back("pr1_residual", num(d.pr1_residual));
  p.emplace_back("pr1_relative", num(d.pr1_relative()));
  if (d.pr2_residual) {
    p.emplace_back("pr2_residual", num(*d.pr2_residual));
    p.emplace_back("pr2_relative", num(d.pr2_relative()));
  }
  p.emplace_back("spectral_abscissa", num(d.spectral_abscissa));
  Eigen::EigenSolver<qef::Matrix> es(model.a(), false);
  std::vector<qef::Complex> eig(es.eigenvalues().data(), es.eigenvalues().data() + model.n());
  std::sort(eig.begin(), eig.end(), [](const qef::Complex& a, const qef::Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  for (std::size_t i = 0; i < eig.size(); ++i) {
    p.emplace_back("eigenvalue_" + std::to_string(i) + "_re", num(eig[i].real()));
    p.emplace_back("eigenvalue_" + std::to_string(i) + "_im", num(eig[i].imag()));
  }
  p.emplace_back("mho_condition", num(d.mho_condition));
  p.emplace_back("bbt_min_eigenvalue", num(d.bbt_min_eigenvalue));

  std::string status = "ok";
  int code = kOk;
  try {
    screen(model, err, true);
  } catch (const qef::Error& e) {
    status = "invalid";
    code = kValidation;
    err << "error: code=" << qef::to_string(e.code()) << " exit=" << code
        << " message=" << one_line(e.what()) << '\n';
  }
  p.emplace_back("status", status);
  emit_pairs(p, cfg.format, os);
  return code;
}

int cmd_thresholds(const Config& cfg, const qef::OqhoModel& model, std::ostream& os, std::ostream& err) {
  screen(model, err, true);
  const qef::FrequencyGrid grid = grid_for(cfg, model);
  const double ts = qef::theta_star(model, grid);
  const double t0 = qef::theta_zero(model, grid);
  emit_pairs({{"theta_star", num(ts)},
              {"theta_zero", num(t0)},
              {"nodes", std::to_string(grid.size())},
              {"scale", num(grid.scale)}},
             cfg.format, os);
  return kOk;
}

int cmd_rate(const Config& cfg, const qef::OqhoModel& model, std::ostream& os, std::ostream& err) {
  screen(model, err, true);
  const std::vector<double> thetas = theta_list(cfg, true);
  const qef::SchemeKind scheme = qef::parse_scheme(cfg.scheme);
  Table t{kRateHeader, {}};
  std::optional<qef::Error> first;
  for (double theta : thetas) {
    for (int r = 0; r <= cfg.order; ++r) {
      try {
        t.rows.push_back(rate_row(qef::qef_rate_ss(model, theta, r, scheme)));
      } catch (const qef::Error& e) {
        if (!first) first = e;
        qef::RateResult failed;
        failed.theta = theta;
        failed.order = r;
        failed.scheme = scheme;
        failed.rate = std::numeric_limits<double>::quiet_NaN();
        failed.error = e.code();
        t.rows.push_back(rate_row(failed));
      }
    }
  }
  emit_table(t, cfg.format, os);
  if (first) throw *first;
  return kOk;
}

int cmd_rate_fd(const Config& cfg, const qef::OqhoModel& model, std::ostream& os, std::ostream& err) {
  screen(model, err, true);
  const std::vector<double> thetas = theta_list(cfg, true);
  const qef::FrequencyGrid grid = grid_for(cfg, model);
  Table t{{"theta", "method", "rate", "nodes"}, {}};
  try {
    for (double theta : thetas) {
      t.rows.push_back({num(theta), cfg.method, num(fd_rate(cfg, model, grid, theta)),
                        std::to_string(grid.size())});
    }
  } catch (...) {
    emit_table(t, cfg.format, os);
    throw;
  }
  emit_table(t, cfg.format, os);
  return kOk;
}

int cmd_sweep(const Config& cfg, const qef::OqhoModel& model, std::ostream& os, std::ostream& err) {
  screen(model, err, true);
  const std::vector<double> thetas = theta_list(cfg, false);
  const qef::SchemeKind scheme = qef::parse_scheme(cfg.scheme);
  Table t{kRateHeader, {}};
  std::vector<std::vector<qef::RateResult>> ladders;
  for (int r = 0; r <= cfg.order; ++r) ladders.push_back(qef::rate_sweep(model, thetas, r, scheme));
  std::vector<std::vector<std::string>> reference;
  if (!cfg.no_reference) {
    const qef::FrequencyGrid grid = grid_for(cfg, model);
    for (double theta : thetas) {
      std::string value = "nan";
      std::string valid = "false";
      try {
        value = num(fd_rate(cfg, model, grid, theta));
        valid = "true";
      } catch (const qef::Error& e) {
        err << "warning: code=" << qef::to_string(e.code()) << " theta=" << num(theta)
            << " message=" << one_line(e.what()) << '\n';
      }
      reference.push_back({num(theta), "", cfg.method, "", value, valid, "", "", ""});
    }
  }
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    for (const auto& ladder : ladders) t.rows.push_back(rate_row(ladder[i]));
    if (!reference.empty()) t.rows.push_back(reference[i]);
  }
  emit_table(t, cfg.format, os);
  return kOk;
}

ordered_json matrix_json(const qef::Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(cell_json(num(m(i, k))));
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_coeffs(const Config& cfg, const qef::OqhoModel& model, std::ostream& os, std::ostream& err) {
  if (cfg.dump_model) {
    os << qef::model_to_json(model) << '\n';
    return kOk;
  }
  screen(model, err, true);
  const qef::CascadeCoefficients c = qef::compute_cascade(model, cfg.order);
  const qef::CoefficientScheme s = qef::scheme_weights(qef::parse_scheme(cfg.scheme), cfg.order);
  ordered_json doc = ordered_json::object();
  doc["order"] = c.order;
  doc["scheme"] = std::string(qef::to_string(s.kind));
  doc["balanced"] = c.balanced;
  ordered_json w = ordered_json::array();
  for (double v : s.weights) w.push_back(cell_json(num(v)));
  doc["weights"] = w;
  ordered_json psi = ordered_json::array();
  for (double v : qef::psi_coeffs(c.max_index())) psi.push_back(cell_json(num(v)));
  doc["psi"] = psi;
  ordered_json scales = ordered_json::array();
  for (double v : c.scales) scales.push_back(cell_json(num(v)));
  doc["scales"] = scales;
  ordered_json conds = ordered_json::array();
  for (double v : c.gamma_condition_numbers) conds.push_back(cell_json(num(v)));
  doc["gamma_condition_numbers"] = conds;
  ordered_json alpha = ordered_json::array(), beta = ordered_json::array(), gamma = ordered_json::array();
  for (int k = 0; k <= c.max_index(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    alpha.push_back(matrix_json(c.alpha[uk]));
    beta.push_back(matrix_json(c.beta[uk]));
    gamma.push_back(matrix_json(c.gamma[uk]));
  }
  doc["alpha"] = alpha;
  doc["beta"] = beta;
  doc["gamma"] = gamma;
  os << doc.dump(2) << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Growth rates of quadratic-exponential functionals for open quantum harmonic oscillators",
               "qefrate"};
  app.require_subcommand(1);
  Config cfg;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "model JSON file")->required();
    sub->add_option("--output,-o", cfg.output, "write results to this file instead of stdout");
    sub->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_theta = [&cfg](CLI::App* sub, bool single) {
    if (single) sub->add_option("--theta", cfg.theta, "risk sensitivity parameter");
    sub->add_option("--thetas", cfg.thetas, "ascending theta values")->delimiter(',');
    sub->add_option("--linspace", cfg.linspace, "LO HI COUNT evenly spaced thetas")->expected(3);
  };
  auto add_order = [&cfg](CLI::App* sub) {
    sub->add_option("--order,-r", cfg.order, "truncation order r")->check(CLI::Range(0, kMaxOrder));
    sub->add_option("--scheme", cfg.scheme, "taylor or sqrtpoly")
        ->check(CLI::IsMember({"taylor", "sqrtpoly"}));
  };
  auto add_grid = [&cfg](CLI::App* sub) {
    sub->add_option("--nodes", cfg.nodes, "frequency grid nodes")->check(CLI::Range(2, 1 << 22));
    sub->add_option("--scale", cfg.scale, "frequency compactification scale (default 10 ||A||_F)")
        ->check(CLI::PositiveNumber);
  };
  auto add_method = [&cfg](CLI::App* sub) {
    sub->add_option("--method", cfg.method, "direct or homotopy")
        ->check(CLI::IsMember({"direct", "homotopy"}));
    sub->add_option("--steps", cfg.steps, "RK4 steps for the homotopy method")->check(CLI::Range(1, 1000000));
  };

  CLI::App* validate = app.add_subcommand("validate", "print model diagnostics");
  add_common(validate);
  CLI::App* thresholds = app.add_subcommand("thresholds", "quantum and classical risk-sensitivity thresholds");
  add_common(thresholds);
  add_grid(thresholds);
  CLI::App* rate = app.add_subcommand("rate", "state-space rate ladder for r' = 0..r");
  add_common(rate);
  add_theta(rate, true);
  add_order(rate);
  CLI::App* rate_fd = app.add_subcommand("rate-fd", "frequency-domain rate");
  add_common(rate_fd);
  add_theta(rate_fd, true);
  add_grid(rate_fd);
  add_method(rate_fd);
  CLI::App* sweep = app.add_subcommand("sweep", "rate curves over a theta grid");
  add_common(sweep);
  add_theta(sweep, false);
  add_order(sweep);
  add_grid(sweep);
  add_method(sweep);
  sweep->add_flag("--no-reference", cfg.no_reference, "skip the frequency-domain reference curve");
  CLI::App* coeffs = app.add_subcommand("coeffs", "dump cascade coefficients as JSON");
  add_common(coeffs);
  add_order(coeffs);
  coeffs->add_flag("--dump-model", cfg.dump_model, "emit the parsed model instead");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: code=usage exit=" << kFailure << " message=" << one_line(e.what()) << '\n';
    return kFailure;
  }

  std::ofstream file;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) {
      err << "error: code=io exit=" << kFailure << " message=cannot open " << cfg.output << '\n';
      return kFailure;
    }
  }
  std::ostream& os = cfg.output.empty() ? out : file;

  try {
    const qef::OqhoModel model = qef::load_model(cfg.model_path);
    if (validate->parsed()) return cmd_validate(cfg, model, os, err);
    if (thresholds->parsed()) return cmd_thresholds(cfg, model, os, err);
    if (rate->parsed()) return cmd_rate(cfg, model, os, err);
    if (rate_fd->parsed()) return cmd_rate_fd(cfg, model, os, err);
    if (sweep->parsed()) return cmd_sweep(cfg, model, os, err);
    return cmd_coeffs(cfg, model, os, err);
  } catch (const qef::Error& e) {
    const int code = exit_code_for(e.code());
    err << "error: code=" << qef::to_string(e.code()) << " exit=" << code
        << " message=" << one_line(e.what()) << '\n';
    return code;
  } catch (const std::exception& e) {
    err << "error: code=internal exit=" << kFailure << " message=" << one_line(e.what()) << '\n';
    return kFailure;
  }
}

}  // namespace qefrate
