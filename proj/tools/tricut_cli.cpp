// Command line front end.  One binary, seven subcommands, each sitting on one
// library layer:
//
//   phase    discriminant classification of (a, t)
//   support  branch points and the square-root edge constants
//   density  sampled limiting density and the interval masses
//   sample   eigenvalue draws and the pooled histogram comparison
//   kernel   scaled kernel diagonal against the density
//   limits   sine / Airy / density convergence ladders
//   verify   the whole identity battery; exit 1 names the first failure
//
// Every JSON artifact embeds the fully resolved configuration, so a result
// file documents the run that produced it; with --no-timestamp reruns are
// byte identical.  Exit codes: 0 success, 1 a numerical check failed,
// 2 unusable configuration.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "json.hpp"

#include "tricut/asymptotics.hpp"
#include "tricut/density.hpp"
#include "tricut/ensemble.hpp"
#include "tricut/errors.hpp"
#include "tricut/finite.hpp"
#include "tricut/lambda.hpp"
#include "tricut/model_rhp.hpp"
#include "tricut/quadrature.hpp"
#include "tricut/spectral_curve.hpp"

namespace {

using nlohmann::ordered_json;
using tricut::Complex;
using tricut::FiniteEvaluator;
using tricut::FiniteSizeParams;
using tricut::ModelParams;
using tricut::Side;
using tricut::SupportData;

struct RunConfig {
  double a = 2.0;
  double t = 0.5;
  int n = 12;
  std::uint64_t seed = 0;
  int draws = 100;
  double bins = 0.1;               // histogram bin width
  std::vector<double> grid;        // empty: the subcommand default
  std::string precision = "auto";  // auto | double | extended
  int threads = 1;                 // accepted for script compatibility
  std::string out = ".";
  bool no_timestamp = false;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string iso_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j;
  j["a"] = cfg.a;
  j["t"] = cfg.t;
  j["n"] = cfg.n;
  j["seed"] = cfg.seed;
  j["draws"] = cfg.draws;
  j["bins"] = cfg.bins;
  j["grid"] = cfg.grid;
  j["precision"] = cfg.precision;
  j["threads"] = cfg.threads;
  j["out"] = cfg.out;
  return j;
}

ordered_json document(const RunConfig& cfg) {
  ordered_json j;
  j["config"] = config_json(cfg);
  if (!cfg.no_timestamp) j["generated_at"] = iso_now();
  return j;
}

std::filesystem::path sink(const RunConfig& cfg, const char* name) {
  std::filesystem::create_directories(cfg.out);
  return std::filesystem::path(cfg.out) / name;
}

void write_json(const RunConfig& cfg, const char* name, const ordered_json& j) {
  const std::filesystem::path path = sink(cfg, name);
  std::ofstream f(path);
  f << j.dump(2) << '\n';
  if (!f) throw tricut::ConfigError("cannot write " + path.string());
  std::cout << "wrote " << path.string() << "\n";
}

void write_text(const RunConfig& cfg, const char* name, const std::string& body) {
  const std::filesystem::path path = sink(cfg, name);
  std::ofstream f(path);
  f << body;
  if (!f) throw tricut::ConfigError("cannot write " + path.string());
  std::cout << "wrote " << path.string() << "\n";
}

tricut::Profile profile_of(const RunConfig& cfg) {
  if (cfg.precision == "double") return tricut::Profile::narrow;
  if (cfg.precision == "extended") return tricut::Profile::wide;
  return tricut::Profile::automatic;
}

const char* phase_name(tricut::PhaseReport::Phase p) {
  switch (p) {
    case tricut::PhaseReport::Phase::ThreeCut: return "ThreeCut";
    case tricut::PhaseReport::Phase::Boundary: return "Boundary";
    default: return "Unsupported";
  }
}

int run_phase(const RunConfig& cfg) {
  const tricut::PhaseReport r = tricut::classify_phase(ModelParams::general(cfg.a, cfg.t));
  ordered_json j = document(cfg);
  j["phase"] = phase_name(r.phase);
  j["delta"] = r.delta;
  j["delta_c"] = r.delta_c;
  j["delta_q"] = r.delta_q;
  write_json(cfg, "phase.json", j);
  std::cout << phase_name(r.phase) << "\n";
  return 0;
}

int run_support(const RunConfig& cfg) {
  const ModelParams pr = ModelParams::three_cut(cfg.a, cfg.t);
  const SupportData s = tricut::branch_points(pr);
  ordered_json j = document(cfg);
  j["y_roots"] = s.y_roots;
  j["z1"] = s.z1;
  j["z2"] = s.z2;
  j["z3"] = s.z3;
  j["intervals"] = {{-s.z3, -s.z2}, {-s.z1, s.z1}, {s.z2, s.z3}};
  ordered_json ec = ordered_json::array();
  for (const auto& [edge, c] : s.rho_edge) {
    ordered_json row;
    row["edge"] = edge;
    row["value"] = c;
    ec.push_back(row);
  }
  j["edge_constants"] = ec;
  write_json(cfg, "support.json", j);
  std::cout << "[" << num(-s.z3) << ", " << num(-s.z2) << "] u [" << num(-s.z1) << ", "
            << num(s.z1) << "] u [" << num(s.z2) << ", " << num(s.z3) << "]\n";
  return 0;
}

int run_density(const RunConfig& cfg) {
  const ModelParams pr = ModelParams::three_cut(cfg.a, cfg.t);
  const SupportData s = tricut::branch_points(pr);
  const std::array<double, 3> m = tricut::masses(pr, s);

  std::string csv = "x,rho\n";
  if (cfg.grid.empty()) {
    const tricut::DensityCurve curve = tricut::make_density_curve(pr, s);
    for (const auto& [x, y] : curve.samples) csv += num(x) + "," + num(y) + "\n";
  } else {
    for (double x : cfg.grid) csv += num(x) + "," + num(tricut::rho(pr, s, x)) + "\n";
  }
  write_text(cfg, "density.csv", csv);

  ordered_json j = document(cfg);
  j["z1"] = s.z1;
  j["z2"] = s.z2;
  j["z3"] = s.z3;
  j["masses"] = m;
  write_json(cfg, "density.json", j);
  std::cout << "masses " << num(m[0]) << " " << num(m[1]) << " " << num(m[2]) << "\n";
  return 0;
}

int run_sample(const RunConfig& cfg) {
  tricut::EnsembleConfig ec;
  ec.fp = FiniteSizeParams::split(cfg.n, cfg.t, cfg.a);
  ec.seed = cfg.seed;
  ec.draws = cfg.draws;
  const std::vector<tricut::EigenSample> samples = tricut::sample_eigenvalues(ec);

  std::string csv = "draw,index,value\n";
  for (const tricut::EigenSample& d : samples)
    for (std::size_t i = 0; i < d.eigenvalues.size(); ++i)
      csv += std::to_string(d.draw_index) + "," + std::to_string(i) + "," +
             num(d.eigenvalues[i]) + "\n";
  write_text(cfg, "eigenvalues.csv", csv);

  const ModelParams pr = ModelParams::three_cut(cfg.a, ec.fp.t());
  const SupportData s = tricut::branch_points(pr);
  const tricut::HistogramComparison hist = tricut::empirical_density(pr, s, samples, cfg.bins);

  ordered_json j = document(cfg);
  j["t_effective"] = ec.fp.t();
  j["margin"] = hist.margin;
  j["max_deviation"] = hist.max_deviation;
  j["outside_fraction"] = hist.outside_fraction;
  j["edges"] = hist.edges;
  j["empirical"] = hist.empirical;
  j["predicted"] = hist.predicted;
  ordered_json stats = ordered_json::array();
  for (double e : {-s.z2, s.z1, s.z3}) {
    const tricut::EdgeStatistics st = tricut::edge_statistics(pr, s, samples, e);
    ordered_json row;
    row["edge"] = st.edge;
    row["scale"] = st.scale;
    row["count"] = st.rescaled.size();
    row["mean"] = st.mean;
    row["variance"] = st.variance;
    stats.push_back(row);
  }
  j["edge_statistics"] = stats;
  write_json(cfg, "histogram.json", j);
  std::cout << cfg.draws << " draws of n=" << ec.fp.n << ": max bin deviation "
            << num(hist.max_deviation) << ", outside fraction " << num(hist.outside_fraction)
            << "\n";
  return 0;
}

std::vector<double> default_diag_grid(const SupportData& s) {
  // seven interior points per interval plus one exterior decay probe
  std::vector<double> xs;
  const std::array<std::pair<double, double>, 3> iv{
      {{-s.z3, -s.z2}, {-s.z1, s.z1}, {s.z2, s.z3}}};
  for (const auto& [lo, hi] : iv)
    for (int k = 1; k <= 7; ++k) xs.push_back(lo + (hi - lo) * k / 8.0);
  xs.push_back(s.z3 + 0.5);
  return xs;
}

int run_kernel(const RunConfig& cfg) {
  const FiniteEvaluator ev(FiniteSizeParams::split(cfg.n, cfg.t, cfg.a), profile_of(cfg));
  const SupportData& s = ev.support();
  const ModelParams pr = ModelParams::three_cut(cfg.a, ev.params().t());
  const std::vector<double> xs = cfg.grid.empty() ? default_diag_grid(s) : cfg.grid;
  const int n = ev.params().n;

  std::string csv = "x,kn,scaled,rho\n";
  double worst = 0;
  for (double x : xs) {
    const tricut::KernelEval k = ev.kernel(x, x);
    bool inside = false;
    const double r = tricut::rho(pr, s, x, &inside);
    csv += num(x) + "," + num(k.kn) + "," + num(k.kn / n) + "," + num(r) + "\n";
    if (inside) worst = std::max(worst, std::abs(k.kn / n - r));
  }
  write_text(cfg, "kernel.csv", csv);

  ordered_json j = document(cfg);
  j["points"] = xs.size();
  j["max_diag_deviation"] = worst;  // against rho, in-support points only
  write_json(cfg, "kernel.json", j);
  std::cout << "n=" << n << " diagonal within " << num(worst) << " of the density on "
            << xs.size() << " points\n";
  return 0;
}

int run_limits(const RunConfig& cfg) {
  if (cfg.n < 12) throw tricut::ConfigError("--n bounds the ladder; the smallest rung is 12");
  std::vector<FiniteSizeParams> sizes;
  for (int m : {12, 24, 48})
    if (m <= cfg.n) sizes.push_back(FiniteSizeParams::split(m, cfg.t, cfg.a));

  const ModelParams pr = ModelParams::three_cut(cfg.a, sizes.front().t());
  const SupportData s = tricut::branch_points(pr);
  const double mid = 0.5 * (s.z2 + s.z3);

  std::vector<tricut::LimitCheckReport> reports;
  reports.push_back(tricut::bulk_limit_check(sizes, mid));
  reports.push_back(tricut::bulk_limit_check(sizes, 0.0));
  reports.push_back(tricut::edge_limit_check(sizes, s.z3));
  reports.push_back(tricut::edge_limit_check(sizes, s.z1));
  reports.push_back(
      tricut::diagonal_density_check(sizes, {-mid, 0.0, mid, s.z3 + 0.5, s.z3}));

  ordered_json arr = ordered_json::array();
  std::string csv = "kind,x0,n,max_err\n";
  bool all_shrink = true;
  for (const tricut::LimitCheckReport& r : reports) {
    ordered_json row;
    row["kind"] = r.kind;
    row["x0"] = r.x0;
    row["n"] = r.n_list;
    row["grid"] = r.grid;
    row["max_err"] = r.max_err;
    row["nonincreasing"] = r.nonincreasing;
    if (r.kind == "edge") {
      row["edge_constant"] = r.edge_constant;
      row["swapped_err"] = r.swapped_err;
    }
    if (r.kind == "diagonal") {
      std::vector<double> last(r.grid.size());
      for (std::size_t i = 0; i < last.size(); ++i) last[i] = r.finite.back()(0, i);
      row["final_scaled_diag"] = last;
    }
    arr.push_back(row);
    all_shrink = all_shrink && r.nonincreasing;
    for (std::size_t i = 0; i < r.n_list.size(); ++i)
      csv += r.kind + "," + num(r.x0) + "," + std::to_string(r.n_list[i]) + "," +
             num(r.max_err[i]) + "\n";
    std::cout << r.kind << " at " << num(r.x0) << ": max_err " << num(r.max_err.front())
              << " -> " << num(r.max_err.back())
              << (r.nonincreasing ? "" : "  NOT NONINCREASING") << "\n";
  }
  ordered_json j = document(cfg);
  j["reports"] = arr;
  j["all_nonincreasing"] = all_shrink;
  write_json(cfg, "limits.json", j);
  write_text(cfg, "limits.csv", csv);
  if (!all_shrink) {
    std::cerr << "limits failed: a ladder did not contract\n";
    return 1;
  }
  return 0;
}

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

int finish_verify(const RunConfig& cfg, const std::vector<Check>& checks) {
  ordered_json arr = ordered_json::array();
  const Check* first_fail = nullptr;
  for (const Check& c : checks) {
    ordered_json row;
    row["name"] = c.name;
    row["pass"] = c.pass;
    row["detail"] = c.detail;
    arr.push_back(row);
    if (!c.pass && !first_fail) first_fail = &c;
  }
  ordered_json j = document(cfg);
  j["checks"] = arr;
  j["passed"] = first_fail == nullptr;
  write_json(cfg, "verify.json", j);
  if (first_fail) {
    std::cerr << "verify failed: " << first_fail->name << "\n";
    return 1;
  }
  std::cout << "all checks passed\n";
  return 0;
}

int run_verify(const RunConfig& cfg) {
  std::vector<Check> checks;
  const auto record = [&checks](const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({name, pass, detail});
    std::cout << (pass ? "ok   " : "FAIL ") << name << ": " << detail << "\n";
  };
  const auto bound = [](double v, double tol) { return num(v) + " <= " + num(tol); };

  const tricut::PhaseReport ph = tricut::classify_phase(ModelParams::general(cfg.a, cfg.t));
  const bool three = ph.phase == tricut::PhaseReport::Phase::ThreeCut;
  record("phase", three && ph.delta_c > 0,
         std::string(phase_name(ph.phase)) + ", delta_c=" + num(ph.delta_c));
  if (!three) return finish_verify(cfg, checks);

  const ModelParams pr = ModelParams::three_cut(cfg.a, cfg.t);
  const SupportData s = tricut::branch_points(pr);
  {
    const std::array<double, 3>& y = s.y_roots;
    record("critical_cubic", y[0] > 0 && y[0] < y[1] && y[1] < y[2],
           "roots " + num(y[0]) + " < " + num(y[1]) + " < " + num(y[2]));
  }
  {
    const std::array<double, 3> m = tricut::masses(pr, s);
    const double err =
        std::max({std::abs(m[0] - 0.5 * (1 - cfg.t)), std::abs(m[1] - cfg.t),
                  std::abs(m[2] - 0.5 * (1 - cfg.t))});
    record("masses", err <= 1e-8, bound(err, 1e-8));
  }

  const tricut::LambdaEvaluator lam(pr);
  {
    const tricut::JumpReport rep = lam.jump_report(20);
    record("lambda_jumps", rep.max_residual <= 1e-8, bound(rep.max_residual, 1e-8));
  }
  {
    double worst = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int interval : {1, 2, 3})
      for (double off : {1e-2, 1e-3}) {
        const tricut::LemmaReport rep = lam.lemma_report(interval, off * (s.z3 - s.z2));
        worst = std::min(worst, rep.min_margin);
        ok = ok && rep.violations.empty() && rep.min_margin > 0;
      }
    record("sheet_ordering", ok, "min margin " + num(worst));
  }

  {
    const tricut::ModelJumpReport rep = tricut::verify_model_jumps(pr, s, 20);
    record("model_jumps", rep.max_residual <= 1e-9, bound(rep.max_residual, 1e-9));
  }
  {
    const Complex dir = std::exp(Complex(0, 0.7));
    const auto dist = [&](Complex z) {
      const Eigen::Matrix4cd m = tricut::model_solution(pr, s, z).m;
      return (m - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff();
    };
    const double d4 = dist(1e4 * dir), d5 = dist(1e5 * dir);
    record("model_identity", d4 <= 1e-3 && d4 / d5 > 8.0,
           "at 1e4: " + num(d4) + ", contraction x" + num(d4 / d5));
  }
  {
    const double g = 0.5 * (s.z1 + s.z2), o = s.z3 + 1.0;
    double worst = 0;
    for (double x : {g, o, -g, -o}) {
      const Eigen::Matrix4cd m = tricut::model_solution(pr, s, Complex(x, 0)).m;
      for (int k = 0; k < 4; ++k)
        for (int c = 0; c < 4; ++c) {
          const bool real_cell = (k == 0) == (c == 0);
          worst = std::max(worst, std::abs(real_cell ? m(k, c).imag() : m(k, c).real()));
        }
    }
    record("model_gap_pattern", worst <= 1e-8, bound(worst, 1e-8));
  }

  const FiniteSizeParams fp = FiniteSizeParams::split(cfg.n, cfg.t, cfg.a);
  const FiniteEvaluator ev(fp, profile_of(cfg));
  // off-axis probes keep clear of the annulus just beyond the outer edge,
  // where neither transform path is accurate and queries throw PrecisionLoss
  const double mid = 0.5 * (s.z2 + s.z3);
  {
    double worst = 0;
    for (const Complex z : {Complex(mid, 0.5), Complex(-0.77 * s.z1, 2.0),
                            Complex(0.25 * s.z1, 0.01), Complex(2.5 * s.z3, 1.0)})
      worst = std::max(worst, std::abs(ev.y_matrix(z).y.determinant() - 1.0));
    worst = std::max(worst, ev.y_matrix(Complex(0.7 * s.z1, 0.0), Side::above).det_residual);
    record("unimodular", worst <= 1e-9, bound(worst, 1e-9));
  }
  {
    double worst = 0;
    const double as[3] = {cfg.a, 0.0, -cfg.a};
    for (double x : {0.7 * s.z1, -mid, mid}) {
      const Eigen::Matrix4cd above = ev.y_matrix(Complex(x, 0), Side::above).y;
      const Eigen::Matrix4cd below = ev.y_matrix(Complex(x, 0), Side::below).y;
      Eigen::Matrix4cd jump = Eigen::Matrix4cd::Identity();
      for (int c = 0; c < 3; ++c) jump(0, c + 1) = std::exp(-fp.N * (0.5 * x * x - as[c] * x));
      worst = std::max(worst, (above - below * jump).cwiseAbs().maxCoeff() /
                                  below.cwiseAbs().maxCoeff());
    }
    record("weight_jump", worst <= 1e-8, bound(worst, 1e-8));
  }
  {
    double worst = 0;
    for (const Complex z : {Complex(0.5 * s.z1, 0.4), Complex(-0.5 * (s.z1 + s.z2), 0.3),
                            Complex(0.8 * mid, -0.5)})
      worst = std::max(worst, ev.ode_residual(z));
    record("ode", worst <= 1e-7, bound(worst, 1e-7));
  }
  {
    const double r = ev.recurrence_residual({fp.n1, fp.n2, fp.n3}, Complex(0.6 * s.z1, 0.5));
    record("recurrence", r <= 1e-7, bound(r, 1e-7));
  }
  {
    const double L = ev.support().z3 + 3.0;
    const double tr =
        tricut::integrate([&](double x) { return ev.kernel(x, x).kn; }, -L, L, 1e-8);
    const double err = std::abs(tr - fp.n);
    record("kernel_trace", err <= 1e-6 * fp.n, bound(err, 1e-6 * fp.n));
  }
  return finish_verify(cfg, checks);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian ensemble with a three-point external source: spectral curve, "
               "finite-n kernel and scaling limits"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  app.set_config("--config", "", "key=value file; command line flags win");

  RunConfig cfg;
  app.add_option("--a", cfg.a, "source strength; the three-cut phase needs a^2 > 3")
      ->capture_default_str();
  app.add_option("--t", cfg.t, "center weight fraction, in (0, 1)")->capture_default_str();
  app.add_option("--n", cfg.n, "matrix size (sample, kernel, verify) or ladder cap (limits)")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "master seed; draws derive independent streams")
      ->capture_default_str();
  app.add_option("--draws", cfg.draws, "Monte Carlo repetitions")->capture_default_str();
  app.add_option("--bins", cfg.bins, "histogram bin width")->capture_default_str();
  app.add_option("--grid", cfg.grid,
                 "comma separated evaluation points overriding the subcommand default")
      ->delimiter(',');
  app.add_option("--precision", cfg.precision, "scalar pipeline: auto, double or extended")
      ->check(CLI::IsMember({"auto", "double", "extended"}))
      ->capture_default_str();
  app.add_option("--threads", cfg.threads,
                 "accepted for script compatibility; evaluation is sequential")
      ->capture_default_str();
  app.add_option("--out", cfg.out, "output directory")->capture_default_str();
  app.add_flag("--no-timestamp", cfg.no_timestamp,
               "omit generated_at so reruns are byte identical");

  CLI::App* c_phase = app.add_subcommand("phase", "discriminant classification of (a, t)");
  CLI::App* c_support = app.add_subcommand("support", "branch points and edge constants");
  CLI::App* c_density = app.add_subcommand("density", "limiting density and interval masses");
  CLI::App* c_sample = app.add_subcommand("sample", "eigenvalue draws and histogram comparison");
  CLI::App* c_kernel = app.add_subcommand("kernel", "kernel diagonal against the density");
  CLI::App* c_limits = app.add_subcommand("limits", "sine / Airy / density convergence ladders");
  CLI::App* c_verify = app.add_subcommand("verify", "identity battery; exit 1 names the failure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_phase->parsed()) return run_phase(cfg);
    if (c_support->parsed()) return run_support(cfg);
    if (c_density->parsed()) return run_density(cfg);
    if (c_sample->parsed()) return run_sample(cfg);
    if (c_kernel->parsed()) return run_kernel(cfg);
    if (c_limits->parsed()) return run_limits(cfg);
    if (c_verify->parsed()) return run_verify(cfg);
    std::cerr << app.help();
    return 2;
  } catch (const tricut::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const tricut::PhaseError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const tricut::Error& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  }
}
