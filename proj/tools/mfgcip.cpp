#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfgcip/carleman.hpp"
#include "mfgcip/harness.hpp"
#include "mfgcip/transform.hpp"

namespace fs = std::filesystem;
using namespace mfgcip;

namespace {

constexpr int kOk = 0, kConfig = 2, kNumeric = 3;

struct Globals {
  std::string config;
  std::string out = "out";
  int threads = 1;
  long long seed = -1;
};

Config effective_config(const Globals& gl) {
  Config cfg = load_config(gl.config);
  if (gl.seed >= 0) {
    cfg.set("noise.seed", std::to_string(gl.seed));
    cfg.set("carleman.seed", std::to_string(gl.seed));
  }
  return cfg;
}

std::string out_path(const Globals& gl, const std::string& name) {
  fs::create_directories(gl.out);
  return (fs::path(gl.out) / name).string();
}

void save_solution(const MfgSolution& s, const std::string& dir) {
  fs::create_directories(dir);
  write_field(s.u, (fs::path(dir) / "u.field").string());
  write_field(s.m, (fs::path(dir) / "m.field").string());
}

CipMode mode_of(const Config& cfg, const std::string& key, const std::string& override_mode) {
  return parse_cip_mode(override_mode.empty() ? cfg.get_string(key, "complete") : override_mode);
}

int cmd_forward(const Globals& gl) {
  Config cfg = effective_config(gl);
  StandardInstance inst = build_instance(cfg);
  save_solution(inst.truth, out_path(gl, "truth"));
  save_solution(inst.ref, out_path(gl, "reference"));
  write_field(inst.b_true, out_path(gl, "b_true.field"));
  write_field(inst.b_ref, out_path(gl, "b_ref.field"));
  cfg.save(out_path(gl, "config.ini"));
  std::printf("forward: picard iterations truth %zu, reference %zu\n", inst.truth.picard_residuals.size(),
              inst.ref.picard_residuals.size());
  return kOk;
}

int cmd_make_data(const Globals& gl, const std::string& mode_opt) {
  Config cfg = effective_config(gl);
  CipMode mode = mode_of(cfg, "inversion.mode", mode_opt);
  StandardInstance inst = build_instance(cfg);
  CipData d = generate_cip_data(inst.truth, mode);
  NoiseSpec ns;
  ns.delta = cfg.get_double("noise.delta", 0);
  ns.seed = std::uint64_t(cfg.get_int("noise.seed", 1));
  ns.terms = cfg.get_int("noise.terms", 4);
  d = add_noise(d, ns);
  save_cip_data(d, out_path(gl, "data"));
  std::printf("make-data: mode %s, delta %g, %zu lateral faces\n", to_string(mode).c_str(), ns.delta,
              d.faces.size());
  return kOk;
}

int cmd_verify_carleman(const Globals& gl) {
  Config cfg = effective_config(gl);
  GridSpec g;
  g.n = 1;
  g.A = {cfg.get_double("carleman.A1", 0.25), 1.0};
  g.T = cfg.get_double("carleman.T", 1);
  g.Nx = {cfg.get_int("carleman.Nx", 201), 1};
  g.Nt = cfg.get_int("carleman.Nt", 201);
  g.gamma = g.A[0];
  try {
    g.validate();
  } catch (const GridError& e) {
    throw ConfigError(std::string("config: carleman grid: ") + e.what());
  }
  const double nu = cfg.get_double("carleman.nu", 3);
  const double window = cfg.get_double("carleman.window", 10);
  const int points = std::max(2, cfg.get_int("carleman.lambda_points", 6));
  const double Cpt = cfg.get_double("carleman.pointwise_C", 0);
  auto battery = carleman_battery(g, cfg.get_int("carleman.battery", 20), std::uint64_t(cfg.get_int("carleman.seed", 7)));
  double lambda0 = calibrate_lambda0(battery, nu);

  Config rep;
  bool all_positive = true;
  for (int i = 0; i < points; ++i) {
    CarlemanParams p;
    p.nu = nu;
    p.lambda0 = lambda0;
    p.lambda = lambda0 + window * i / (points - 1);
    double minC = std::numeric_limits<double>::infinity(), min_slack = minC, neg = 0;
    std::vector<double> bterms, iterms;
    for (std::size_t j = 0; j < battery.size(); ++j)
      for (HeatSign s : {HeatSign::Minus, HeatSign::Plus}) {
        IntegralReport r = check_integral(battery[j], p, s);
        minC = std::min(minC, r.admissible_C);
        PointwiseReport pw = check_pointwise(battery[j], p, s, Cpt);
        min_slack = std::min(min_slack, pw.min_slack);
        neg = std::max(neg, pw.neg_fraction);
        if (j == 0 && s == HeatSign::Minus) {
          for (const auto& t : r.boundary_terms) bterms.push_back(t.value);
          for (const auto& t : r.interior_terms) iterms.push_back(t.value);
        }
      }
    all_positive = all_positive && minC > 0;
    std::string key = "lambda_" + std::to_string(i);
    rep.set(key + ".lambda", p.lambda);
    rep.set(key + ".min_slack", min_slack);
    rep.set(key + ".neg_fraction", neg);
    rep.set(key + ".admissible_C", minC);
    rep.set(key + ".boundary_terms", bterms);
    rep.set(key + ".interior_terms", iterms);
    std::printf("lambda %.4f  admissible_C %.4e  min_slack %.4e  neg_fraction %.4f\n", p.lambda, minC, min_slack, neg);
  }
  rep.set("summary.lambda0", lambda0);
  rep.set("summary.all_positive", all_positive ? "true" : "false");
  rep.save(out_path(gl, "carleman_report.ini"));
  std::printf("verify-carleman: lambda0 %.4f, admissible_C > 0 throughout: %s\n", lambda0, all_positive ? "yes" : "no");
  return all_positive ? kOk : kNumeric;
}

int cmd_transform_check(const Globals& gl, double tol) {
  Config cfg = effective_config(gl);
  StandardInstance inst = build_instance(cfg);
  CipData d1 = generate_cip_data(inst.truth, CipMode::Complete);
  CipData d2 = generate_cip_data(inst.ref, CipMode::Complete);
  DiffTriple d = diff_triple(inst.truth, inst.b_true, inst.ref, inst.b_ref);
  PQ pq = build_pq_coefficients(inst.truth, inst.ref, inst.coeffs_ref);
  EndpointFields e = endpoint_fields(d1, d2, inst.b_true, pq, inst.coeffs_ref);
  TransformedFields tf = make_vw(d, pq, e);
  const GridSpec& g = inst.grid;
  auto slice = [](const Field& f, int k) {
    Field s = time_slice(f, k);
    s.tag = DomainTag::space();
    return s;
  };
  Field v0 = slice(tf.v, 0), vT = slice(tf.v, g.Nt - 1);
  Field w0 = slice(tf.w, 0), wT = slice(tf.w, g.Nt - 1);
  Field mb = -1.0 * d.b;
  double bs = std::max(d.b.max_abs(), 1e-300), ws = std::max(tf.wbar.max_abs(), 1e-300);
  double ev0 = (v0 - mb).max_abs() / bs, evT = (vT - mb).max_abs() / bs;
  double ew0 = w0.max_abs() / ws, ewT = wT.max_abs() / ws;
  ResidualBounds rb = residual_bounds(tf, d1, d2);
  Config rep;
  rep.set("identity.v0_rel", ev0);
  rep.set("identity.vT_rel", evT);
  rep.set("identity.w0_rel", ew0);
  rep.set("identity.wT_rel", ewT);
  rep.set("identity.tol", tol);
  rep.set("bounds.C1", rb.C1);
  rep.set("bounds.X1_L2", rb.X1_L2);
  rep.set("bounds.X2_L2", rb.X2_L2);
  rep.set("bounds.data_norm", rb.data_norm);
  rep.save(out_path(gl, "transform_report.ini"));
  std::printf("transform-check: v(.,0) %.3e  v(.,T) %.3e  w(.,0) %.3e  w(.,T) %.3e (relative, tol %.3e)\n", ev0, evT,
              ew0, ewT, tol);
  std::printf("bounds: X1 %.3e  X2 %.3e  data %.3e\n", rb.X1_L2, rb.X2_L2, rb.data_norm);
  bool ok = std::max({ev0, evT, ew0, ewT}) <= tol;
  return ok ? kOk : kNumeric;
}

int cmd_invert(const Globals& gl, const std::string& data_dir, const std::string& mode_opt) {
  Config cfg = effective_config(gl);
  StandardInstance inst = build_instance(cfg);
  CipData obs;
  double delta = cfg.get_double("noise.delta", 0);
  if (!data_dir.empty()) {
    obs = load_cip_data(data_dir);
  } else {
    obs = generate_cip_data(inst.truth, mode_of(cfg, "inversion.mode", mode_opt));
    NoiseSpec ns;
    ns.delta = delta;
    ns.seed = std::uint64_t(cfg.get_int("noise.seed", 1));
    ns.terms = cfg.get_int("noise.terms", 4);
    obs = add_noise(obs, ns);
  }
  InverseProblemSpec spec = inversion_spec(inst, obs, cfg, inversion_lambda(cfg, obs.mode, delta));
  Config rep;
  std::string rule = cfg.get_string("inversion.eps_rule", "fixed");
  if (rule == "lcurve") {
    LCurve lc = lcurve_scan(spec, cfg.get_doubles("inversion.eps_grid", {}), spec.eps, gl.threads);
    spec.eps = lc.eps;
    rep.set("lcurve.corner", std::to_string(lc.corner));
  } else if (rule != "fixed") {
    throw ConfigError("config: inversion.eps_rule must be lcurve or fixed");
  }
  ReconstructionResult r = solve_outer(spec);
  ErrorReport er = error_report(r.b_hat, inst.b_true, inst.grid.gamma);
  write_field(r.b_hat, out_path(gl, "b_hat.field"));
  write_field(r.u_hat, out_path(gl, "u_hat.field"));
  write_field(r.m_hat, out_path(gl, "m_hat.field"));
  rep.set("result.mode", to_string(obs.mode));
  rep.set("result.lambda", spec.lambda);
  rep.set("result.eps", spec.eps);
  rep.set("result.outer_iterations", std::to_string(r.outer_iterations));
  rep.set("result.converged", r.converged ? "true" : "false");
  rep.set("result.note", r.note.empty() ? "-" : r.note);
  rep.set("result.rows", std::to_string(r.rows));
  rep.set("result.rcond", r.rcond);
  rep.set("result.residual_history", r.residual_history);
  rep.set("result.error_L2_gamma", er.L2_gamma);
  rep.set("result.error_full", er.L2_full);
  rep.save(out_path(gl, "metrics.ini"));
  std::printf("invert: %d outer iterations (%s), error over Omega_gamma %.4e, over Omega %.4e\n", r.outer_iterations,
              r.converged ? "converged" : r.note.c_str(), er.L2_gamma, er.L2_full);
  return kOk;
}

int cmd_sweep(const Globals& gl, const std::string& mode_opt) {
  Config cfg = effective_config(gl);
  CipMode mode = mode_of(cfg, "sweep.mode", mode_opt);
  StandardInstance inst = build_instance(cfg);
  std::vector<double> deltas = cfg.get_doubles("sweep.deltas", {});
  std::vector<std::uint64_t> seeds;
  for (double s : cfg.get_doubles("sweep.seeds", {})) seeds.push_back(std::uint64_t(s));
  SweepResult r = run_sweep(inst, cfg, deltas, seeds, mode, gl.threads);
  write_text(out_path(gl, "sweep.csv"), sweep_csv(r));
  write_text(out_path(gl, "sweep.json"), sweep_json(r));
  if (r.fit_ok)
    std::printf("sweep: alpha_hat %.4f (predicted %.4f), B_hat %.4e, r2 %.4f\n", r.fit.alpha_hat, r.alpha_predicted,
                r.fit.B_hat, r.fit.r2);
  else
    std::printf("sweep: slope not fitted: %s\n", r.fit_message.c_str());
  return kOk;
}

// Rebuilds the CSV from a sweep JSON and prints per-delta seed averages.
int cmd_report(const Globals& gl, std::string in) {
  if (in.empty()) in = (fs::path(gl.out) / "sweep.json").string();
  nlohmann::json j = nlohmann::json::parse(read_text(in));
  if (j.value("schema_version", 0) != 1) throw ConfigError("report: unsupported sweep schema in " + in);
  auto num = [](const nlohmann::json& v) { return v.is_null() ? std::nan("") : v.get<double>(); };
  SweepResult r;
  for (const auto& row : j.at("rows")) {
    SweepRow s;
    s.delta = row.at("delta").get<double>();
    s.seed = row.at("seed").get<std::uint64_t>();
    s.mode = parse_cip_mode(row.at("mode").get<std::string>());
    s.lambda = row.at("lambda").get<double>();
    s.err_gamma = num(row.at("err_gamma"));
    s.err_full = num(row.at("err_full"));
    s.ok = row.at("ok").get<bool>();
    r.rows.push_back(s);
  }
  write_text(out_path(gl, "report.csv"), sweep_csv(r));
  bool over_gamma = !r.rows.empty() && r.rows.front().mode == CipMode::Incomplete;
  std::vector<double> d, e;
  seed_average(r.rows, over_gamma, d, e);
  std::printf("%-12s %-14s\n", "delta", over_gamma ? "mean_err_gamma" : "mean_err_full");
  for (std::size_t i = 0; i < d.size(); ++i) std::printf("%-12.4e %-14.6e\n", d[i], e[i]);
  const auto& fit = j.at("fit");
  if (fit.at("ok").get<bool>())
    std::printf("alpha_hat %.4f  predicted %.4f  r2 %.4f\n", num(fit.at("alpha_hat")), num(fit.at("alpha_predicted")),
                num(fit.at("r2")));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coefficient inverse problem for a mean field games system: forward solves, data, inversion, sweeps"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals gl;
  app.add_option("--config", gl.config, "Configuration file overlaying the defaults");
  app.add_option("--out", gl.out, "Output directory")->capture_default_str();
  app.add_option("--threads", gl.threads, "Worker threads for scans and sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", gl.seed, "Overrides noise.seed and carleman.seed")->check(CLI::NonNegativeNumber);

  std::string mode, data_dir, report_in;
  double tol = 0.05;
  auto* forward = app.add_subcommand("forward", "Solve the reference and true systems, write the fields");
  auto* make_data = app.add_subcommand("make-data", "Extract (optionally noisy) observation data");
  make_data->add_option("--mode", mode, "complete or incomplete");
  auto* carl = app.add_subcommand("verify-carleman", "Run the Carleman checks over a lambda grid");
  auto* tc = app.add_subcommand("transform-check", "Check the endpoint identities of the v/w transform");
  tc->add_option("--tol", tol, "Relative tolerance for the identities")->capture_default_str();
  auto* inv = app.add_subcommand("invert", "Reconstruct b");
  inv->add_option("--data", data_dir, "Observation directory written by make-data");
  inv->add_option("--mode", mode, "complete or incomplete, when no data directory is given");
  auto* sweep = app.add_subcommand("sweep", "Noise sweep and slope fit");
  sweep->add_option("--mode", mode, "complete or incomplete");
  auto* report = app.add_subcommand("report", "Render CSV and a summary from a sweep JSON");
  report->add_option("--in", report_in, "Sweep JSON (default OUT/sweep.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*forward) return cmd_forward(gl);
    if (*make_data) return cmd_make_data(gl, mode);
    if (*carl) return cmd_verify_carleman(gl);
    if (*tc) return cmd_transform_check(gl, tol);
    if (*inv) return cmd_invert(gl, data_dir, mode);
    if (*sweep) return cmd_sweep(gl, mode);
    if (*report) return cmd_report(gl, report_in);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const IncompatibleData& e) {
    std::cerr << "corner consistency: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
