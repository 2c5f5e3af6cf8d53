#include "mfgcip/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mfgcip/carleman.hpp"
#include "mfgcip/discrete.hpp"

namespace mfgcip {

std::string default_config_text() {
  return R"([grid]
n = 1
A1 = 1
A2 = 1
T = 1
Nx = 101
Ny = 1
Nt = 101
gamma = 1

[model]
a0 = 0.5
a1 = 0.1
s = 0.1
sigma = 0.5
b0 = 0.5
b1 = 0.2
bump = 0.1
F_amp = 0.3
q_amp = 0.3
compat_rounds = 4
lateral_m_offset = 0

[picard]
theta = 0.5
tol = 1e-13
max_iters = 200
sweep_tol = 1e-14

[inversion]
mode = complete
lambda_complete = 0.074
nu = 3
eps = 1e-6
eps_rule = fixed
lcurve_report = true
eps_grid = 1e-8,3e-8,1e-7,3e-7,1e-6,3e-6,1e-5,3e-5,1e-4,3e-4,1e-3,3e-3,1e-2
outer_iters = 30
outer_tol = 1e-6
solver = auto
r_bound_c = 1e-3

[noise]
delta = 0.001
seed = 1
terms = 4

[sweep]
deltas = 1e-4,3e-4,1e-3,3e-3,1e-2
seeds = 1,2,3
mode = complete

[carleman]
A1 = 0.25
T = 1
Nx = 201
Nt = 201
nu = 3
battery = 20
seed = 7
window = 10
lambda_points = 6
pointwise_C = 0
)";
}

Config default_config() { return Config::parse(default_config_text()); }

Config load_config(const std::string& path) {
  Config cfg = default_config();
  if (path.empty()) return cfg;
  Config user = Config::load(path);
  for (const auto& [section, body] : user.tree()) {
    if (!cfg.tree().get_child_optional(section)) throw ConfigError("config: unknown table [" + section + "]");
    for (const auto& [key, value] : body) {
      std::string full = section + "." + key;
      if (!cfg.has(full)) throw ConfigError("config: unknown key '" + full + "'");
      cfg.set(full, value.data());
    }
  }
  return cfg;
}

GridSpec grid_from_config(const Config& cfg) {
  GridSpec g;
  g.n = cfg.get_int("grid.n", 1);
  g.A = {cfg.get_double("grid.A1", 1), cfg.get_double("grid.A2", 1)};
  g.T = cfg.get_double("grid.T", 1);
  g.Nx = {cfg.get_int("grid.Nx", 101), g.n > 1 ? cfg.get_int("grid.Ny", 1) : 1};
  g.Nt = cfg.get_int("grid.Nt", 101);
  g.gamma = cfg.get_double("grid.gamma", 1);
  try {
    g.validate();
  } catch (const GridError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return g;
}

namespace {

constexpr double pi = std::numbers::pi;

Field as_space(Field f) {
  f.tag = DomainTag::space();
  return f;
}

}  // namespace

StandardInstance instance_problem(const Config& cfg) {
  StandardInstance I;
  const GridSpec g = grid_from_config(cfg);
  I.grid = g;
  const double A1 = g.A[0], A2 = g.A[1];
  const double a0 = cfg.get_double("model.a0", 0.5), a1 = cfg.get_double("model.a1", 0.1);
  const double b0 = cfg.get_double("model.b0", 0.5), b1 = cfg.get_double("model.b1", 0.2);
  const double bump = cfg.get_double("model.bump", 0.1), sigma = cfg.get_double("model.sigma", 0.5);
  const double Fa = cfg.get_double("model.F_amp", 0.3), qa = cfg.get_double("model.q_amp", 0.3);
  auto cross = [&](double y) { return g.n > 1 ? std::cos(pi * y / (2 * A2)) : 1.0; };

  I.b_ref = sample_space(g, [&](double x, double) { return b0 + b1 * x / A1; });
  I.b_true = sample_space(g, [&](double x, double) {
    double c = std::cos(pi * x / (2 * A1));
    return b0 + b1 * x / A1 + bump * c * c * (1 + 0.5 * x / A1);
  });
  MfgCoefficients c;
  c.a = sample_space(g, [&](double x, double) { return a0 + a1 * x / A1; });
  c.s = Field(g, DomainTag::spacetime(), cfg.get_double("model.s", 0.1));
  std::vector<double> sig(g.n, sigma);
  c.kernel = gaussian_kernel(g, sig, I.b_ref);
  I.coeffs_ref = c;
  c.kernel = gaussian_kernel(g, sig, I.b_true);
  I.coeffs_true = c;

  I.F = sample_space(g, [&](double x, double y) { return Fa * std::cos(pi * x / (2 * A1)) * cross(y); });
  I.q = sample_space(g, [&](double x, double) { return 1 + qa * std::sin(pi * x / (2 * A1)); });
  BoundaryConditions bc;
  bc.u_lateral = sample_spacetime(g, [&](double x, double y, double) { return Fa * std::cos(pi * x / (2 * A1)) * cross(y); });
  const double shift = cfg.get_double("model.lateral_m_offset", 0);  // nonzero breaks the corner at t = 0
  bc.m_lateral =
      sample_spacetime(g, [&](double x, double, double) { return 1 + qa * std::sin(pi * x / (2 * A1)) + shift; });
  I.bc_ref = bc;
  I.bc_true = bc;

  I.picard.theta = cfg.get_double("picard.theta", 0.5);
  I.picard.tol = cfg.get_double("picard.tol", 1e-13);
  I.picard.max_iters = cfg.get_int("picard.max_iters", 200);
  I.picard.step.sweep_tol = cfg.get_double("picard.sweep_tol", 1e-14);
  return I;
}

MfgSolution solve_corner_compatible(const MfgCoefficients& c, const Field& F, const Field& q, BoundaryConditions& bc,
                                    const PicardOptions& opt, int rounds) {
  const GridSpec& g = F.spec;
  MfgSolution sol = picard_solve(c, F, q, bc, opt);
  LevelOps ops(g);
  const int nsp = g.nspace(), last = g.Nt - 1;
  for (int r = 0; r < rounds; ++r) {
    Field u0 = as_space(time_slice(sol.u, 0));
    Field uT = as_space(time_slice(sol.u, last));
    Field mT = as_space(time_slice(sol.m, last));
    Field sT = as_space(time_slice(c.s, last));
    // m_t(., 0) and u_t(., T) as the equations dictate
    std::vector<Field> g0 = gradient(u0), gT = gradient(uT), flux;
    Field gsq = hadamard(gT[0], gT[0]);
    for (int i = 0; i < g.n; ++i) {
      flux.push_back(hadamard(c.a, hadamard(q, g0[i])));
      if (i > 0) gsq += hadamard(gT[i], gT[i]);
    }
    Field mt0 = laplacian(q) + divergence(flux);
    Field utT = 0.5 * hadamard(c.a, gsq) - laplacian(uT) - apply_interaction(c.kernel, mT) - hadamard(sT, mT);
    for (int s = 0; s < nsp; ++s) {
      if (ops.is_interior(s)) continue;
      for (int k = 0; k < g.Nt; ++k) {
        double t = g.time(k);
        std::size_t i = std::size_t(k) * nsp + s;
        bc.m_lateral.values[i] = q.values[s] + mt0.values[s] * t * std::exp(-t);
        bc.u_lateral.values[i] = F.values[s] + utT.values[s] * (t - g.T) * std::exp(t - g.T);
      }
    }
    sol = picard_solve(c, F, q, bc, opt);
  }
  return sol;
}

StandardInstance build_instance(const Config& cfg) {
  StandardInstance I = instance_problem(cfg);
  int rounds = cfg.get_int("model.compat_rounds", 4);
  I.ref = solve_corner_compatible(I.coeffs_ref, I.F, I.q, I.bc_ref, I.picard, rounds);
  I.truth = solve_corner_compatible(I.coeffs_true, I.F, I.q, I.bc_true, I.picard, rounds);
  return I;
}

std::string to_string(Channel c) {
  static const char* names[] = {"p", "q", "F", "G", "f0", "f1", "g0", "g1"};
  return names[int(c)];
}

std::vector<Channel> all_channels() {
  return {Channel::p, Channel::q, Channel::F, Channel::G, Channel::f0, Channel::f1, Channel::g0, Channel::g1};
}

double channel_norm(Channel c, const Field& f) {
  switch (c) {
    case Channel::p:
    case Channel::F:
      return norm_Hk_space(f, 4);
    case Channel::q:
    case Channel::G:
      return norm_Hk_space(f, 3);
    case Channel::f0:
    case Channel::g0:
      return std::max(norm_H21_lateral(f), norm_H21_lateral(face_dt(f)));
    case Channel::f1:
    case Channel::g1:
      return std::max(norm_H10_lateral(f), norm_H10_lateral(face_dt(f)));
  }
  return 0;
}

namespace {

class Uniform {
 public:
  Uniform(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream), std::uint32_t(stream >> 32)};
    rng_.seed(seq);
  }
  // in [-1, 1), from the top 53 bits
  double operator()() { return double(rng_() >> 11) * 0x1.0p-53 * 2 - 1; }

 private:
  std::mt19937_64 rng_;
};

// Smooth perturbation of a spatial or face field; coefficients are always drawn
// so that the stream does not depend on which channels are active.
Field perturbation(const Field& like, int terms, Uniform& U) {
  const GridSpec& g = like.spec;
  int J2 = g.n > 1 ? terms : 1;
  std::vector<double> c(std::size_t(terms) * J2);
  for (int j = 0; j < terms; ++j)
    for (int l = 0; l < J2; ++l) {
      double d = 1 + j + l;  // decay matched to the H^4 calibration
      c[std::size_t(j) * J2 + l] = U() / (d * d * d * d);
    }
  Field f(g, like.tag);
  auto series = [&](double s1, double s2) {
    double v = 0;
    for (int j = 0; j < terms; ++j)
      for (int l = 0; l < J2; ++l) v += c[std::size_t(j) * J2 + l] * std::cos(j * pi * s1) * std::cos(l * pi * s2);
    return v;
  };
  if (like.tag.is_spatial()) {
    for (int i1 = 0; i1 < g.nodes(0); ++i1)
      for (int i2 = 0; i2 < g.nodes(1); ++i2) {
        double s1 = double(i1) / (g.nodes(0) - 1);
        double s2 = g.nodes(1) > 1 ? double(i2) / (g.nodes(1) - 1) : 0.0;
        f.sp(i1, i2) = series(s1, s2);
      }
  } else {
    int m = int(f.size() / g.Nt);
    for (int k = 0; k < g.Nt; ++k)
      for (int j = 0; j < m; ++j) f.values[std::size_t(k) * m + j] = series(g.time(k) / g.T, m > 1 ? double(j) / (m - 1) : 0.0);
  }
  return f;
}

}  // namespace

CipData add_noise(const CipData& data, const NoiseSpec& spec) {
  if (spec.delta < 0 || spec.delta >= 1) throw std::invalid_argument("noise: delta must lie in [0, 1)");
  CipData out = data;
  Uniform U(spec.seed, spec.stream);
  const double target = spec.delta * (1 - 1e-6);
  auto active = [&](Channel c) { return std::find(spec.channels.begin(), spec.channels.end(), c) != spec.channels.end(); };
  auto apply = [&](Channel c, Field& f) {
    Field eta = perturbation(f, spec.terms, U);
    if (!active(c) || spec.delta == 0) return;
    double nrm = channel_norm(c, eta);
    if (!(nrm > 0)) return;
    f += (target / nrm) * eta;
  };
  apply(Channel::p, out.p);
  apply(Channel::q, out.q);
  apply(Channel::F, out.F);
  apply(Channel::G, out.G);
  for (FaceData& fd : out.faces) {
    apply(Channel::f0, fd.f0);
    apply(Channel::f1, fd.f1);
    apply(Channel::g0, fd.g0);
    apply(Channel::g1, fd.g1);
  }
  return out;
}

double inversion_lambda(const Config& cfg, CipMode mode, double delta) {
  if (mode == CipMode::Complete || delta <= 0) return cfg.get_double("inversion.lambda_complete", 0.074);
  GridSpec g = grid_from_config(cfg);
  return lambda_of_delta(delta, g.A[0], g.gamma, cfg.get_double("inversion.nu", 3));
}

InverseProblemSpec inversion_spec(const StandardInstance& inst, const CipData& observed, const Config& cfg,
                                  double lambda) {
  InverseProblemSpec s;
  s.observed = observed;
  s.reference = inst.ref;
  s.coeffs = inst.coeffs_ref;
  s.lambda = lambda;
  s.nu = cfg.get_double("inversion.nu", 3);
  s.eps = cfg.get_double("inversion.eps", 1e-6);
  s.outer_iters = cfg.get_int("inversion.outer_iters", 30);
  s.outer_tol = cfg.get_double("inversion.outer_tol", 1e-6);
  s.solver = cfg.get_string("inversion.solver", "auto");
  s.r_bound_c = cfg.get_double("inversion.r_bound_c", 1e-3);
  return s;
}

namespace {

// Runs fn(0..n-1) on `threads` workers; each index writes only its own slot.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t t; (t = next++) < n;) fn(t);
  };
  int nthreads = std::max(1, std::min<int>(threads, int(n)));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

double menger(const LCurvePoint& a, const LCurvePoint& b, const LCurvePoint& c) {
  double x0 = std::log10(a.residual), y0 = std::log10(a.penalty);
  double x1 = std::log10(b.residual), y1 = std::log10(b.penalty);
  double x2 = std::log10(c.residual), y2 = std::log10(c.penalty);
  double cross = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0);
  double d = std::hypot(x1 - x0, y1 - y0) * std::hypot(x2 - x1, y2 - y1) * std::hypot(x2 - x0, y2 - y0);
  return d > 0 ? 2 * cross / d : 0.0;
}

}  // namespace

LCurve lcurve_corner(std::vector<LCurvePoint> points, double fallback) {
  LCurve lc;
  lc.points = std::move(points);
  lc.eps = fallback;
  auto usable = [](const LCurvePoint& p) { return p.ok && p.residual > 0 && p.penalty > 0; };
  double best = 0;
  for (std::size_t i = 1; i + 1 < lc.points.size(); ++i) {
    LCurvePoint& p = lc.points[i];
    p.curvature = 0;
    if (!usable(lc.points[i - 1]) || !usable(p) || !usable(lc.points[i + 1])) continue;
    p.curvature = menger(lc.points[i - 1], p, lc.points[i + 1]);
    if (p.curvature > best) {
      best = p.curvature;
      lc.corner = int(i);
      lc.eps = p.eps;
    }
  }
  return lc;
}

LCurve lcurve_scan(const InverseProblemSpec& base, const std::vector<double>& grid, double fallback, int threads) {
  std::vector<double> eps = grid;
  std::sort(eps.begin(), eps.end());
  std::vector<LCurvePoint> pts(eps.size());
  parallel_for(eps.size(), threads, [&](std::size_t i) {
    InverseProblemSpec s = base;
    s.eps = eps[i];
    pts[i].eps = eps[i];
    try {
      ReconstructionResult r = solve_outer(s);
      pts[i].residual = r.residual_history.empty() ? 0.0 : r.residual_history.back();
      pts[i].penalty = r.penalty;
    } catch (const std::exception&) {
      pts[i].ok = false;
    }
  });
  return lcurve_corner(std::move(pts), fallback);
}

namespace {

CipData noisy_data(const Config& cfg, const CipData& clean, double delta, std::uint64_t seed, std::uint64_t stream) {
  NoiseSpec ns;
  ns.delta = delta;
  ns.seed = seed;
  ns.stream = stream;
  ns.terms = cfg.get_int("noise.terms", 4);
  return add_noise(clean, ns);
}

SweepRow run_point(const StandardInstance& inst, const Config& cfg, const CipData& clean, double delta,
                   std::uint64_t seed, std::uint64_t stream, CipMode mode, double eps) {
  SweepRow row;
  row.delta = delta;
  row.seed = seed;
  row.mode = mode;
  row.lambda = inversion_lambda(cfg, mode, delta);
  row.eps = eps;
  try {
    InverseProblemSpec spec = inversion_spec(inst, noisy_data(cfg, clean, delta, seed, stream), cfg, row.lambda);
    spec.eps = eps;
    ReconstructionResult r = solve_outer(spec);
    ErrorReport e = error_report(r.b_hat, inst.b_true, inst.grid.gamma);
    row.err_gamma = e.L2_gamma;
    row.err_full = e.L2_full;
    row.rms_gamma = e.rms_gamma;
    row.rms_outside = e.rms_outside;
    row.residual = r.residual_history.empty() ? 0.0 : r.residual_history.back();
  } catch (const std::exception& ex) {
    row.ok = false;
    row.message = ex.what();
    row.err_gamma = row.err_full = std::nan("");
  }
  return row;
}

}  // namespace

void seed_average(const std::vector<SweepRow>& rows, bool over_gamma, std::vector<double>& deltas,
                  std::vector<double>& mean_err) {
  std::map<double, std::pair<double, int>> acc;
  for (const SweepRow& r : rows) {
    if (!r.ok) continue;
    auto& a = acc[r.delta];
    a.first += over_gamma ? r.err_gamma : r.err_full;
    a.second += 1;
  }
  deltas.clear();
  mean_err.clear();
  for (const auto& [d, a] : acc) {
    deltas.push_back(d);
    mean_err.push_back(a.first / a.second);
  }
}

SlopeFit fit_slope(const std::vector<double>& deltas, const std::vector<double>& errors, double baseline) {
  if (deltas.size() != errors.size()) throw std::invalid_argument("fit_slope: size mismatch");
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    double e2 = errors[i] * errors[i] - baseline * baseline;
    if (!(deltas[i] > 0) || !(e2 > 0)) continue;
    X.push_back(std::log(deltas[i]));
    Y.push_back(0.5 * std::log(e2));
  }
  std::vector<double> distinct = X;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw std::invalid_argument("fit_slope: fewer than three usable delta values");
  double n = double(X.size()), mx = 0, my = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    mx += X[i] / n;
    my += Y[i] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
    syy += (Y[i] - my) * (Y[i] - my);
  }
  SlopeFit f;
  f.alpha_hat = sxy / sxx;
  f.B_hat = std::exp(my - f.alpha_hat * mx);
  f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  f.points = int(X.size());
  return f;
}

SweepResult run_sweep(const StandardInstance& inst, const Config& cfg, const std::vector<double>& deltas,
                      const std::vector<std::uint64_t>& seeds, CipMode mode, int threads) {
  CipData clean = generate_cip_data(inst.truth, mode);
  SweepResult res;
  double eps = cfg.get_double("inversion.eps", 1e-6);
  std::string rule = cfg.get_string("inversion.eps_rule", "fixed");
  if (rule != "lcurve" && rule != "fixed") throw ConfigError("config: inversion.eps_rule must be lcurve or fixed");
  bool scan = rule == "lcurve" || cfg.get_bool("inversion.lcurve_report", true);
  if (scan && !deltas.empty() && !seeds.empty()) {
    std::size_t mid = deltas.size() / 2;
    CipData obs = noisy_data(cfg, clean, deltas[mid], seeds[0], mid + 1);
    InverseProblemSpec spec = inversion_spec(inst, obs, cfg, inversion_lambda(cfg, mode, deltas[mid]));
    res.lcurve = lcurve_scan(spec, cfg.get_doubles("inversion.eps_grid", {}), eps, threads);
    if (rule == "lcurve") eps = res.lcurve.eps;
  }

  std::size_t ntask = 1 + deltas.size() * seeds.size();
  std::vector<SweepRow> out(ntask);
  parallel_for(ntask, threads, [&](std::size_t t) {
    if (t == 0) {
      out[0] = run_point(inst, cfg, clean, 0.0, 0, 0, mode, eps);
      return;
    }
    std::size_t di = (t - 1) / seeds.size(), si = (t - 1) % seeds.size();
    out[t] = run_point(inst, cfg, clean, deltas[di], seeds[si], di + 1, mode, eps);
  });

  res.baseline = out[0];
  res.rows.assign(out.begin() + 1, out.end());
  GridSpec g = inst.grid;
  res.alpha_predicted =
      mode == CipMode::Complete ? 1.0 : holder_exponent(g.A[0], g.gamma, cfg.get_double("inversion.nu", 3));
  bool over_gamma = mode == CipMode::Incomplete;
  std::vector<double> d, e;
  seed_average(res.rows, over_gamma, d, e);
  double base = res.baseline.ok ? (over_gamma ? res.baseline.err_gamma : res.baseline.err_full) : 0.0;
  try {
    res.fit = fit_slope(d, e, base);
    res.fit_ok = true;
  } catch (const std::exception& ex) {
    res.fit_ok = false;
    res.fit_message = ex.what();
  }
  return res;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

}  // namespace

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream o;
  o << "delta,seed,mode,lambda,err_gamma,err_full\n";
  for (const SweepRow& row : r.rows)
    o << num(row.delta) << ',' << row.seed << ',' << to_string(row.mode) << ',' << num(row.lambda) << ','
      << num(row.err_gamma) << ',' << num(row.err_full) << '\n';
  return o.str();
}

std::string sweep_json(const SweepResult& r) {
  using nlohmann::json;
  auto jnum = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  auto jrow = [&](const SweepRow& row) {
    json j = {{"delta", row.delta},
              {"seed", row.seed},
              {"mode", to_string(row.mode)},
              {"lambda", row.lambda},
              {"eps", row.eps},
              {"err_gamma", jnum(row.err_gamma)},
              {"err_full", jnum(row.err_full)},
              {"rms_gamma", jnum(row.rms_gamma)},
              {"rms_outside", jnum(row.rms_outside)},
              {"residual", jnum(row.residual)},
              {"ok", row.ok}};
    if (!row.ok) j["message"] = row.message;
    return j;
  };
  json j;
  j["schema_version"] = 1;
  j["baseline"] = jrow(r.baseline);
  j["rows"] = json::array();
  for (const SweepRow& row : r.rows) j["rows"].push_back(jrow(row));
  j["fit"] = {{"ok", r.fit_ok},
              {"alpha_hat", jnum(r.fit.alpha_hat)},
              {"B_hat", jnum(r.fit.B_hat)},
              {"r2", jnum(r.fit.r2)},
              {"points", r.fit.points},
              {"alpha_predicted", r.alpha_predicted}};
  if (!r.fit_ok) j["fit"]["message"] = r.fit_message;
  if (!r.lcurve.points.empty()) {
    json pts = json::array();
    for (const LCurvePoint& p : r.lcurve.points)
      pts.push_back({{"eps", p.eps}, {"residual", jnum(p.residual)}, {"penalty", jnum(p.penalty)},
                     {"curvature", jnum(p.curvature)}, {"ok", p.ok}});
    j["lcurve"] = {{"eps", r.lcurve.eps}, {"corner", r.lcurve.corner}, {"points", pts}};
  }
  return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream o;
  o << f.rdbuf();
  return o.str();
}

}  // namespace mfgcip
