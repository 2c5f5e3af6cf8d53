#include "mfgcip/mfg_forward.hpp"

#include <cmath>
#include <filesystem>

#include "mfgcip/config.hpp"
#include "mfgcip/discrete.hpp"

namespace mfgcip {

void MfgCoefficients::validate(const GridSpec& g) const {
  require_tag(a, DomainKind::Space, "coefficient a");
  require_tag(s, DomainKind::Spacetime, "coefficient s");
  if (!(a.spec == g) || !(s.spec == g) || !(kernel.spec == g)) throw DomainMismatch("coefficients live on another grid");
  kernel.validate();
}

bool MfgCoefficients::coupled() const {
  if (s.max_abs() > 0) return true;
  return kernel.bound() > 0;
}

namespace {

double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

double max_abs(const std::vector<double>& x) {
  double m = 0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

void check_inputs(const MfgCoefficients& c, const Field& st, const Field& sp, const BoundaryConditions& bc,
                  const Field* forcing) {
  const GridSpec& g = st.spec;
  c.validate(g);
  require_tag(st, DomainKind::Spacetime, "solver input");
  if (!sp.tag.is_spatial() || !(sp.spec == g)) throw DomainMismatch("solver: endpoint data must be a spatial field");
  require_tag(bc.u_lateral, DomainKind::Spacetime, "boundary u");
  require_tag(bc.m_lateral, DomainKind::Spacetime, "boundary m");
  if (forcing) require_same_layout(st, *forcing, "forcing");
}

bool step_done(const StepOptions& opt, int sweep, double change, double scale) {
  if (opt.sweep_tol <= 0) return sweep + 1 >= opt.sweeps;
  if (sweep + 1 >= opt.max_sweeps) return true;
  return sweep + 1 >= opt.sweeps && change <= opt.sweep_tol * std::max(1.0, scale);
}

}  // namespace

Field solve_hjb_backward(const MfgCoefficients& c, const Field& m, const Field& F, const BoundaryConditions& bc,
                         const StepOptions& opt, const Field* forcing) {
  check_inputs(c, m, F, bc, forcing);
  const GridSpec& g = m.spec;
  LevelOps ops(g);
  int nsp = g.nspace();
  double tau = g.tau();
  ImplicitHeat heat(g, 1.0 / tau, 0.5);

  // coupling c = b bracket(m) + s m at every level
  Field coup = apply_interaction(c.kernel, m);
  for (std::size_t i = 0; i < coup.size(); ++i) coup.values[i] += c.s.values[i] * m.values[i];

  Field u(g, DomainTag::spacetime());
  std::copy(F.values.begin(), F.values.end(), u.values.begin() + std::size_t(g.Nt - 1) * nsp);
  const double* a = c.a.values.data();
  std::vector<double> rhs(nsp), cur(nsp), prev(nsp), mid(nsp);
  for (int k = g.Nt - 2; k >= 0; --k) {
    const double* up = u.values.data() + std::size_t(k + 1) * nsp;
    const double* c0 = coup.values.data() + std::size_t(k) * nsp;
    const double* c1 = coup.values.data() + std::size_t(k + 1) * nsp;
    const double* f0 = forcing ? forcing->values.data() + std::size_t(k) * nsp : nullptr;
    const double* f1 = forcing ? forcing->values.data() + std::size_t(k + 1) * nsp : nullptr;
    const double* bl = bc.u_lateral.values.data() + std::size_t(k) * nsp;
    for (int s = 0; s < nsp; ++s) cur[s] = ops.is_interior(s) ? up[s] : bl[s];
    for (int sweep = 0;; ++sweep) {
      for (int s = 0; s < nsp; ++s) mid[s] = 0.5 * (cur[s] + up[s]);
      for (int s : ops.interior()) {
        double r = up[s] / tau + 0.5 * ops.lap(up, s) - 0.5 * a[s] * ops.grad_sq(mid.data(), s) + 0.5 * (c0[s] + c1[s]);
        if (forcing) r -= 0.5 * (f0[s] + f1[s]);
        rhs[s] = r;
      }
      prev = cur;
      heat.solve(rhs, cur);
      if (step_done(opt, sweep, max_abs_diff(cur, prev), max_abs(cur))) break;
    }
    std::copy(cur.begin(), cur.end(), u.values.begin() + std::size_t(k) * nsp);
  }
  return u;
}

Field solve_fp_forward(const MfgCoefficients& c, const Field& u, const Field& q, const BoundaryConditions& bc,
                       const StepOptions& opt, const Field* forcing) {
  check_inputs(c, u, q, bc, forcing);
  const GridSpec& g = u.spec;
  LevelOps ops(g);
  int nsp = g.nspace();
  double tau = g.tau();
  ImplicitHeat heat(g, 1.0 / tau, 0.5);

  Field m(g, DomainTag::spacetime());
  std::copy(q.values.begin(), q.values.end(), m.values.begin());
  const double* a = c.a.values.data();
  std::vector<double> rhs(nsp), cur(nsp), prev(nsp), mmid(nsp), umid(nsp);
  for (int k = 0; k + 1 < g.Nt; ++k) {
    const double* mk = m.values.data() + std::size_t(k) * nsp;
    const double* u0 = u.values.data() + std::size_t(k) * nsp;
    const double* u1 = u.values.data() + std::size_t(k + 1) * nsp;
    const double* f0 = forcing ? forcing->values.data() + std::size_t(k) * nsp : nullptr;
    const double* f1 = forcing ? forcing->values.data() + std::size_t(k + 1) * nsp : nullptr;
    const double* bl = bc.m_lateral.values.data() + std::size_t(k + 1) * nsp;
    for (int s = 0; s < nsp; ++s) {
      umid[s] = 0.5 * (u0[s] + u1[s]);
      cur[s] = ops.is_interior(s) ? mk[s] : bl[s];
    }
    for (int sweep = 0;; ++sweep) {
      for (int s = 0; s < nsp; ++s) mmid[s] = 0.5 * (mk[s] + cur[s]);
      for (int s : ops.interior()) {
        double r = mk[s] / tau + 0.5 * ops.lap(mk, s) + ops.drift(a, mmid.data(), umid.data(), s);
        if (forcing) r += 0.5 * (f0[s] + f1[s]);
        rhs[s] = r;
      }
      prev = cur;
      heat.solve(rhs, cur);
      if (step_done(opt, sweep, max_abs_diff(cur, prev), max_abs(cur))) break;
    }
    std::copy(cur.begin(), cur.end(), m.values.begin() + std::size_t(k + 1) * nsp);
  }
  return m;
}

namespace {

void check_corners(const Field& F, const Field& q, const BoundaryConditions& bc) {
  const GridSpec& g = F.spec;
  LevelOps ops(g);
  int nsp = g.nspace();
  const double* uT = bc.u_lateral.values.data() + std::size_t(g.Nt - 1) * nsp;
  const double* m0 = bc.m_lateral.values.data();
  double su = std::max(1.0, F.max_abs()), sm = std::max(1.0, q.max_abs());
  for (int s = 0; s < nsp; ++s) {
    if (ops.is_interior(s)) continue;
    if (std::abs(F.values[s] - uT[s]) > 1e-10 * su)
      throw IncompatibleData("terminal value F disagrees with the lateral data of u at t = T");
    if (std::abs(q.values[s] - m0[s]) > 1e-10 * sm)
      throw IncompatibleData("initial density q disagrees with the lateral data of m at t = 0");
  }
}

}  // namespace

MfgSolution picard_solve(const MfgCoefficients& c, const Field& F, const Field& q, const BoundaryConditions& bc,
                         const PicardOptions& opt) {
  const GridSpec& g = F.spec;
  c.validate(g);
  if (bc.type != BcType::Dirichlet) throw std::invalid_argument("only Dirichlet lateral data is supported");
  if (opt.theta < 0 || opt.theta > 1) throw std::invalid_argument("picard: theta must lie in [0, 1]");
  check_corners(F, q, bc);

  LevelOps ops(g);
  int nsp = g.nspace();
  Field m(g, DomainTag::spacetime());
  for (int k = 0; k < g.Nt; ++k)
    for (int s = 0; s < nsp; ++s)
      m.values[std::size_t(k) * nsp + s] = ops.is_interior(s) ? q.values[s] : bc.m_lateral.values[std::size_t(k) * nsp + s];

  double theta = (!c.coupled() && opt.theta > 0) ? 1.0 : opt.theta;
  MfgSolution sol;
  int stalled = 0;
  for (int it = 0; it < opt.max_iters; ++it) {
    Field u = solve_hjb_backward(c, m, F, bc, opt.step);
    Field next = solve_fp_forward(c, u, q, bc, opt.step);
    double gap = norm_L2(next - m) / std::max(norm_L2(next), 1e-300);
    sol.picard_residuals.push_back(gap);
    if (!std::isfinite(gap)) throw Diverged("picard: non-finite iterate", sol.picard_residuals);
    if (gap <= opt.tol) {
      sol.u = std::move(u);
      sol.m = std::move(m);
      return sol;
    }
    if (it > 0 && gap >= sol.picard_residuals[it - 1] * (1 - 1e-12)) ++stalled;
    else stalled = 0;
    if (stalled >= 5) throw Diverged("picard: fixed-point gap stopped decreasing", sol.picard_residuals);
    for (std::size_t i = 0; i < m.size(); ++i) m.values[i] = (1 - theta) * m.values[i] + theta * next.values[i];
  }
  throw Diverged("picard: no convergence within max_iters", sol.picard_residuals);
}

std::string to_string(CipMode m) { return m == CipMode::Complete ? "complete" : "incomplete"; }

CipMode parse_cip_mode(const std::string& s) {
  if (s == "complete") return CipMode::Complete;
  if (s == "incomplete") return CipMode::Incomplete;
  throw std::invalid_argument("unknown data mode '" + s + "'");
}

bool face_observed(CipMode mode, int axis, int sign) { return mode == CipMode::Complete || !(axis == 1 && sign < 0); }

const FaceData* CipData::face(int axis, int sign) const {
  for (const auto& f : faces)
    if (f.axis == axis && f.sign == sign) return &f;
  return nullptr;
}

CipData generate_cip_data(const MfgSolution& sol, CipMode mode) {
  const GridSpec& g = sol.u.spec;
  CipData d;
  d.mode = mode;
  auto as_space = [](Field f) {
    f.tag = DomainTag::space();
    return f;
  };
  d.p = as_space(time_slice(sol.u, 0));
  d.F = as_space(time_slice(sol.u, g.Nt - 1));
  d.q = as_space(time_slice(sol.m, 0));
  d.G = as_space(time_slice(sol.m, g.Nt - 1));
  for (auto [axis, sign] : lateral_faces(g)) {
    if (!face_observed(mode, axis, sign)) continue;
    FaceData f;
    f.axis = axis;
    f.sign = sign;
    f.f0 = face_trace(sol.u, axis, sign);
    f.f1 = normal_derivative_trace(sol.u, axis, sign);
    f.g0 = face_trace(sol.m, axis, sign);
    f.g1 = normal_derivative_trace(sol.m, axis, sign);
    d.faces.push_back(std::move(f));
  }
  return d;
}

void save_cip_data(const CipData& d, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto path = [&](const std::string& n) { return (fs::path(dir) / n).string(); };
  Config c;
  c.set("data.mode", to_string(d.mode));
  write_field(d.p, path("p.field"));
  write_field(d.q, path("q.field"));
  write_field(d.F, path("F.field"));
  write_field(d.G, path("G.field"));
  std::string faces;
  for (const auto& f : d.faces) {
    std::string tag = std::to_string(f.axis) + (f.sign > 0 ? "p" : "m");
    faces += (faces.empty() ? "" : ",") + tag;
    write_field(f.f0, path("f0_" + tag + ".field"));
    write_field(f.f1, path("f1_" + tag + ".field"));
    write_field(f.g0, path("g0_" + tag + ".field"));
    write_field(f.g1, path("g1_" + tag + ".field"));
  }
  c.set("data.faces", faces);
  c.save(path("data.ini"));
}

CipData load_cip_data(const std::string& dir) {
  namespace fs = std::filesystem;
  auto path = [&](const std::string& n) { return (fs::path(dir) / n).string(); };
  Config c = Config::load(path("data.ini"));
  CipData d;
  d.mode = parse_cip_mode(c.require_string("data.mode"));
  d.p = read_field(path("p.field"));
  d.q = read_field(path("q.field"));
  d.F = read_field(path("F.field"));
  d.G = read_field(path("G.field"));
  std::string faces = c.get_string("data.faces", "");
  std::size_t pos = 0;
  while (pos < faces.size()) {
    std::size_t e = faces.find(',', pos);
    std::string tag = faces.substr(pos, e == std::string::npos ? std::string::npos : e - pos);
    pos = e == std::string::npos ? faces.size() : e + 1;
    if (tag.size() != 2) throw ConfigError("data: bad face tag '" + tag + "'");
    FaceData f;
    f.axis = tag[0] - '0';
    f.sign = tag[1] == 'p' ? 1 : -1;
    f.f0 = read_field(path("f0_" + tag + ".field"));
    f.f1 = read_field(path("f1_" + tag + ".field"));
    f.g0 = read_field(path("g0_" + tag + ".field"));
    f.g1 = read_field(path("g1_" + tag + ".field"));
    d.faces.push_back(std::move(f));
  }
  return d;
}

}  // namespace mfgcip
