#include "mms.hpp"

#include <cmath>
#include <numbers>

using namespace mfgcip;

namespace mms {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double kappa = 0.3;

double ue(double x, double t) { return 0.5 * std::exp(-t) * std::cos(pi * x / 2) + 0.1 * x * t; }
double ue_t(double x, double t) { return -0.5 * std::exp(-t) * std::cos(pi * x / 2) + 0.1 * x; }
double ue_x(double x, double t) { return -0.25 * pi * std::exp(-t) * std::sin(pi * x / 2) + 0.1 * t; }
double ue_xx(double x, double t) { return -0.125 * pi * pi * std::exp(-t) * std::cos(pi * x / 2); }

double me(double x, double t) { return 1 + 0.3 * std::exp(-t / 2) * std::sin(pi * x / 2); }
double me_t(double x, double t) { return -0.15 * std::exp(-t / 2) * std::sin(pi * x / 2); }
double me_x(double x, double t) { return 0.15 * pi * std::exp(-t / 2) * std::cos(pi * x / 2); }
double me_xx(double x, double t) { return -0.075 * pi * pi * std::exp(-t / 2) * std::sin(pi * x / 2); }
// int_x^1 m dy
double me_tail(double x, double t) { return (1 - x) + 0.3 * std::exp(-t / 2) * (2 / pi) * std::cos(pi * x / 2); }

double a_of(double x) { return 0.5 + 0.1 * x; }
double b_of(double x) { return 0.4 + 0.1 * x; }
constexpr double s_const = 0.2;

Field space_of(const Field& st, int k) {
  Field f = time_slice(st, k);
  f.tag = DomainTag::space();
  return f;
}

}  // namespace

Problem make_1d(int N, int Nt) {
  Problem p;
  p.g.n = 1;
  p.g.A = {1.0, 1.0};
  p.g.T = 1.0;
  p.g.Nx = {N, 1};
  p.g.Nt = Nt;
  p.g.gamma = 1.0;
  p.g.validate();
  const GridSpec& g = p.g;
  p.coeffs.a = sample_space(g, [](double x, double) { return a_of(x); });
  p.coeffs.s = Field(g, DomainTag::spacetime(), s_const);
  KernelSpec& k = p.coeffs.kernel;
  k.spec = g;
  k.K1 = {1.0};
  k.K2.assign(std::size_t(g.nspace()) * g.nspace(), kappa);
  k.b = sample_space(g, [](double x, double) { return b_of(x); });
  k.M = k.bound();
  p.u_exact = sample_spacetime(g, [](double x, double, double t) { return ue(x, t); });
  p.m_exact = sample_spacetime(g, [](double x, double, double t) { return me(x, t); });
  p.f_u = sample_spacetime(g, [](double x, double, double t) {
    double br = me(x, t) + kappa * me_tail(x, t);
    return ue_t(x, t) + ue_xx(x, t) - a_of(x) * ue_x(x, t) * ue_x(x, t) / 2 + b_of(x) * br + s_const * me(x, t);
  });
  p.f_m = sample_spacetime(g, [](double x, double, double t) {
    // (a m u_x)_x with a' = 0.1
    double flux_x = 0.1 * me(x, t) * ue_x(x, t) + a_of(x) * me_x(x, t) * ue_x(x, t) + a_of(x) * me(x, t) * ue_xx(x, t);
    return me_t(x, t) - me_xx(x, t) - flux_x;
  });
  p.bc.u_lateral = p.u_exact;
  p.bc.m_lateral = p.m_exact;
  p.F = space_of(p.u_exact, Nt - 1);
  p.q = space_of(p.m_exact, 0);
  return p;
}

Problem make_2d(int N, int Nt) {
  Problem p;
  p.g.n = 2;
  p.g.A = {1.0, 1.0};
  p.g.T = 1.0;
  p.g.Nx = {N, N};
  p.g.Nt = Nt;
  p.g.gamma = 1.0;
  p.g.validate();
  const GridSpec& g = p.g;
  p.coeffs.a = Field(g, DomainTag::space(), 0.5);
  p.coeffs.s = Field(g, DomainTag::spacetime(), s_const);
  KernelSpec& k = p.coeffs.kernel;
  k.spec = g;
  k.K1.assign(std::size_t(g.nodes(1)) * g.nodes(1), 0.0);
  k.K2.assign(std::size_t(g.nspace()) * g.nspace(), 0.0);
  k.b = Field(g, DomainTag::space(), 0.0);
  k.M = 0;
  auto U = [](double x, double y, double t) { return 0.5 * std::exp(-t) * std::cos(pi * x / 2) * std::cos(pi * y / 2); };
  auto M = [](double x, double y, double t) { return 1 + 0.2 * std::exp(-t / 2) * std::sin(pi * x / 2) * std::cos(pi * y / 2); };
  p.u_exact = sample_spacetime(g, U);
  p.m_exact = sample_spacetime(g, M);
  p.f_u = sample_spacetime(g, [&](double x, double y, double t) {
    double u = U(x, y, t);
    double ux = -0.25 * pi * std::exp(-t) * std::sin(pi * x / 2) * std::cos(pi * y / 2);
    double uy = -0.25 * pi * std::exp(-t) * std::cos(pi * x / 2) * std::sin(pi * y / 2);
    double lap = -pi * pi / 2 * u;
    return -u + lap - 0.5 * (ux * ux + uy * uy) / 2 + s_const * M(x, y, t);
  });
  p.f_m = sample_spacetime(g, [&](double x, double y, double t) {
    double e = 0.2 * std::exp(-t / 2);
    double m = M(x, y, t);
    double mt = -0.5 * (m - 1);
    double mx = e * pi / 2 * std::cos(pi * x / 2) * std::cos(pi * y / 2);
    double my = -e * pi / 2 * std::sin(pi * x / 2) * std::sin(pi * y / 2);
    double lapm = -pi * pi / 2 * (m - 1);
    double u = U(x, y, t);
    double ux = -0.25 * pi * std::exp(-t) * std::sin(pi * x / 2) * std::cos(pi * y / 2);
    double uy = -0.25 * pi * std::exp(-t) * std::cos(pi * x / 2) * std::sin(pi * y / 2);
    double lapu = -pi * pi / 2 * u;
    double div = 0.5 * (mx * ux + my * uy + m * lapu);
    return mt - lapm - div;
  });
  p.bc.u_lateral = p.u_exact;
  p.bc.m_lateral = p.m_exact;
  p.F = space_of(p.u_exact, Nt - 1);
  p.q = space_of(p.m_exact, 0);
  return p;
}

double relative_floor(const Problem& p) {
  Field u = solve_hjb_backward(p.coeffs, p.m_exact, p.F, p.bc, {}, &p.f_u);
  Field m = solve_fp_forward(p.coeffs, p.u_exact, p.q, p.bc, {}, &p.f_m);
  double eu = (u - p.u_exact).max_abs() / p.u_exact.max_abs();
  double em = (m - p.m_exact).max_abs() / p.m_exact.max_abs();
  return std::max(eu, em);
}

Order ladder(const std::vector<int>& Ns, bool two_d) {
  Order o;
  for (int N : Ns) {
    Problem p = two_d ? make_2d(N, N) : make_1d(N, N);
    Field u = solve_hjb_backward(p.coeffs, p.m_exact, p.F, p.bc, {}, &p.f_u);
    Field m = solve_fp_forward(p.coeffs, p.u_exact, p.q, p.bc, {}, &p.f_m);
    o.err_hjb.push_back((u - p.u_exact).max_abs());
    o.err_fp.push_back((m - p.m_exact).max_abs());
  }
  std::size_t L = Ns.size();
  if (L >= 2) {
    double r = double(Ns[L - 1] - 1) / (Ns[L - 2] - 1);
    o.order_hjb = std::log(o.err_hjb[L - 2] / o.err_hjb[L - 1]) / std::log(r);
    o.order_fp = std::log(o.err_fp[L - 2] / o.err_fp[L - 1]) / std::log(r);
  }
  return o;
}

}  // namespace mms
