#include "mfgcip/carleman.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace mfgcip {

void CarlemanParams::validate() const {
  if (!(lambda > 1)) throw CarlemanError("carleman: lambda must exceed 1");
  if (!(nu > 2)) throw CarlemanError("carleman: nu must exceed 2");
}

double psi(const GridSpec& g, double x1) {
  double tol = 1e-12 * g.A[0];
  if (x1 < -g.A[0] - tol || x1 > g.A[0] + tol) throw CarlemanError("psi: x1 lies outside [-A1, A1]");
  return x1 + g.A[0] + 2;
}

Field psi_field(const GridSpec& g) {
  return sample_space(g, [&](double x1, double) { return psi(g, x1); });
}

Field log_cwf(const GridSpec& g, double lambda, double nu) {
  return sample_space(g, [&](double x1, double) { return 2 * lambda * std::pow(psi(g, x1), nu); });
}

Field cwf_scaled(const GridSpec& g, double lambda, double nu) {
  double top = std::pow(2 * g.A[0] + 2, nu);
  return sample_space(g, [&](double x1, double) { return std::exp(2 * lambda * (std::pow(psi(g, x1), nu) - top)); });
}

namespace {

// Node-wise ingredients shared by V, U and the slack.
struct Parts {
  GridSpec g;
  int n;
  std::vector<double> psi_s, phi_s;  // per spatial node
  Field u, ut;
  std::vector<Field> ux;
  std::vector<std::vector<Field>> uxx;
  Parts(const Field& f, const CarlemanParams& p, bool hessian) : g(f.spec), n(f.spec.n), u(f) {
    require_tag(f, DomainKind::Spacetime, "carleman");
    Field ps = psi_field(g);
    Field ph = cwf_scaled(g, p.lambda, p.nu);
    psi_s = ps.values;
    phi_s = ph.values;
    ut = dt(u);
    ux = gradient(u);
    if (hessian) {
      uxx.resize(n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) uxx[a].push_back(a == b ? second_partial(u, a) : partial(ux[a], b));
    }
  }
};

}  // namespace

Field eval_V(const Field& u, const CarlemanParams& p) {
  Parts P(u, p, false);
  const double lam = p.lambda, nu = p.nu;
  const double c = 2 * lam / (2 * lam + 1), d = 1 / (2 * lam + 1);
  int nsp = P.g.nspace();
  Field V(P.g, DomainTag::spacetime());
  for (std::size_t idx = 0; idx < V.size(); ++idx) {
    int s = int(idx % nsp);
    double ps = P.psi_s[s], phi = P.phi_s[s], uu = u.values[idx];
    double ux1 = P.ux[0].values[idx];
    double z = ux1 + lam * nu * std::pow(ps, nu - 1) * uu;
    double tang = 0, grad2 = ux1 * ux1;
    for (int a = 1; a < P.n; ++a) {
      double v = P.ux[a].values[idx];
      tang += v * v;
      grad2 += v * v;
    }
    double kap = 1 - 2 * std::pow(ps, -nu) * (nu - 1) / (lam * nu);
    double v5 = (z * z + tang) * std::pow(ps, 1 - nu) * phi - lam * lam * nu * nu * std::pow(ps, nu - 1) * kap * uu * uu * phi;
    V.values[idx] = c * v5 + lam * lam / (2 * lam + 1) * uu * uu * phi + d * grad2 * phi;
  }
  return V;
}

std::vector<Field> eval_U(const Field& u, const CarlemanParams& p) {
  Parts P(u, p, true);
  const double lam = p.lambda, nu = p.nu;
  const double c = 2 * lam / (2 * lam + 1), d = 1 / (2 * lam + 1);
  int nsp = P.g.nspace(), n = P.n;
  std::vector<Field> U(n, Field(P.g, DomainTag::spacetime()));
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    int s = int(idx % nsp);
    double ps = P.psi_s[s], phi = P.phi_s[s], uu = u.values[idx], ut = P.ut.values[idx];
    double ux1 = P.ux[0].values[idx];
    double pn1 = std::pow(ps, nu - 1);
    double z = ux1 + lam * nu * pn1 * uu;
    double kap = 1 - 2 * std::pow(ps, -nu) * (nu - 1) / (lam * nu);
    double tang = 0;
    for (int a = 1; a < n; ++a) tang += P.ux[a].values[idx] * P.ux[a].values[idx];
    double u1 = -2 * ut * z * phi * std::pow(ps, 1 - nu) - 2 * lam * nu * z * z * phi + 2 * lam * nu * tang * phi -
                2 * std::pow(lam * nu, 3) * std::pow(ps, 2 * nu - 2) * kap * uu * uu * phi - lam * ux1 * uu * phi +
                lam * lam * nu * pn1 * uu * uu * phi;
    double u1d = -2 * ut * ux1 * phi;
    for (int i = 1; i < n; ++i) u1d += -2 * P.uxx[0][i].values[idx] * P.ux[i].values[idx] * phi;
    U[0].values[idx] = c * u1 + d * u1d;
    for (int i = 1; i < n; ++i) {
      double uxi = P.ux[i].values[idx];
      double ui = -4 * lam * nu * z * uxi * phi - 2 * ut * uxi * phi * std::pow(ps, 1 - nu) - lam * uxi * uu * phi;
      double uid = -2 * ut * uxi * phi + 2 * P.uxx[0][0].values[idx] * uxi * phi;
      for (int j = 1; j < n; ++j)
        uid += (P.uxx[j][j].values[idx] * uxi - P.uxx[i][j].values[idx] * P.ux[j].values[idx]) * phi;
      U[i].values[idx] = c * ui + d * uid;
    }
  }
  return U;
}

Field reflect_time(const Field& u) {
  require_tag(u, DomainKind::Spacetime, "reflect_time");
  Field r(u.spec, u.tag);
  int nsp = u.spec.nspace(), Nt = u.spec.Nt;
  for (int k = 0; k < Nt; ++k)
    std::copy_n(u.values.begin() + std::size_t(Nt - 1 - k) * nsp, nsp, r.values.begin() + std::size_t(k) * nsp);
  return r;
}

namespace {

PointwiseReport pointwise_minus(const Field& u, const CarlemanParams& p, double C) {
  Parts P(u, p, true);
  const double lam = p.lambda;
  int nsp = P.g.nspace(), n = P.n;
  Field dV = dt(eval_V(u, p));
  Field divU = divergence(eval_U(u, p));
  PointwiseReport r;
  r.lambda = lam;
  r.C = C;
  r.slack = Field(P.g, DomainTag::spacetime());
  std::size_t neg = 0;
  r.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    int s = int(idx % nsp);
    double phi = P.phi_s[s], ut = P.ut.values[idx], uu = u.values[idx];
    double lap = 0, hess = 0, grad2 = 0;
    for (int a = 0; a < n; ++a) {
      lap += P.uxx[a][a].values[idx];
      grad2 += P.ux[a].values[idx] * P.ux[a].values[idx];
      for (int b = 0; b < n; ++b) hess += P.uxx[a][b].values[idx] * P.uxx[a][b].values[idx];
    }
    double L = ut - lap;
    double sl = L * L * phi - C / lam * (ut * ut + hess) * phi - C * (lam * grad2 + lam * lam * lam * uu * uu) * phi -
                dV.values[idx] - divU.values[idx];
    r.slack.values[idx] = sl;
    r.min_slack = std::min(r.min_slack, sl);
    if (sl < 0) ++neg;
  }
  r.neg_fraction = double(neg) / double(u.size());
  return r;
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double safe_log(double v) { return v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }

IntegralReport integral_minus(const Field& u, const CarlemanParams& p) {
  const GridSpec& g = u.spec;
  Parts P(u, p, true);
  const double lam = p.lambda, nu = p.nu;
  int nsp = g.nspace(), n = P.n;
  Field Lsq(g, DomainTag::spacetime()), hess_t(g, DomainTag::spacetime()), hess_f(g, DomainTag::spacetime()),
      grad(g, DomainTag::spacetime()), zero(g, DomainTag::spacetime());
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    int s = int(idx % nsp);
    double phi = P.phi_s[s], ut = P.ut.values[idx], uu = u.values[idx];
    double lap = 0, ht = 0, hf = 0, g2 = 0;
    for (int a = 0; a < n; ++a) {
      lap += P.uxx[a][a].values[idx];
      g2 += P.ux[a].values[idx] * P.ux[a].values[idx];
      for (int b = 0; b < n; ++b) {
        double h2 = P.uxx[a][b].values[idx] * P.uxx[a][b].values[idx];
        hf += h2;
        if (a >= 1 && b >= 1) ht += h2;
      }
    }
    double L = ut - lap;
    Lsq.values[idx] = L * L * phi;
    hess_t.values[idx] = (ut * ut + ht) * phi;
    hess_f.values[idx] = (ut * ut + hf) * phi;
    grad.values[idx] = g2 * phi;
    zero.values[idx] = uu * uu * phi;
  }
  IntegralReport r;
  r.lambda = lam;
  r.lhs_pde = integrate(Lsq);
  double T1 = integrate(hess_t) / lam, T1f = integrate(hess_f) / lam;
  double T2 = lam * integrate(grad), T3 = lam * lam * lam * integrate(zero);
  r.interior_terms = {{"hessian_time_over_lambda", 0, T1}, {"lambda_grad", 0, T2}, {"lambda3_u", 0, T3}};
  r.interior_sum = T1 + T2 + T3;
  r.interior_sum_full = T1f + T2 + T3;

  double top = std::pow(2 * g.A[0] + 2, nu);
  double lw_minus = 3 * std::pow(2.0, nu) * lam - 2 * lam * top;
  double lw_rest = 3 * lam * top - 2 * lam * top;
  double log_b = -std::numeric_limits<double>::infinity();
  for (auto [axis, sign] : lateral_faces(g)) {
    Field tr = face_trace(u, axis, sign);
    Field dn = normal_derivative_trace(u, axis, sign);
    double h21 = norm_H21_lateral(tr, &dn);
    double h10 = norm_H10_lateral(dn);
    bool minus = axis == 1 && sign < 0;
    double lw = minus ? lw_minus : lw_rest;
    std::string face = "face" + std::to_string(axis) + (sign > 0 ? "+" : "-");
    r.boundary_terms.push_back({face + "_H21", lw, h21 * h21});
    r.boundary_terms.push_back({face + "_dn_H10", lw, h10 * h10});
    log_b = log_add(log_b, lw + safe_log(h21 * h21 + h10 * h10));
  }
  r.log_boundary_sum = log_b;
  auto admissible = [&](double J) {
    if (safe_log(J) <= log_b) return std::numeric_limits<double>::infinity();
    double B = std::exp(log_b);
    return r.lhs_pde / (J - B);
  };
  r.admissible_C = admissible(r.interior_sum);
  r.admissible_C_full = admissible(r.interior_sum_full);

  Field dV = dt(eval_V(u, p));
  Field divU = divergence(eval_U(u, p));
  r.zero_C_slack = r.lhs_pde - integrate(dV) - integrate(divU);
  return r;
}

void require_periodic(const Field& u) {
  require_tag(u, DomainKind::Spacetime, "check_integral");
  int nsp = u.spec.nspace(), Nt = u.spec.Nt;
  double scale = std::max(u.max_abs(), 1e-300);
  for (int s = 0; s < nsp; ++s)
    if (std::abs(u.values[s] - u.values[std::size_t(Nt - 1) * nsp + s]) > 1e-12 * scale)
      throw CarlemanError("check_integral: u(., 0) must equal u(., T)");
}

}  // namespace

PointwiseReport check_pointwise(const Field& u, const CarlemanParams& p, HeatSign sign, double C) {
  p.validate();
  if (sign == HeatSign::Minus) return pointwise_minus(u, p, C);
  PointwiseReport r = pointwise_minus(reflect_time(u), p, C);
  r.slack = reflect_time(r.slack);
  return r;
}

IntegralReport check_integral(const Field& u, const CarlemanParams& p, HeatSign sign) {
  p.validate();
  require_periodic(u);
  return integral_minus(sign == HeatSign::Minus ? u : reflect_time(u), p);
}

double cancellation_ratio(const Field& u, const CarlemanParams& p) {
  Field dV = dt(eval_V(u, p));
  Field absdV = dV;
  for (double& v : absdV.values) v = std::abs(v);
  double den = integrate(absdV);
  return den > 0 ? std::abs(integrate(dV)) / den : 0.0;
}

double gauss_residual(const Field& u, const CarlemanParams& p) {
  auto U = eval_U(u, p);
  Field divU = divergence(U);
  double vol = integrate(divU);
  Field absdiv = divU;
  for (double& v : absdiv.values) v = std::abs(v);
  double flux = 0;
  for (auto [axis, sign] : lateral_faces(u.spec)) flux += sign * integrate(face_trace(U[axis - 1], axis, sign));
  double den = std::max(std::abs(flux), integrate(absdiv));
  return den > 0 ? std::abs(vol - flux) / den : 0.0;
}

double holder_exponent(double A1, double gamma, double nu0) {
  if (!(A1 > 0)) throw CarlemanError("holder_exponent: A1 must be positive");
  if (!(gamma > 0 && gamma < 2 * A1)) throw CarlemanError("holder_exponent: gamma must lie in (0, 2*A1)");
  double num = std::pow(gamma + 2, nu0) - std::pow(2.0, nu0);
  return num / (num + std::pow(2 * A1 + 2, nu0));
}

double lambda_of_delta(double delta, double A1, double gamma, double nu0) {
  if (!(delta > 0 && delta < 1)) throw CarlemanError("lambda_of_delta: delta must lie in (0, 1)");
  if (!(gamma > 0 && gamma < 2 * A1)) throw CarlemanError("lambda_of_delta: gamma must lie in (0, 2*A1)");
  double d = 1.5 * (std::pow(gamma + 2, nu0) - std::pow(2.0, nu0) + std::pow(2 * A1 + 2, nu0));
  return std::log(1 / delta) / d;
}

std::vector<Field> carleman_battery(const GridSpec& g, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto unif = [&]() { return double(rng() >> 11) * 0x1.0p-53 * 2 - 1; };
  const double pi = std::numbers::pi, T = g.T;
  std::vector<Field> out;
  for (int m = 0; m < count; ++m) {
    double c[6], w[4];
    for (double& v : c) v = unif();
    for (double& v : w) v = unif();
    int k1 = 1 + int(rng() % 3), k2 = 1 + int(rng() % 3);
    auto fn = [&](double x, double y, double t) {
      double X = (x + g.A[0]) / (2 * g.A[0]);  // in [0, 1]
      double Y = g.n > 1 ? (y + g.A[1]) / (2 * g.A[1]) : 0.0;
      double sx = std::cos(pi * (k2 * X + w[0])) * (1 + 0.3 * w[1] * std::cos(pi * Y));
      double sx2 = (X * X + w[2] * X) * (1 + 0.2 * std::sin(pi * Y * w[3]));
      return c[0] * std::sin(k1 * pi * t / T) * sx + c[1] * (t * (T - t) / (T * T)) * sx2 +
             c[2] * std::cos(2 * pi * t / T) * std::sin(pi * X + w[3]) + c[3] * std::sin(2 * pi * k1 * t / T) * X +
             0.5 * c[4] * std::cos(pi * X * k2) + 0.2 * c[5] * std::sin(3 * pi * t / T) * std::cos(pi * (X + Y));
    };
    Field u = sample_spacetime(g, fn);
    // Exact periodicity on the grid.
    int nsp = g.nspace();
    std::copy_n(u.values.begin(), nsp, u.values.begin() + std::size_t(g.Nt - 1) * nsp);
    out.push_back(std::move(u));
  }
  return out;
}

double calibrate_lambda0(const std::vector<Field>& battery, double nu, double lo, double hi, double tol) {
  auto verdict = [&](double lam) {
    CarlemanParams p;
    p.lambda = lam;
    p.nu = nu;
    for (const Field& u : battery)
      for (HeatSign s : {HeatSign::Minus, HeatSign::Plus}) {
        IntegralReport r = check_integral(u, p, s);
        if (!(r.admissible_C > 0) || r.zero_C_slack < 0) return false;
      }
    return true;
  };
  double a = lo + 1e-6;
  if (verdict(a)) return a;
  if (!verdict(hi)) throw CarlemanError("calibrate_lambda0: estimate fails even at the upper bound");
  double b = hi;
  while (b - a > tol) {
    double mid = 0.5 * (a + b);
    if (verdict(mid)) b = mid;
    else a = mid;
  }
  return b;
}

}  // namespace mfgcip
