#include "mfgcip/transform.hpp"

#include <cmath>

namespace mfgcip {

DiffTriple diff_triple(const MfgSolution& s1, const Field& b1, const MfgSolution& s2, const Field& b2) {
  return {s1.u - s2.u, s1.m - s2.m, b1 - b2};
}

namespace {

Field as_space(Field f) {
  f.tag = DomainTag::space();
  return f;
}

Field slice(const Field& f, int k) { return as_space(time_slice(f, k)); }

Field divide(const Field& a, const Field& b) {
  require_same_layout(a, b, "divide");
  Field r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] /= b.values[i];
  return r;
}

Field dot(const std::vector<Field>& a, const std::vector<Field>& b) {
  Field r = hadamard(a[0], b[0]);
  for (std::size_t i = 1; i < a.size(); ++i) r += hadamard(a[i], b[i]);
  return r;
}

// Broadcast a spatial field over time.
Field over_time(const Field& sp, const GridSpec& g) {
  Field r(g, DomainTag::spacetime());
  int nsp = g.nspace();
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] = sp.values[i % nsp];
  return r;
}

Field abs_of(Field f) {
  for (double& v : f.values) v = std::abs(v);
  return f;
}

}  // namespace

PQ build_pq_coefficients(const MfgSolution& s1, const MfgSolution& s2, const MfgCoefficients& c2) {
  const GridSpec& g = s2.u.spec;
  PQ out;
  out.rho = bracket(c2.kernel, s2.m);
  Field a = over_time(c2.a, g);
  std::vector<Field> gu = gradient(s1.u + s2.u);
  std::vector<Field> grho = gradient(out.rho);
  for (int i = 0; i < g.n; ++i) {
    Field Pi = 2.0 * divide(grho[i], out.rho) - 0.5 * hadamard(a, gu[i]);
    out.P.push_back(std::move(Pi));
  }
  Field num = dt(out.rho) + laplacian(out.rho) - 0.5 * hadamard(a, dot(gu, grho));
  out.Q = divide(num, out.rho);
  return out;
}

EndpointFields endpoint_fields(const CipData& d1, const CipData& d2, const Field& b1, const PQ& pq,
                               const MfgCoefficients& c2) {
  const GridSpec& g = d1.p.spec;
  int last = g.Nt - 1;
  EndpointFields e;
  auto W = [&](const Field& ut, const Field& mt, int k) {
    Field rho = slice(pq.rho, k);
    Field ub = divide(ut, rho);
    std::vector<Field> gub = gradient(ub);
    std::vector<Field> P;
    for (const Field& Pi : pq.P) P.push_back(slice(Pi, k));
    Field src = hadamard(b1, bracket(c2.kernel, mt)) + hadamard(slice(c2.s, k), mt);
    return -1.0 * laplacian(ub) - dot(P, gub) - hadamard(slice(pq.Q, k), ub) - divide(src, rho);
  };
  auto Z = [&](const Field& mt, const Field& m1, const Field& u2, const Field& ut) {
    std::vector<Field> g2 = gradient(u2), gt = gradient(ut), flux;
    for (int i = 0; i < g.n; ++i) flux.push_back(hadamard(c2.a, hadamard(mt, g2[i]) + hadamard(m1, gt[i])));
    return laplacian(mt) + divergence(flux);
  };
  Field pt = d1.p - d2.p, Ft = d1.F - d2.F, qt = d1.q - d2.q, Gt = d1.G - d2.G;
  e.W0 = W(pt, qt, 0);
  e.WT = W(Ft, Gt, last);
  e.Z0 = Z(qt, d1.q, d2.p, pt);
  e.ZT = Z(Gt, d1.G, d2.F, Ft);
  return e;
}

TransformedFields make_vw(const DiffTriple& d, const PQ& pq, const EndpointFields& e) {
  const GridSpec& g = d.u.spec;
  TransformedFields tf;
  tf.ubar = divide(d.u, pq.rho);
  tf.vbar = dt(tf.ubar);
  tf.wbar = dt(d.m);
  tf.v = tf.vbar;
  tf.w = tf.wbar;
  int nsp = g.nspace();
  for (int k = 0; k < g.Nt; ++k) {
    double s = g.time(k) / g.T;
    for (int i = 0; i < nsp; ++i) {
      std::size_t idx = std::size_t(k) * nsp + i;
      tf.v.values[idx] -= e.W0.values[i] * (1 - s) + e.WT.values[i] * s;
      tf.w.values[idx] -= e.Z0.values[i] * (1 - s) + e.ZT.values[i] * s;
    }
  }
  return tf;
}

Field cumulative_time_integral(const Field& f) {
  require_tag(f, DomainKind::Spacetime, "cumulative_time_integral");
  const GridSpec& g = f.spec;
  int nsp = g.nspace();
  double tau = g.tau();
  Field r(g, f.tag);
  for (int k = 1; k < g.Nt; ++k)
    for (int i = 0; i < nsp; ++i) {
      std::size_t a = std::size_t(k) * nsp + i, b = std::size_t(k - 1) * nsp + i;
      r.values[a] = r.values[b] + 0.5 * tau * (f.values[a] + f.values[b]);
    }
  return r;
}

ResidualBounds residual_bounds(const TransformedFields& tf, const CipData& d1, const CipData& d2, double C1) {
  const GridSpec& g = tf.v.spec;
  ResidualBounds rb;
  rb.C1 = C1;
  auto grad_abs = [&](const Field& f) {
    std::vector<Field> gr = gradient(f);
    Field r = hadamard(gr[0], gr[0]);
    for (int i = 1; i < g.n; ++i) r += hadamard(gr[i], gr[i]);
    for (double& v : r.values) v = std::sqrt(v);
    return r;
  };
  // Unit kernel: cross-section integral plus tail integral in x1.
  KernelSpec ones;
  ones.spec = g;
  ones.K1.assign(std::size_t(g.nodes(1)) * g.nodes(1), 1.0);
  ones.K2.assign(std::size_t(g.nspace()) * g.nspace(), 1.0);
  ones.b = Field(g, DomainTag::space(), 1.0);
  Field aw = abs_of(tf.w), awv = cumulative_time_integral(aw);
  Field lapv = laplacian(tf.v);
  Field gv = grad_abs(tf.v), gw = grad_abs(tf.w);

  rb.lhs_v = abs_of(dt(tf.v) + lapv);
  rb.rhs_v = gv + abs_of(tf.v) + bracket(ones, aw) + bracket(ones, awv);
  rb.lhs_w = abs_of(dt(tf.w) - laplacian(tf.w));
  Field alapv = abs_of(lapv);
  rb.rhs_w = gw + aw + cumulative_time_integral(gw + aw) + gv + cumulative_time_integral(gv) + alapv +
             cumulative_time_integral(alapv);
  auto excess = [&](const Field& lhs, const Field& rhs) {
    Field x = lhs;
    for (std::size_t i = 0; i < x.size(); ++i) x.values[i] = std::max(0.0, lhs.values[i] - C1 * rhs.values[i]);
    return norm_L2(x);
  };
  rb.X1_L2 = excess(rb.lhs_v, rb.rhs_v);
  rb.X2_L2 = excess(rb.lhs_w, rb.rhs_w);
  double s = 0;
  for (const Field& f : {d1.p - d2.p, d1.q - d2.q, d1.F - d2.F, d1.G - d2.G}) {
    double h = norm_Hk_space(f, 4);
    s += h * h;
  }
  rb.data_norm = std::sqrt(s);
  return rb;
}

}  // namespace mfgcip
