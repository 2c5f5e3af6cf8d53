#include <doctest.h>

#include <cmath>

#include "mfgcip/harness.hpp"
#include "mfgcip/transform.hpp"

using namespace mfgcip;

namespace {

GridSpec line(int N, int Nt) {
  GridSpec g;
  g.n = 1;
  g.A = {1.0, 1.0};
  g.Nx = {N, 1};
  g.Nt = Nt;
  g.gamma = 1.0;
  return g;
}

Field at_time(const Field& f, int k) {
  Field s = time_slice(f, k);
  s.tag = DomainTag::space();
  return s;
}

Field dot(const std::vector<Field>& a, const std::vector<Field>& b) {
  Field r = hadamard(a[0], b[0]);
  for (std::size_t i = 1; i < a.size(); ++i) r += hadamard(a[i], b[i]);
  return r;
}

// Smooth fields standing in for two solutions; the substitution is pure algebra.
struct Pair {
  MfgSolution s1, s2;
  MfgCoefficients c2;
};

Pair analytic_pair(int N) {
  GridSpec g = line(N, N);
  Pair p;
  p.s1.u = sample_spacetime(g, [](double x, double, double t) { return std::sin(x + t) + 0.2 * x * x; });
  p.s2.u = sample_spacetime(g, [](double x, double, double t) { return std::cos(0.5 * x) * (1 + 0.3 * t); });
  p.s1.m = sample_spacetime(g, [](double x, double, double t) { return 1 + 0.2 * std::sin(x - t); });
  p.s2.m = sample_spacetime(g, [](double x, double, double t) { return 1.2 + 0.3 * x * t; });
  p.c2.a = sample_space(g, [](double x, double) { return 0.5 + 0.1 * x; });
  p.c2.s = Field(g, DomainTag::spacetime(), 0.1);
  p.c2.kernel = gaussian_kernel(g, {0.5}, Field(g, DomainTag::space(), 0.5));
  return p;
}

// |u~_t + Lap u~ - (a/2) grad(u1 + u2) . grad u~ - rho (ubar_t + Lap ubar + P . grad ubar + Q ubar)|, relative
double substitution_gap(int N) {
  Pair p = analytic_pair(N);
  const GridSpec& g = p.s1.u.spec;
  PQ pq = build_pq_coefficients(p.s1, p.s2, p.c2);
  Field ut = p.s1.u - p.s2.u;
  Field a(g, DomainTag::spacetime());
  for (std::size_t i = 0; i < a.size(); ++i) a.values[i] = p.c2.a.values[i % g.nspace()];
  Field direct = dt(ut) + laplacian(ut) - 0.5 * hadamard(a, dot(gradient(p.s1.u + p.s2.u), gradient(ut)));
  Field ub = ut;
  for (std::size_t i = 0; i < ub.size(); ++i) ub.values[i] /= pq.rho.values[i];
  Field inner = dt(ub) + laplacian(ub) + dot(pq.P, gradient(ub)) + hadamard(pq.Q, ub);
  return (direct - hadamard(pq.rho, inner)).max_abs() / direct.max_abs();
}

struct Endpoints {
  double v0, vT, w0, wT;
};

Endpoints endpoint_errors(int N) {
  Config cfg = default_config();
  cfg.set("grid.Nx", std::to_string(N));
  cfg.set("grid.Nt", std::to_string(N));
  StandardInstance inst = build_instance(cfg);
  CipData d1 = generate_cip_data(inst.truth, CipMode::Complete);
  CipData d2 = generate_cip_data(inst.ref, CipMode::Complete);
  DiffTriple d = diff_triple(inst.truth, inst.b_true, inst.ref, inst.b_ref);
  PQ pq = build_pq_coefficients(inst.truth, inst.ref, inst.coeffs_ref);
  TransformedFields tf = make_vw(d, pq, endpoint_fields(d1, d2, inst.b_true, pq, inst.coeffs_ref));
  Field mb = -1.0 * d.b;
  double bs = d.b.max_abs(), ws = tf.wbar.max_abs();
  return {(at_time(tf.v, 0) - mb).max_abs() / bs, (at_time(tf.v, N - 1) - mb).max_abs() / bs,
          at_time(tf.w, 0).max_abs() / ws, at_time(tf.w, N - 1).max_abs() / ws};
}

}  // namespace

TEST_SUITE("transform") {
  TEST_CASE("cumulative time integral is exact for functions linear in t") {
    GridSpec g = line(5, 11);
    Field f = sample_spacetime(g, [](double x, double, double t) { return x + 2 * t; });
    Field F = cumulative_time_integral(f);
    for (int k = 0; k < g.Nt; ++k)
      for (int i = 0; i < 5; ++i) {
        double t = g.time(k), x = g.coord(0, i);
        CHECK(F.at(k, i) == doctest::Approx(x * t + t * t).epsilon(1e-13));
      }
    CHECK_THROWS_AS(cumulative_time_integral(Field(g, DomainTag::space())), DomainMismatch);
  }

  TEST_CASE("differences of two solutions") {
    Pair p = analytic_pair(9);
    Field b1(p.s1.u.spec, DomainTag::space(), 0.7), b2(p.s1.u.spec, DomainTag::space(), 0.5);
    DiffTriple d = diff_triple(p.s1, b1, p.s2, b2);
    CHECK(d.u.values == (p.s1.u - p.s2.u).values);
    CHECK(d.m.values == (p.s1.m - p.s2.m).values);
    CHECK(d.b.max_abs() == doctest::Approx(0.2));
  }

  TEST_CASE("P and Q turn the linearized HJB operator into one acting on u~ / rho") {
    double e1 = substitution_gap(41), e2 = substitution_gap(81);
    CHECK(e2 < 3e-3);
    CHECK(std::log2(e1 / e2) > 1.7);
  }

  TEST_CASE("rho is the bracket of the reference density") {
    Pair p = analytic_pair(11);
    PQ pq = build_pq_coefficients(p.s1, p.s2, p.c2);
    CHECK(pq.rho.values == bracket(p.c2.kernel, p.s2.m).values);
    CHECK(pq.P.size() == 1);
  }

  TEST_CASE("endpoint identities on a solved pair tighten under refinement") {
    Endpoints a = endpoint_errors(21), b = endpoint_errors(41);
    CHECK(b.v0 < a.v0 / 1.2);
    CHECK(b.vT < a.vT / 1.2);
    CHECK(b.w0 < a.w0 / 1.2);
    CHECK(b.wT < a.wT / 1.2);
    CHECK(std::max({b.v0, b.vT, b.w0, b.wT}) < 0.05);
  }

  TEST_CASE("the ramp is subtracted exactly") {
    Pair p = analytic_pair(11);
    const GridSpec& g = p.s1.u.spec;
    PQ pq = build_pq_coefficients(p.s1, p.s2, p.c2);
    Field b(g, DomainTag::space(), 0.0);
    DiffTriple d = diff_triple(p.s1, b, p.s2, b);
    EndpointFields e;
    e.W0 = sample_space(g, [](double x, double) { return x; });
    e.WT = sample_space(g, [](double x, double) { return 1 - x; });
    e.Z0 = Field(g, DomainTag::space(), 2.0);
    e.ZT = Field(g, DomainTag::space(), -1.0);
    TransformedFields tf = make_vw(d, pq, e);
    for (int i = 0; i < 11; ++i) {
      CHECK(tf.v.at(0, i) == doctest::Approx(tf.vbar.at(0, i) - e.W0.sp(i)).epsilon(1e-14));
      CHECK(tf.v.at(10, i) == doctest::Approx(tf.vbar.at(10, i) - e.WT.sp(i)).epsilon(1e-14));
      CHECK(tf.w.at(5, i) == doctest::Approx(tf.wbar.at(5, i) - 0.5).epsilon(1e-14));
    }
  }

  TEST_CASE("pointwise bounds: the excess vanishes for large C1 and is the full lhs for C1 = 0") {
    Config cfg = default_config();
    cfg.set("grid.Nx", "21");
    cfg.set("grid.Nt", "21");
    StandardInstance inst = build_instance(cfg);
    CipData d1 = generate_cip_data(inst.truth, CipMode::Complete);
    CipData d2 = generate_cip_data(inst.ref, CipMode::Complete);
    DiffTriple d = diff_triple(inst.truth, inst.b_true, inst.ref, inst.b_ref);
    PQ pq = build_pq_coefficients(inst.truth, inst.ref, inst.coeffs_ref);
    TransformedFields tf = make_vw(d, pq, endpoint_fields(d1, d2, inst.b_true, pq, inst.coeffs_ref));
    ResidualBounds big = residual_bounds(tf, d1, d2, 1e12);
    CHECK(big.X1_L2 == 0.0);
    CHECK(big.X2_L2 == 0.0);
    ResidualBounds none = residual_bounds(tf, d1, d2, 0.0);
    CHECK(none.X1_L2 == doctest::Approx(norm_L2(none.lhs_v)).epsilon(1e-14));
    CHECK(none.X2_L2 == doctest::Approx(norm_L2(none.lhs_w)).epsilon(1e-14));
    CHECK(none.data_norm > 0);
    ResidualBounds same = residual_bounds(tf, d1, d1, 1.0);
    CHECK(same.data_norm == 0.0);
  }
}
