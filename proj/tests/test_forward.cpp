#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "mfgcip/mfg_forward.hpp"
#include "mms.hpp"

using namespace mfgcip;

namespace {

constexpr double pi = std::numbers::pi;

GridSpec line(int N, int Nt) {
  GridSpec g;
  g.n = 1;
  g.A = {1.0, 1.0};
  g.Nx = {N, 1};
  g.Nt = Nt;
  g.gamma = 1.0;
  return g;
}

// a = b = s = 0: both equations reduce to heat equations.
MfgCoefficients heat_only(const GridSpec& g) {
  MfgCoefficients c;
  c.a = Field(g, DomainTag::space(), 0.0);
  c.s = Field(g, DomainTag::spacetime(), 0.0);
  c.kernel.spec = g;
  c.kernel.K1 = {1.0};
  c.kernel.K2.assign(std::size_t(g.nspace()) * g.nspace(), 0.0);
  c.kernel.b = Field(g, DomainTag::space(), 0.0);
  return c;
}

Field space_slice(const Field& f, int k) {
  Field s = time_slice(f, k);
  s.tag = DomainTag::space();
  return s;
}

// Small coupled instance with consistent corners.
struct Coupled {
  GridSpec g;
  MfgCoefficients c;
  Field F, q;
  BoundaryConditions bc;
};

Coupled coupled(int N) {
  Coupled p;
  p.g = line(N, N);
  const GridSpec& g = p.g;
  p.c.a = sample_space(g, [](double x, double) { return 0.5 + 0.1 * x; });
  p.c.s = Field(g, DomainTag::spacetime(), 0.1);
  p.c.kernel = gaussian_kernel(g, {0.5}, sample_space(g, [](double x, double) { return 0.5 + 0.2 * x; }));
  p.F = sample_space(g, [](double x, double) { return 0.3 * std::cos(pi * x / 2); });
  p.q = sample_space(g, [](double x, double) { return 1 + 0.3 * std::sin(pi * x / 2); });
  p.bc.u_lateral = sample_spacetime(g, [](double x, double, double) { return 0.3 * std::cos(pi * x / 2); });
  p.bc.m_lateral = sample_spacetime(g, [](double x, double, double) { return 1 + 0.3 * std::sin(pi * x / 2); });
  return p;
}

}  // namespace

TEST_SUITE("mfg_forward") {
  TEST_CASE("manufactured solution: both solvers are second order in (h, tau)") {
    mms::Order o = mms::ladder({21, 41, 81});
    CHECK(o.order_hjb >= 1.9);
    CHECK(o.order_fp >= 1.9);
    CHECK(o.err_hjb.back() < 1e-3);
    CHECK(o.err_fp.back() < 1e-3);
  }

  TEST_CASE("manufactured solution in two dimensions") {
    mms::Order o = mms::ladder({11, 21}, true);
    CHECK(o.order_hjb >= 1.8);
    CHECK(o.order_fp >= 1.8);
  }

  TEST_CASE("backward heat equation against its separable solution") {
    // u_t + u_xx = 0 is solved by exp(k^2 (t - T)) cos(k x)
    const double k = pi / 2;
    auto err = [&](int N) {
      GridSpec g = line(N, N);
      MfgCoefficients c = heat_only(g);
      Field exact = sample_spacetime(g, [&](double x, double, double t) { return std::exp(k * k * (t - 1)) * std::cos(k * x); });
      BoundaryConditions bc;
      bc.u_lateral = exact;
      bc.m_lateral = Field(g, DomainTag::spacetime(), 1.0);
      Field m(g, DomainTag::spacetime(), 1.0);
      Field u = solve_hjb_backward(c, m, space_slice(exact, N - 1), bc);
      return (u - exact).max_abs();
    };
    double e1 = err(21), e2 = err(41);
    CHECK(e1 < 2e-3);
    CHECK(std::log2(e1 / e2) > 1.9);
  }

  TEST_CASE("forward heat equation against its separable solution") {
    const double k = pi;
    auto err = [&](int N) {
      GridSpec g = line(N, N);
      MfgCoefficients c = heat_only(g);
      Field exact =
          sample_spacetime(g, [&](double x, double, double t) { return 1 + std::exp(-k * k * t) * std::sin(k * x) / 2; });
      BoundaryConditions bc;
      bc.u_lateral = Field(g, DomainTag::spacetime(), 0.0);
      bc.m_lateral = exact;
      Field u(g, DomainTag::spacetime(), 0.0);
      Field m = solve_fp_forward(c, u, space_slice(exact, 0), bc);
      return (m - exact).max_abs();
    };
    double e1 = err(21), e2 = err(41);
    CHECK(std::log2(e1 / e2) > 1.8);
  }

  TEST_CASE("coupled system: Picard converges and the fixed point is consistent") {
    Coupled p = coupled(41);
    PicardOptions opt;
    opt.tol = 1e-12;
    opt.step.sweep_tol = 1e-14;
    MfgSolution s = picard_solve(p.c, p.F, p.q, p.bc, opt);
    CHECK(s.picard_residuals.back() < 1e-12);
    // re-applying both solves changes nothing
    Field u = solve_hjb_backward(p.c, s.m, p.F, p.bc, opt.step);
    Field m = solve_fp_forward(p.c, u, p.q, p.bc, opt.step);
    CHECK((u - s.u).max_abs() < 1e-10);
    CHECK((m - s.m).max_abs() < 1e-10);
    for (int i = 0; i < 41; ++i) {
      CHECK(s.u.at(40, i) == doctest::Approx(p.F.sp(i)).epsilon(1e-14));
      CHECK(s.m.at(0, i) == doctest::Approx(p.q.sp(i)).epsilon(1e-14));
    }
  }

  TEST_CASE("Picard stops with a typed error when the budget runs out") {
    Coupled p = coupled(21);
    PicardOptions opt;
    opt.tol = 1e-15;
    opt.max_iters = 2;
    CHECK_THROWS_AS(picard_solve(p.c, p.F, p.q, p.bc, opt), Diverged);
  }

  TEST_CASE("contradictory corner data is rejected") {
    Coupled p = coupled(21);
    p.bc.m_lateral.values[0] += 0.1;  // m(-A1, 0) no longer equals q(-A1)
    CHECK_THROWS_AS(picard_solve(p.c, p.F, p.q, p.bc), IncompatibleData);
    p = coupled(21);
    p.bc.u_lateral.values.back() -= 0.1;  // u(A1, T) no longer equals F(A1)
    CHECK_THROWS_AS(picard_solve(p.c, p.F, p.q, p.bc), IncompatibleData);
  }

  TEST_CASE("observation data: traces of the solution, incomplete mode drops x1 = -A1") {
    Coupled p = coupled(21);
    MfgSolution s = picard_solve(p.c, p.F, p.q, p.bc);
    CipData full = generate_cip_data(s, CipMode::Complete);
    CipData part = generate_cip_data(s, CipMode::Incomplete);
    CHECK(full.faces.size() == 2);
    CHECK(part.faces.size() == 1);
    CHECK(part.face(1, -1) == nullptr);
    CHECK_FALSE(face_observed(CipMode::Incomplete, 1, -1));
    CHECK(face_observed(CipMode::Incomplete, 1, +1));
    CHECK(face_observed(CipMode::Complete, 1, -1));
    CHECK(full.p.values == space_slice(s.u, 0).values);
    CHECK(full.G.values == space_slice(s.m, 20).values);
    const FaceData* f = full.face(1, +1);
    REQUIRE(f != nullptr);
    CHECK(f->f0.values == face_trace(s.u, 1, +1).values);
    CHECK(f->g1.values == normal_derivative_trace(s.m, 1, +1).values);
  }

  TEST_CASE("observation data round-trips through files") {
    Coupled p = coupled(11);
    MfgSolution s = picard_solve(p.c, p.F, p.q, p.bc);
    CipData d = generate_cip_data(s, CipMode::Incomplete);
    auto dir = (std::filesystem::temp_directory_path() / "mfgcip_cip_roundtrip").string();
    save_cip_data(d, dir);
    CipData r = load_cip_data(dir);
    CHECK(r.mode == CipMode::Incomplete);
    CHECK(r.faces.size() == d.faces.size());
    CHECK(r.F.values == d.F.values);
    CHECK(r.faces[0].f1.values == d.faces[0].f1.values);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("mode names") {
    CHECK(parse_cip_mode(to_string(CipMode::Incomplete)) == CipMode::Incomplete);
    CHECK_THROWS(parse_cip_mode("partial"));
  }
}
