#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mfgcip/harness.hpp"
#include "mfgcip/inversion.hpp"
#include "mms.hpp"

using namespace mfgcip;

namespace {

struct Setup {
  StandardInstance inst;
  InverseProblemSpec spec;
};

Setup exact_data(int N) {
  Config cfg = default_config();
  cfg.set("grid.Nx", std::to_string(N));
  cfg.set("grid.Nt", std::to_string(N));
  Setup s{build_instance(cfg), {}};
  CipData d = generate_cip_data(s.inst.truth, CipMode::Complete);
  s.spec = inversion_spec(s.inst, d, cfg, inversion_lambda(cfg, CipMode::Complete, 0));
  return s;
}

double relative_to_bump(const Setup& s, const Field& b_hat) {
  return norm_L2(b_hat - s.inst.b_true) / norm_L2(s.inst.b_true - s.inst.b_ref);
}

GridSpec line(int N, int Nt) {
  GridSpec g;
  g.n = 1;
  g.A = {1.0, 1.0};
  g.Nx = {N, 1};
  g.Nt = Nt;
  g.gamma = 1.0;
  return g;
}

}  // namespace

TEST_SUITE("inversion") {
  TEST_CASE("the true differences satisfy the assembled rows") {
    Setup s = exact_data(21);
    const StandardInstance& I = s.inst;
    InversionIterate it{I.truth.u - I.ref.u, I.truth.m - I.ref.m, I.b_true - I.b_ref};
    LinearSystem sys = assemble_system(s.spec, it);
    const int nsp = I.grid.nspace();
    std::vector<double> x(sys.n_main + sys.n_b);
    for (int k = 0; k < I.grid.Nt; ++k)
      for (int i = 0; i < nsp; ++i) {
        x[std::size_t(k) * 2 * nsp + i] = it.ut.at(k, i);
        x[std::size_t(k) * 2 * nsp + nsp + i] = it.mt.at(k, i);
      }
    for (int i = 0; i < nsp; ++i) x[sys.n_main + i] = it.bt.values[i];
    double rhs = 0;
    for (double v : sys.rhs) rhs += v * v;
    CHECK(sys.residual_norm(x) < 1e-10 * std::sqrt(rhs));
    CHECK(sys.rows() == sys.pde_rows + sys.data_rows);
  }

  TEST_CASE("noise-free reconstruction converges to the truth") {
    Setup a = exact_data(21), b = exact_data(41);
    ReconstructionResult ra = solve_outer(a.spec), rb = solve_outer(b.spec);
    CHECK(ra.converged);
    CHECK(rb.converged);
    double ea = relative_to_bump(a, ra.b_hat), eb = relative_to_bump(b, rb.b_hat);
    CHECK(eb < 0.01);
    CHECK(eb < ea / 2);
    CHECK(rb.penalty > 0);
    CHECK(rb.residual_history.size() == std::size_t(rb.outer_iterations));
  }

  TEST_CASE("direct and conjugate-gradient normal solves agree") {
    Setup s = exact_data(21);
    s.spec.solver = "direct";
    ReconstructionResult d = solve_outer(s.spec);
    s.spec.solver = "cg";
    ReconstructionResult c = solve_outer(s.spec);
    CHECK((d.b_hat - c.b_hat).max_abs() < 1e-7);
  }

  TEST_CASE("spec validation") {
    Setup s = exact_data(11);
    InverseProblemSpec bad = s.spec;
    bad.solver = "qr";
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s.spec;
    bad.eps = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s.spec;
    bad.reference.m = Field(s.inst.grid, DomainTag::spacetime(), 0.0);  // bracket vanishes, b is invisible
    CHECK_THROWS_AS(bad.validate(), NumericalFailure);
  }

  TEST_CASE("pointwise oracle recovers the manufactured coefficient at second order") {
    auto err = [](int N) {
      mms::Problem p = mms::make_1d(N, N);
      Field b = oracle_recover(p.u_exact, p.m_exact, p.coeffs, 1e-8, &p.f_u);
      return (b - p.coeffs.kernel.b).max_abs();
    };
    double e1 = err(21), e2 = err(41);
    CHECK(e2 < 1e-3);
    CHECK(std::log2(e1 / e2) > 1.8);
    mms::Problem p = mms::make_1d(11, 11);
    CHECK_THROWS_AS(oracle_recover(p.u_exact, 0.0 * p.m_exact, p.coeffs, 1e-8, &p.f_u), NumericalFailure);
  }

  TEST_CASE("b~ is read off the shared endpoint value of v") {
    GridSpec g = line(9, 5);
    Field v = sample_spacetime(g, [](double x, double, double t) { return -x + t * (1 - t) * 7; });
    ExtractedB e = extract_b_from_v(v, 1e-12);
    for (int i = 0; i < 9; ++i) CHECK(e.b_tilde.sp(i) == doctest::Approx(g.coord(0, i)).epsilon(1e-14));
    CHECK(e.endpoint_gap < 1e-14);
    CHECK_FALSE(e.flagged);
    Field w = sample_spacetime(g, [](double x, double, double t) { return x + 0.1 * t; });
    ExtractedB f = extract_b_from_v(w, 1e-3);
    CHECK(f.endpoint_gap == doctest::Approx(0.1));
    CHECK(f.flagged);
  }

  TEST_CASE("error report separates the observed strip from the rest") {
    GridSpec g = line(21, 3);
    Field truth(g, DomainTag::space(), 1.0);
    // error 1 where x1 < 0, none on the strip [0, 1]
    Field est = sample_space(g, [](double x, double) { return x < -1e-12 ? 2.0 : 1.0; });
    ErrorReport r = error_report(est, truth, 1.0);
    CHECK(r.L2_gamma == 0.0);
    CHECK(r.rms_gamma == 0.0);
    CHECK(r.rms_outside == doctest::Approx(1.0));
    CHECK(r.Linf == 1.0);
    CHECK(r.L2_full > 0.9);
    CHECK_THROWS_AS(error_report(est, truth, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(error_report(est, truth, -0.1), std::invalid_argument);
  }
}
