#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mfgcip/harness.hpp"

using namespace mfgcip;

namespace {

Config small_config(int N) {
  Config cfg = default_config();
  cfg.set("grid.Nx", std::to_string(N));
  cfg.set("grid.Nt", std::to_string(N));
  return cfg;
}

const StandardInstance& small_instance() {
  static const StandardInstance inst = build_instance(small_config(21));
  return inst;
}

std::vector<Field> channel_fields(const CipData& d) {
  std::vector<Field> out{d.p, d.q, d.F, d.G};
  for (const FaceData& f : d.faces)
    for (const Field* x : {&f.f0, &f.f1, &f.g0, &f.g1}) out.push_back(*x);
  return out;
}

std::vector<Channel> channel_order(const CipData& d) {
  std::vector<Channel> out{Channel::p, Channel::q, Channel::F, Channel::G};
  for (std::size_t i = 0; i < d.faces.size(); ++i)
    for (Channel c : {Channel::f0, Channel::f1, Channel::g0, Channel::g1}) out.push_back(c);
  return out;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("slope fit recovers exact power laws") {
    std::vector<double> d{1e-4, 1e-3, 1e-2};
    SlopeFit a = fit_slope(d, {2e-4, 2e-3, 2e-2});
    CHECK(a.alpha_hat == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.B_hat == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(a.r2 == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> e;
    for (double x : d) e.push_back(3 * std::pow(x, 0.25));
    SlopeFit b = fit_slope(d, e);
    CHECK(b.alpha_hat == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(b.B_hat == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS(fit_slope({1e-3, 1e-2}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_slope({1e-3, 1e-3, 1e-3}, {1.0, 2.0, 3.0}), std::invalid_argument);
  }

  TEST_CASE("baseline is removed in quadrature before the fit") {
    std::vector<double> d{1e-3, 1e-2, 1e-1}, e;
    const double base = 0.01;
    for (double x : d) e.push_back(std::hypot(0.5 * x, base));
    SlopeFit f = fit_slope(d, e, base);
    CHECK(f.alpha_hat == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.B_hat == doctest::Approx(0.5).epsilon(1e-9));
    // points at or below the floor are dropped
    CHECK_THROWS_AS(fit_slope(d, {0.01, 0.02, 0.03}, 0.015), std::invalid_argument);
  }

  TEST_CASE("seed averaging groups by delta and skips failed rows") {
    std::vector<SweepRow> rows(5);
    rows[0].delta = 1e-2, rows[0].err_full = 1, rows[0].err_gamma = 10;
    rows[1].delta = 1e-3, rows[1].err_full = 2, rows[1].err_gamma = 20;
    rows[2].delta = 1e-2, rows[2].err_full = 3, rows[2].err_gamma = 30;
    rows[3].delta = 1e-3, rows[3].err_full = 99, rows[3].ok = false;
    rows[4].delta = 1e-3, rows[4].err_full = 4, rows[4].err_gamma = 40;
    std::vector<double> d, e;
    seed_average(rows, false, d, e);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == 1e-3);
    CHECK(e[0] == 3.0);
    CHECK(e[1] == 2.0);
    seed_average(rows, true, d, e);
    CHECK(e[0] == 30.0);
  }

  TEST_CASE("noise: zero delta leaves data untouched, and draws are reproducible") {
    CipData clean = generate_cip_data(small_instance().truth, CipMode::Complete);
    NoiseSpec ns;
    ns.seed = 3;
    ns.delta = 0;
    CipData z = add_noise(clean, ns);
    auto a = channel_fields(clean), b = channel_fields(z);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].values == b[i].values);
    ns.delta = 1e-3;
    auto n1 = channel_fields(add_noise(clean, ns)), n2 = channel_fields(add_noise(clean, ns));
    for (std::size_t i = 0; i < n1.size(); ++i) CHECK(n1[i].values == n2[i].values);
    ns.stream = 1;
    auto n3 = channel_fields(add_noise(clean, ns));
    CHECK(n3[0].values != n1[0].values);
    ns.delta = 1.0;
    CHECK_THROWS_AS(add_noise(clean, ns), std::invalid_argument);
  }

  TEST_CASE("noise: every channel sits just inside its delta ball") {
    CipData clean = generate_cip_data(small_instance().truth, CipMode::Complete);
    NoiseSpec ns;
    ns.seed = 5;
    ns.delta = 3e-3;
    CipData noisy = add_noise(clean, ns);
    auto a = channel_fields(clean), b = channel_fields(noisy);
    auto ch = channel_order(clean);
    for (std::size_t i = 0; i < a.size(); ++i) {
      double n = channel_norm(ch[i], b[i] - a[i]);
      CHECK(n <= ns.delta);
      CHECK(n >= 0.99 * ns.delta);
    }
  }

  TEST_CASE("noise: a channel subset perturbs only those channels, with the same draws") {
    CipData clean = generate_cip_data(small_instance().truth, CipMode::Complete);
    NoiseSpec all;
    all.seed = 9;
    all.delta = 1e-3;
    NoiseSpec some = all;
    some.channels = {Channel::F, Channel::g1};
    auto c = channel_fields(clean), f = channel_fields(add_noise(clean, all)), s = channel_fields(add_noise(clean, some));
    auto ch = channel_order(clean);
    for (std::size_t i = 0; i < c.size(); ++i) {
      bool on = ch[i] == Channel::F || ch[i] == Channel::g1;
      if (on) CHECK(s[i].values == f[i].values);
      else CHECK(s[i].values == c[i].values);
    }
  }

  TEST_CASE("channel norms") {
    GridSpec g = small_instance().grid;
    Field sp(g, DomainTag::space(), 2.0);
    CHECK(channel_norm(Channel::p, sp) == doctest::Approx(norm_Hk_space(sp, 4)));
    CHECK(channel_norm(Channel::G, sp) == doctest::Approx(norm_Hk_space(sp, 3)));
    CHECK(to_string(Channel::g1) == "g1");
    CHECK(all_channels().size() == 8);
  }

  TEST_CASE("config: defaults, overlay and unknown keys") {
    Config d = default_config();
    CHECK(d.get_int("grid.Nx", 0) == 101);
    CHECK(d.get_string("inversion.eps_rule", "") == "fixed");
    auto dir = std::filesystem::temp_directory_path();
    auto good = (dir / "mfgcip_cfg_good.ini").string(), bad = (dir / "mfgcip_cfg_bad.ini").string(),
         table = (dir / "mfgcip_cfg_table.ini").string();
    std::ofstream(good) << "[grid]\nNx = 31\n";
    std::ofstream(bad) << "[grid]\nNxx = 31\n";
    std::ofstream(table) << "[solver]\ntol = 1\n";
    Config c = load_config(good);
    CHECK(c.get_int("grid.Nx", 0) == 31);
    CHECK(c.get_int("grid.Nt", 0) == 101);
    CHECK_THROWS_AS(load_config(bad), ConfigError);
    CHECK_THROWS_AS(load_config(table), ConfigError);
    Config g = default_config();
    g.set("grid.gamma", "5");
    CHECK_THROWS_AS(grid_from_config(g), ConfigError);
    for (const auto& p : {good, bad, table}) std::filesystem::remove(p);
  }

  TEST_CASE("lambda choice per mode") {
    Config c = default_config();
    CHECK(inversion_lambda(c, CipMode::Complete, 1e-3) == 0.074);
    CHECK(inversion_lambda(c, CipMode::Incomplete, 0.0) == 0.074);
    // A1 = gamma = 1, nu = 3: d = 124.5
    CHECK(inversion_lambda(c, CipMode::Incomplete, std::exp(-124.5)) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("L-curve corner: the sharpest bend wins, a straight line falls back") {
    // growing eps: the penalty drops steeply, then the residual climbs; the bend is the third point
    std::vector<double> res{8e-4, 9e-4, 1e-3, 1e-2, 1e-1}, pen{1e2, 1e1, 1.2, 1.1, 1.0};
    std::vector<LCurvePoint> pts;
    for (std::size_t i = 0; i < res.size(); ++i) pts.push_back({1e-8 * std::pow(10.0, double(i)), res[i], pen[i], 0, true});
    LCurve lc = lcurve_corner(pts, 0.5);
    CHECK(lc.corner == 2);
    CHECK(lc.eps == pts[2].eps);
    CHECK(lc.points[2].curvature > 0);
    std::vector<LCurvePoint> line;
    for (int i = 0; i < 4; ++i) line.push_back({double(i + 1), std::pow(10.0, -i), std::pow(10.0, i), 0, true});
    LCurve flat = lcurve_corner(line, 0.5);
    CHECK(flat.corner == -1);
    CHECK(flat.eps == 0.5);
    pts[2].ok = false;  // a failed solve cannot be the corner
    CHECK(lcurve_corner(pts, 0.5).corner != 2);
  }

  TEST_CASE("sweep rows and CSV do not depend on the thread count") {
    Config cfg = small_config(21);
    cfg.set("inversion.lcurve_report", "false");
    const StandardInstance& inst = small_instance();
    std::vector<double> deltas{1e-3, 3e-3, 1e-2};
    std::vector<std::uint64_t> seeds{1, 2};
    SweepResult one = run_sweep(inst, cfg, deltas, seeds, CipMode::Complete, 1);
    SweepResult three = run_sweep(inst, cfg, deltas, seeds, CipMode::Complete, 3);
    CHECK(sweep_csv(one) == sweep_csv(three));
    REQUIRE(one.rows.size() == 6);
    CHECK(one.rows[0].delta == 1e-3);
    CHECK(one.rows[1].seed == 2);
    CHECK(one.lcurve.points.empty());
    CHECK(one.fit_ok);
    std::string csv = sweep_csv(one);
    CHECK(csv.substr(0, csv.find('\n')) == "delta,seed,mode,lambda,err_gamma,err_full");
    cfg.set("inversion.eps_rule", "gcv");
    CHECK_THROWS_AS(run_sweep(inst, cfg, deltas, seeds, CipMode::Complete, 1), ConfigError);
  }
}
