#include "mfgcip/kernel.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "mfgcip/config.hpp"

namespace mfgcip {

void KernelSpec::validate() const {
  spec.validate();
  std::size_t c = std::size_t(cross_nodes());
  if (K1.size() != c * c) throw GridError("kernel: K1 table has the wrong size");
  if (K2.size() != std::size_t(spec.nspace()) * spec.nspace()) throw GridError("kernel: K2 table has the wrong size");
  require_tag(b, DomainKind::Space, "kernel b");
  if (!(b.spec == spec)) throw DomainMismatch("kernel: b lives on a different grid");
}

double KernelSpec::bound() const {
  double k = 0;
  for (double v : K1) k = std::max(k, std::abs(v));
  for (double v : K2) k = std::max(k, std::abs(v));
  return k * b.max_abs();
}

std::vector<std::pair<int, double>> bracket_weights(const KernelSpec& k, int i1, int i2) {
  const GridSpec& g = k.spec;
  int N1 = g.nodes(0), N2 = g.nodes(1), nsp = g.nspace();
  double h1 = g.h(0);
  std::vector<double> w2(N2, 1.0);
  if (g.n > 1) {
    double h2 = g.h(1);
    for (int j = 0; j < N2; ++j) w2[j] = (j == 0 || j == N2 - 1) ? 0.5 * h2 : h2;
  }
  std::vector<std::pair<int, double>> out;
  int s = i1 * N2 + i2;
  for (int l = i1; l < N1; ++l) {
    double wt = 0;
    if (l < N1 - 1) wt += 0.5 * h1;
    if (l > i1) wt += 0.5 * h1;
    for (int j = 0; j < N2; ++j) {
      int s2 = l * N2 + j;
      double w = wt * w2[j] * k.K2[std::size_t(s) * nsp + s2];
      if (l == i1) w += w2[j] * k.K1[std::size_t(i2) * N2 + j];
      if (w != 0.0) out.push_back({s2, w});
    }
  }
  return out;
}

Field bracket(const KernelSpec& k, const Field& m) {
  if (!(m.spec == k.spec)) throw DomainMismatch("bracket: density and kernel grids differ");
  int levels = 1;
  if (m.tag.kind == DomainKind::Spacetime) levels = m.spec.Nt;
  else if (!m.tag.is_spatial()) throw DomainMismatch("bracket: unexpected domain tag " + m.tag.str());
  const GridSpec& g = k.spec;
  int nsp = g.nspace();
  Field r(m.spec, m.tag);
  for (int i1 = 0; i1 < g.nodes(0); ++i1)
    for (int i2 = 0; i2 < g.nodes(1); ++i2) {
      auto w = bracket_weights(k, i1, i2);
      int s = i1 * g.nodes(1) + i2;
      for (int t = 0; t < levels; ++t) {
        const double* mv = m.values.data() + std::size_t(t) * nsp;
        double acc = 0;
        for (const auto& [idx, wt] : w) acc += wt * mv[idx];
        r.values[std::size_t(t) * nsp + s] = acc;
      }
    }
  return r;
}

Field apply_interaction(const KernelSpec& k, const Field& m) {
  Field r = bracket(k, m);
  int nsp = k.spec.nspace();
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] *= k.b.values[i % nsp];
  return r;
}

Field compute_R(const KernelSpec& k, const Field& m) { return -1.0 * bracket(k, m); }

RBound check_R_bound(const Field& R, double c) {
  RBound out;
  out.min_abs = R.size() ? std::abs(R.values[0]) : 0.0;
  for (double v : R.values) out.min_abs = std::min(out.min_abs, std::abs(v));
  out.ok = out.min_abs >= c;
  return out;
}

KernelSpec gaussian_kernel(const GridSpec& g, const std::vector<double>& sigma, const Field& b) {
  g.validate();
  if (int(sigma.size()) != g.n) throw GridError("gaussian_kernel: need one width per axis");
  for (double s : sigma)
    if (!(s > 0)) throw GridError("gaussian_kernel: widths must be positive");
  KernelSpec k;
  k.spec = g;
  k.b = b;
  const double inv2pi = 1.0 / (2 * std::numbers::pi);
  auto factor = [&](int axis, double x, double y) {
    double s = sigma[axis];
    return inv2pi / s * std::exp(-(x - y) * (x - y) / (2 * s * s));
  };
  int N1 = g.nodes(0), N2 = g.nodes(1), nsp = g.nspace();
  k.K1.assign(std::size_t(N2) * N2, 1.0);
  if (g.n > 1)
    for (int i = 0; i < N2; ++i)
      for (int j = 0; j < N2; ++j) k.K1[std::size_t(i) * N2 + j] = factor(1, g.coord(1, i), g.coord(1, j));
  k.K2.assign(std::size_t(nsp) * nsp, 0.0);
  for (int i1 = 0; i1 < N1; ++i1)
    for (int i2 = 0; i2 < N2; ++i2)
      for (int l1 = 0; l1 < N1; ++l1)
        for (int l2 = 0; l2 < N2; ++l2) {
          double v = factor(0, g.coord(0, i1), g.coord(0, l1));
          if (g.n > 1) v *= factor(1, g.coord(1, i2), g.coord(1, l2));
          k.K2[std::size_t(i1 * N2 + i2) * nsp + (l1 * N2 + l2)] = v;
        }
  k.M = k.bound();
  k.validate();
  return k;
}

void save_kernel(const KernelSpec& k, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Field K2(k.spec, DomainTag::pair());
  K2.values = k.K2;
  write_field(K2, (fs::path(dir) / "K2.field").string());
  write_field(k.b, (fs::path(dir) / "b.field").string());
  Config c;
  c.set("kernel.kind", std::string("tabulated"));
  c.set("kernel.M", k.M);
  c.set("kernel.K1", k.K1);
  c.set("kernel.K2", std::string("K2.field"));
  c.set("kernel.b", std::string("b.field"));
  c.save((fs::path(dir) / "kernel.ini").string());
}

KernelSpec load_kernel(const std::string& dir) {
  namespace fs = std::filesystem;
  Config c = Config::load((fs::path(dir) / "kernel.ini").string());
  KernelSpec k;
  k.b = read_field((fs::path(dir) / c.require_string("kernel.b")).string());
  Field K2 = read_field((fs::path(dir) / c.require_string("kernel.K2")).string());
  require_tag(K2, DomainKind::Pair, "load_kernel");
  k.spec = k.b.spec;
  if (!(K2.spec == k.spec)) throw DomainMismatch("load_kernel: K2 and b grids differ");
  k.K2 = K2.values;
  k.K1 = c.get_doubles("kernel.K1", {});
  k.M = c.get_double("kernel.M", 0.0);
  k.validate();
  return k;
}

}  // namespace mfgcip
