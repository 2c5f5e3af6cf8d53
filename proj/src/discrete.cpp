#include "mfgcip/discrete.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <lapacke.h>

#include <cmath>
#include <stdexcept>

namespace mfgcip {

LevelOps::LevelOps(const GridSpec& g) : g_(g), nsp_(g.nspace()) {
  int N1 = g.nodes(0), N2 = g.nodes(1);
  stride_[0] = N2;
  stride_[1] = 1;
  h_[0] = g.h(0);
  h_[1] = g.n > 1 ? g.h(1) : 1.0;
  interior_mask_.assign(nsp_, 0);
  for (int i = 1; i < N1 - 1; ++i)
    for (int j = 0; j < N2; ++j) {
      if (g.n > 1 && (j == 0 || j == N2 - 1)) continue;
      int s = i * N2 + j;
      interior_.push_back(s);
      interior_mask_[s] = 1;
    }
}

double LevelOps::lap(const double* f, int s) const {
  double r = 0;
  for (int a = 0; a < g_.n; ++a) r += (f[s - stride_[a]] - 2 * f[s] + f[s + stride_[a]]) / (h_[a] * h_[a]);
  return r;
}

double LevelOps::grad(const double* f, int s, int axis) const {
  return (f[s + stride_[axis]] - f[s - stride_[axis]]) / (2 * h_[axis]);
}

double LevelOps::grad_sq(const double* f, int s) const {
  double r = 0;
  for (int a = 0; a < g_.n; ++a) {
    double d = grad(f, s, a);
    r += d * d;
  }
  return r;
}

double LevelOps::drift(const double* a, const double* m, const double* u, int s) const {
  double r = 0;
  for (int ax = 0; ax < g_.n; ++ax) {
    int p = s + stride_[ax], q = s - stride_[ax];
    double fp = 0.5 * (a[s] + a[p]) * 0.5 * (m[s] + m[p]) * (u[p] - u[s]);
    double fm = 0.5 * (a[s] + a[q]) * 0.5 * (m[s] + m[q]) * (u[s] - u[q]);
    r += (fp - fm) / (h_[ax] * h_[ax]);
  }
  return r;
}

void LevelOps::lap_coeffs(int s, Coeffs& out) const {
  for (int a = 0; a < g_.n; ++a) {
    double w = 1.0 / (h_[a] * h_[a]);
    out.push_back({s - stride_[a], w});
    out.push_back({s, -2 * w});
    out.push_back({s + stride_[a], w});
  }
}

void LevelOps::grad_coeffs(int s, int axis, Coeffs& out) const {
  double w = 1.0 / (2 * h_[axis]);
  out.push_back({s + stride_[axis], w});
  out.push_back({s - stride_[axis], -w});
}

void LevelOps::drift_coeffs_m(const double* a, const double* u, int s, Coeffs& out) const {
  for (int ax = 0; ax < g_.n; ++ax) {
    int p = s + stride_[ax], q = s - stride_[ax];
    double h2 = h_[ax] * h_[ax];
    double cp = 0.5 * (a[s] + a[p]) * (u[p] - u[s]) / (2 * h2);
    double cm = 0.5 * (a[s] + a[q]) * (u[s] - u[q]) / (2 * h2);
    out.push_back({s, cp - cm});
    out.push_back({p, cp});
    out.push_back({q, -cm});
  }
}

void LevelOps::drift_coeffs_u(const double* a, const double* m, int s, Coeffs& out) const {
  for (int ax = 0; ax < g_.n; ++ax) {
    int p = s + stride_[ax], q = s - stride_[ax];
    double h2 = h_[ax] * h_[ax];
    double cp = 0.5 * (a[s] + a[p]) * 0.5 * (m[s] + m[p]) / h2;
    double cm = 0.5 * (a[s] + a[q]) * 0.5 * (m[s] + m[q]) / h2;
    out.push_back({p, cp});
    out.push_back({s, -(cp + cm)});
    out.push_back({q, cm});
  }
}

struct ImplicitHeat::Impl {
  GridSpec g;
  LevelOps ops;
  double c0, c1;
  std::vector<int> index;  // spatial node -> interior unknown, or -1
  Eigen::SparseMatrix<double> A;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  Impl(const GridSpec& gs, double a0, double a1) : g(gs), ops(gs), c0(a0), c1(a1) {}
};

ImplicitHeat::ImplicitHeat(const GridSpec& g, double c0, double c1, double cg_tol, int cg_max_iter)
    : impl_(std::make_unique<Impl>(g, c0, c1)) {
  auto& I = *impl_;
  I.index.assign(g.nspace(), -1);
  int cnt = 0;
  for (int s : I.ops.interior()) I.index[s] = cnt++;
  if (g.n > 1) {
    std::vector<Eigen::Triplet<double>> trip;
    LevelOps::Coeffs c;
    for (int s : I.ops.interior()) {
      c.clear();
      I.ops.lap_coeffs(s, c);
      int r = I.index[s];
      trip.push_back({r, r, c0});
      for (auto [j, w] : c)
        if (I.index[j] >= 0) trip.push_back({r, I.index[j], -c1 * w});
    }
    I.A.resize(cnt, cnt);
    I.A.setFromTriplets(trip.begin(), trip.end());
    I.cg.setTolerance(cg_tol);
    I.cg.setMaxIterations(cg_max_iter);
    I.cg.compute(I.A);
  }
}

ImplicitHeat::~ImplicitHeat() = default;

void ImplicitHeat::solve(const std::vector<double>& rhs, std::vector<double>& x) const {
  const auto& I = *impl_;
  const auto& interior = I.ops.interior();
  std::size_t m = interior.size();
  // Move Dirichlet neighbours to the right-hand side.
  std::vector<double> b(m);
  LevelOps::Coeffs c;
  for (std::size_t r = 0; r < m; ++r) {
    int s = interior[r];
    b[r] = rhs[s];
    c.clear();
    I.ops.lap_coeffs(s, c);
    for (auto [j, w] : c)
      if (I.index[j] < 0) b[r] += I.c1 * w * x[j];
  }
  if (I.g.n == 1) {
    double h = I.g.h(0);
    std::vector<double> d(m, I.c0 + 2 * I.c1 / (h * h)), e(m > 0 ? m - 1 : 0, -I.c1 / (h * h));
    lapack_int info = LAPACKE_dptsv(LAPACK_COL_MAJOR, lapack_int(m), 1, d.data(), e.data(), b.data(), lapack_int(m));
    if (info != 0) throw std::runtime_error("tridiagonal solve failed");
    for (std::size_t r = 0; r < m; ++r) x[interior[r]] = b[r];
    return;
  }
  Eigen::Map<Eigen::VectorXd> bv(b.data(), Eigen::Index(m));
  Eigen::VectorXd x0(m);
  for (std::size_t r = 0; r < m; ++r) x0[Eigen::Index(r)] = x[interior[r]];
  Eigen::VectorXd sol = I.cg.solveWithGuess(bv, x0);
  if (I.cg.info() != Eigen::Success) throw std::runtime_error("conjugate gradients did not converge");
  for (std::size_t r = 0; r < m; ++r) x[interior[r]] = sol[Eigen::Index(r)];
}

}  // namespace mfgcip
