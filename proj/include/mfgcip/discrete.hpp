#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "mfgcip/grid.hpp"

namespace mfgcip {

// Per-level stencils shared by the forward solvers and the inversion rows.
// Arrays are one time level (nspace values). Only interior nodes carry
// equations; boundary nodes hold Dirichlet values.
class LevelOps {
 public:
  explicit LevelOps(const GridSpec& g);

  const GridSpec& grid() const { return g_; }
  int nspace() const { return nsp_; }
  const std::vector<int>& interior() const { return interior_; }
  bool is_interior(int s) const { return interior_mask_[s]; }

  double lap(const double* f, int s) const;
  double grad(const double* f, int s, int axis) const;
  double grad_sq(const double* f, int s) const;
  // Conservative div(a m grad u), face values by arithmetic means.
  double drift(const double* a, const double* m, const double* u, int s) const;

  using Coeffs = std::vector<std::pair<int, double>>;
  void lap_coeffs(int s, Coeffs& out) const;
  void grad_coeffs(int s, int axis, Coeffs& out) const;
  void drift_coeffs_m(const double* a, const double* u, int s, Coeffs& out) const;
  void drift_coeffs_u(const double* a, const double* m, int s, Coeffs& out) const;

  int neighbor(int s, int axis, int dir) const { return s + dir * stride_[axis]; }

 private:
  GridSpec g_;
  int nsp_;
  int stride_[2];
  double h_[2];
  std::vector<int> interior_;
  std::vector<char> interior_mask_;
};

// Solves (c0 I - c1 Lap) x = r on interior nodes; boundary entries of x are
// taken as given. Tridiagonal direct solve in 1-D, conjugate gradients in 2-D.
class ImplicitHeat {
 public:
  ImplicitHeat(const GridSpec& g, double c0, double c1, double cg_tol = 1e-13, int cg_max_iter = 5000);
  ~ImplicitHeat();
  void solve(const std::vector<double>& rhs, std::vector<double>& x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mfgcip
