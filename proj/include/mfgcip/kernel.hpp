#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mfgcip/grid.hpp"

namespace mfgcip {

// K(x,y) = b(x) { delta(x1 - y1) K1(xbar, ybar) + H(y1 - x1) K2(x, y) }.
// K1 is tabulated on cross-section nodes (one entry when n == 1, where the
// cross-section is a point of unit measure); K2 on pairs of spatial nodes.
struct KernelSpec {
  GridSpec spec;
  std::vector<double> K1;
  std::vector<double> K2;
  Field b;
  double M = 0;

  int cross_nodes() const { return spec.nodes(1); }
  void validate() const;
  // Largest |K| over the tables, scaled by max |b|.
  double bound() const;
};

// Quadrature stencil of the bracket at spatial node (i1, i2): pairs of
// (spatial index, weight) such that bracket = sum weight * m(index).
std::vector<std::pair<int, double>> bracket_weights(const KernelSpec& k, int i1, int i2);

// bracket(m) = int K1 m(x1, ybar) dybar + int_{x1}^{A1} int K2 m dybar dy1.
// Accepts spacetime or spatial m.
Field bracket(const KernelSpec& k, const Field& m);
Field apply_interaction(const KernelSpec& k, const Field& m);
// R = -bracket(m), the interaction of the reference density with b = -1.
Field compute_R(const KernelSpec& k, const Field& m);

struct RBound {
  bool ok = false;
  double min_abs = 0;
};
RBound check_R_bound(const Field& R, double c);

// Gaussian kernel with per-axis widths:
// K2 = (2 pi)^{-n} prod sigma_i^{-1} exp(-(x_i - y_i)^2 / (2 sigma_i^2)),
// K1 = the same product over the cross-section axes only.
KernelSpec gaussian_kernel(const GridSpec& g, const std::vector<double>& sigma, const Field& b);

void save_kernel(const KernelSpec& k, const std::string& dir);
KernelSpec load_kernel(const std::string& dir);

}  // namespace mfgcip
