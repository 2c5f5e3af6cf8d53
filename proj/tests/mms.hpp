#pragma once

#include "mfgcip/mfg_forward.hpp"

namespace mms {

// Manufactured pair with analytic derivatives and an analytic nonlocal
// term (K1 = 1, K2 = kappa), so the forcing carries no quadrature error.
struct Problem {
  mfgcip::GridSpec g;
  mfgcip::MfgCoefficients coeffs;
  mfgcip::BoundaryConditions bc;
  mfgcip::Field u_exact, m_exact, f_u, f_m, F, q;
};

Problem make_1d(int N, int Nt);
// 2-D smoke version: no nonlocal term, s > 0.
Problem make_2d(int N, int Nt);

struct Order {
  std::vector<double> err_hjb, err_fp;
  double order_hjb = 0, order_fp = 0;
};
Order ladder(const std::vector<int>& Ns, bool two_d = false);

// Max-norm error of both solvers relative to the exact fields' max norm.
double relative_floor(const Problem& p);

}  // namespace mms
