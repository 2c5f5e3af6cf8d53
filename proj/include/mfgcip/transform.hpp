#pragma once

#include <vector>

#include "mfgcip/mfg_forward.hpp"

namespace mfgcip {

// Differences of two solutions: u1 - u2, m1 - m2, b1 - b2.
struct DiffTriple {
  Field u, m, b;
};
DiffTriple diff_triple(const MfgSolution& s1, const Field& b1, const MfgSolution& s2, const Field& b2);

// With rho = bracket(m2) = -R, ubar = utilde / rho solves
//   ubar_t + Lap ubar + P . grad ubar + Q ubar + rho^{-1}(b1 bracket(mtilde) + s mtilde) = -btilde.
struct PQ {
  std::vector<Field> P;
  Field Q;
  Field rho;
};
PQ build_pq_coefficients(const MfgSolution& s1, const MfgSolution& s2, const MfgCoefficients& c2);

// Time-endpoint values of ubar_t + btilde (W) and of mtilde_t (Z),
// computed from the observation data alone.
struct EndpointFields {
  Field W0, WT, Z0, ZT;
};
EndpointFields endpoint_fields(const CipData& d1, const CipData& d2, const Field& b1, const PQ& pq,
                               const MfgCoefficients& c2);

// v = ubar_t - (W0 (1 - t/T) + WT t/T),  w = mtilde_t - (Z0 (1 - t/T) + ZT t/T),
// so that v(., 0) = v(., T) = -btilde and w(., 0) = w(., T) = 0.
struct TransformedFields {
  Field ubar, vbar, wbar, v, w;
};
TransformedFields make_vw(const DiffTriple& d, const PQ& pq, const EndpointFields& e);

Field cumulative_time_integral(const Field& f);

struct ResidualBounds {
  double C1 = 1;
  Field lhs_v, rhs_v, lhs_w, rhs_w;
  double X1_L2 = 0, X2_L2 = 0;  // L2 norms of the parts not covered by C1 * rhs
  double data_norm = 0;         // sqrt of the sum of squared H^4 norms of the endpoint differences
};
// |v_t + Lap v| <= C1 (|grad v| + |v| + nonlocal and Volterra |w| terms) + X1
// |w_t - Lap w| <= C1 (|grad w| + |w| + Volterra terms + |grad v| + |Lap v| + ...) + X2
ResidualBounds residual_bounds(const TransformedFields& tf, const CipData& d1, const CipData& d2, double C1 = 1.0);

}  // namespace mfgcip
