#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfgcip/grid.hpp"

namespace mfgcip {

class CarlemanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CarlemanParams {
  double lambda = 2.0;
  double nu = 3.0;
  double gamma = 1.0;
  double lambda0 = 1.0;
  void validate() const;  // lambda > 1, nu > 2
};

// psi = x1 + A1 + 2 on [-A1, A1].
double psi(const GridSpec& g, double x1);
Field psi_field(const GridSpec& g);
// 2 lambda psi^nu
Field log_cwf(const GridSpec& g, double lambda, double nu);
// exp(2 lambda psi^nu - 2 lambda (2 A1 + 2)^nu), in (0, 1].
Field cwf_scaled(const GridSpec& g, double lambda, double nu);

// V and U of the pointwise estimate, with the scaled weight.
Field eval_V(const Field& u, const CarlemanParams& p);
std::vector<Field> eval_U(const Field& u, const CarlemanParams& p);

enum class HeatSign { Minus, Plus };  // d/dt - Lap, d/dt + Lap
Field reflect_time(const Field& u);

struct PointwiseReport {
  double lambda = 0;
  double C = 0;
  double min_slack = 0;
  double neg_fraction = 0;
  Field slack;
};
PointwiseReport check_pointwise(const Field& u, const CarlemanParams& p, HeatSign sign, double C);

struct WeightedTerm {
  std::string name;
  double log_weight = 0;  // natural log of the (scaled) weight
  double value = 0;       // unweighted squared norm or integral
};

struct IntegralReport {
  double lambda = 0;
  double lhs_pde = 0;               // int (Lu)^2 phi
  std::vector<WeightedTerm> boundary_terms;
  std::vector<WeightedTerm> interior_terms;  // t+tangential Hessian / lambda, grad, u
  double interior_sum = 0;          // second-derivative sum over indices 2..n
  double interior_sum_full = 0;     // same over 1..n
  double log_boundary_sum = 0;
  double admissible_C = 0;          // +inf when boundary terms dominate
  double admissible_C_full = 0;
  double zero_C_slack = 0;          // int (Lu)^2 phi - dV/dt - div U
};
// Requires u(., 0) == u(., T).
IntegralReport check_integral(const Field& u, const CarlemanParams& p, HeatSign sign);

double cancellation_ratio(const Field& u, const CarlemanParams& p);
double gauss_residual(const Field& u, const CarlemanParams& p);

double lambda_of_delta(double delta, double A1, double gamma, double nu0);
double holder_exponent(double A1, double gamma, double nu0);

// Random smooth time-periodic functions (u(.,0) == u(.,T)).
std::vector<Field> carleman_battery(const GridSpec& g, int count, std::uint64_t seed);

// Smallest lambda in (lo, hi] where every battery member has a nonnegative
// zero-C integrated slack and a positive admissible C for both signs.
double calibrate_lambda0(const std::vector<Field>& battery, double nu, double lo = 1.0, double hi = 40.0,
                         double tol = 1e-3);

}  // namespace mfgcip
