#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mfgcip/grid.hpp"
#include "mfgcip/kernel.hpp"

namespace mfgcip {

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Diverged : public NumericalFailure {
 public:
  Diverged(const std::string& what, std::vector<double> history)
      : NumericalFailure(what), residuals(std::move(history)) {}
  std::vector<double> residuals;
};

class IncompatibleData : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// u_t + Lap u - a |grad u|^2 / 2 + b bracket(m) + s m = f_u
// m_t - Lap m - div(a m grad u)                     = f_m
struct MfgCoefficients {
  Field a;  // space
  Field s;  // spacetime
  KernelSpec kernel;
  void validate(const GridSpec& g) const;
  bool coupled() const;
};

enum class BcType { Dirichlet };

// Lateral values are read from the boundary nodes of spacetime fields.
struct BoundaryConditions {
  BcType type = BcType::Dirichlet;
  Field u_lateral;
  Field m_lateral;
};

// Crank-Nicolson steps with the quadratic term (HJB) and the drift (FP)
// taken at the half level by fixed-point sweeps. Two sweeps give second
// order; with sweep_tol > 0 the sweeps continue (up to max_sweeps) until
// the step's fixed point is reached.
struct StepOptions {
  int sweeps = 2;
  double sweep_tol = 0.0;
  int max_sweeps = 60;
};

Field solve_hjb_backward(const MfgCoefficients& c, const Field& m, const Field& F, const BoundaryConditions& bc,
                         const StepOptions& opt = {}, const Field* forcing = nullptr);
Field solve_fp_forward(const MfgCoefficients& c, const Field& u, const Field& q, const BoundaryConditions& bc,
                       const StepOptions& opt = {}, const Field* forcing = nullptr);

struct PicardOptions {
  double theta = 0.5;
  double tol = 1e-10;
  int max_iters = 200;
  StepOptions step;
};

struct MfgSolution {
  Field u;
  Field m;
  std::vector<double> picard_residuals;
};

// Damped fixed point m <- (1 - theta) m + theta FP(HJB(m)). When the HJB
// equation does not see m the damping is skipped. Throws Diverged when the
// relative gap stalls or max_iters is reached.
MfgSolution picard_solve(const MfgCoefficients& c, const Field& F, const Field& q, const BoundaryConditions& bc,
                         const PicardOptions& opt = {});

enum class CipMode { Complete, Incomplete };
std::string to_string(CipMode m);
CipMode parse_cip_mode(const std::string& s);

struct FaceData {
  int axis = 1;  // 1-based
  int sign = 1;
  Field f0, f1, g0, g1;  // u, outward du/dn, m, outward dm/dn
};

struct CipData {
  Field p, q, F, G;  // u(.,0), m(.,0), u(.,T), m(.,T)
  std::vector<FaceData> faces;
  CipMode mode = CipMode::Complete;
  const FaceData* face(int axis, int sign) const;
};

CipData generate_cip_data(const MfgSolution& sol, CipMode mode);
// Complete-minus-incomplete: the face x1 = -A1 is absent in incomplete mode.
bool face_observed(CipMode mode, int axis, int sign);

void save_cip_data(const CipData& d, const std::string& dir);
CipData load_cip_data(const std::string& dir);

}  // namespace mfgcip
