#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mfgcip/mfg_forward.hpp"

namespace mfgcip {

// Reconstruction of b from observation data, given a solved reference
// triple (u2, m2, b2). The unknowns are the differences (u~, m~, b~).
struct InverseProblemSpec {
  CipData observed;
  MfgSolution reference;
  MfgCoefficients coeffs;  // kernel.b holds b2
  double lambda = 0.05;    // weight exp(2 lambda psi^nu), rescaled to max 1
  double nu = 3.0;
  bool carleman_weights = true;
  double eps = 1e-6;        // Tikhonov weight relative to the mean normal diagonal
  double r_bound_c = 1e-3;  // required lower bound of |R| on the reference
  int outer_iters = 30;
  double outer_tol = 1e-6;
  std::string solver = "auto";  // auto | direct | cg
  double cg_tol = 1e-12;
  int cg_max_iter = 20000;
  void validate() const;
};

struct ReconstructionResult {
  Field b_hat, u_hat, m_hat;
  std::vector<double> residual_history;  // weighted residual after each outer step
  int outer_iterations = 0;
  bool converged = false;
  std::string note;
  double rcond = 0;  // smallest reciprocal condition estimate over the Cholesky pivot blocks
  double penalty = 0;  // smoothness seminorm of the final (u~, m~, b~), eps factored out
  std::size_t rows = 0;
  double error_L2_gamma = -1, error_full = -1;  // filled by callers that know the truth
};

// Current differences from the reference.
struct InversionIterate {
  Field ut, mt, bt;
};
InversionIterate zero_iterate(const GridSpec& g);

// Weighted rows in compressed form. Columns: u~ and m~ level by level
// (u~ then m~ within a level), followed by b~.
struct LinearSystem {
  std::vector<std::size_t> row_ptr{0};
  std::vector<int> cols;
  std::vector<double> vals;
  std::vector<double> rhs;
  std::size_t n_main = 0;
  int n_b = 0;
  int level_size = 0;  // unknowns per time level
  std::size_t pde_rows = 0, data_rows = 0;
  std::size_t rows() const { return rhs.size(); }
  double residual_norm(const std::vector<double>& x) const;
};
LinearSystem assemble_system(const InverseProblemSpec& spec, const InversionIterate& it);

// Minimizes |A x - d|^2 + eps * (smoothness of u~, m~ within each level, and of b~).
std::vector<double> solve_normal(const InverseProblemSpec& spec, const LinearSystem& sys, double* rcond = nullptr);

ReconstructionResult solve_outer(const InverseProblemSpec& spec);

struct ExtractedB {
  Field b_tilde;
  double endpoint_gap = 0;  // max |v(.,0) - v(.,T)|
  bool flagged = false;
};
ExtractedB extract_b_from_v(const Field& v, double grid_tol);

// Node-wise least squares over t of b bracket(m) = -(u_t + Lap u - a|grad u|^2/2 + s m - f).
// Throws when |bracket| < c at every time for some node.
Field oracle_recover(const Field& u, const Field& m, const MfgCoefficients& coeffs, double c = 1e-8,
                     const Field* forcing = nullptr);

struct ErrorReport {
  double L2_gamma = 0, L2_full = 0, Linf = 0;
  double rms_gamma = 0, rms_outside = 0;  // root-mean-square over the two parts of the box
};
ErrorReport error_report(const Field& b_hat, const Field& b_true, double gamma);

}  // namespace mfgcip
