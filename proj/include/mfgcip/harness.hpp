#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfgcip/config.hpp"
#include "mfgcip/inversion.hpp"

namespace mfgcip {

// Every tunable of the standard experiment, with its default.
std::string default_config_text();
Config default_config();
// Overlays the keys of `path` (if non-empty) on the defaults.
Config load_config(const std::string& path);

GridSpec grid_from_config(const Config& cfg);

// Reference triple (b2) and truth (b1 = b2 + bump) solved on the same grid.
struct StandardInstance {
  GridSpec grid;
  MfgCoefficients coeffs_ref;  // kernel.b = b2
  MfgCoefficients coeffs_true;
  Field b_ref, b_true, F, q;
  BoundaryConditions bc_ref, bc_true;
  MfgSolution ref, truth;
  PicardOptions picard;
};
// coefficients and data only; nothing solved
StandardInstance instance_problem(const Config& cfg);
StandardInstance build_instance(const Config& cfg);

// Replaces the time-constant lateral data by data satisfying the first-order
// corner conditions (m_t at t = 0, u_t at t = T) of the solved system, by
// repeated solves.
MfgSolution solve_corner_compatible(const MfgCoefficients& c, const Field& F, const Field& q, BoundaryConditions& bc,
                                    const PicardOptions& opt, int rounds);

enum class Channel { p, q, F, G, f0, f1, g0, g1 };
std::string to_string(Channel c);
std::vector<Channel> all_channels();

struct NoiseSpec {
  double delta = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // delta index within a sweep
  std::vector<Channel> channels = all_channels();
  int terms = 4;             // trigonometric modes per direction
};
// Norm used to calibrate one channel's perturbation.
double channel_norm(Channel c, const Field& perturbation);
CipData add_noise(const CipData& data, const NoiseSpec& spec);

InverseProblemSpec inversion_spec(const StandardInstance& inst, const CipData& observed, const Config& cfg,
                                  double lambda);
double inversion_lambda(const Config& cfg, CipMode mode, double delta);

// One reconstruction per eps; the corner is the point of largest positive
// Menger curvature of (log residual, log penalty).
struct LCurvePoint {
  double eps = 0, residual = 0, penalty = 0, curvature = 0;
  bool ok = true;
};
struct LCurve {
  std::vector<LCurvePoint> points;
  int corner = -1;  // -1: no corner, `eps` is the fallback
  double eps = 0;
};
LCurve lcurve_corner(std::vector<LCurvePoint> points, double fallback);
LCurve lcurve_scan(const InverseProblemSpec& base, const std::vector<double>& grid, double fallback, int threads = 1);

struct SweepRow {
  double delta = 0;
  std::uint64_t seed = 0;
  CipMode mode = CipMode::Complete;
  double lambda = 0;
  double eps = 0;
  double err_gamma = 0, err_full = 0;
  double rms_gamma = 0, rms_outside = 0;
  double residual = 0;
  bool ok = true;
  std::string message;
};

struct SlopeFit {
  double alpha_hat = 0, B_hat = 0, r2 = 0;
  int points = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepRow baseline;  // delta = 0
  LCurve lcurve;      // empty when not scanned
  SlopeFit fit;
  double alpha_predicted = 0;
  bool fit_ok = false;
  std::string fit_message;
};

// Rows are ordered delta-major, then seed, whatever the thread count. The
// L-curve is scanned on the middle delta (first seed); with
// inversion.eps_rule = lcurve its corner replaces inversion.eps everywhere.
SweepResult run_sweep(const StandardInstance& inst, const Config& cfg, const std::vector<double>& deltas,
                      const std::vector<std::uint64_t>& seeds, CipMode mode, int threads);

// Log-log least squares of error against delta; `baseline` is removed in
// quadrature first. Needs at least three distinct deltas above the floor.
SlopeFit fit_slope(const std::vector<double>& deltas, const std::vector<double>& errors, double baseline = 0);
// Seed-averaged errors per distinct delta, in increasing delta order.
void seed_average(const std::vector<SweepRow>& rows, bool over_gamma, std::vector<double>& deltas,
                  std::vector<double>& mean_err);

std::string sweep_csv(const SweepResult& r);
std::string sweep_json(const SweepResult& r);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace mfgcip
