#include "mfgcip/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mfgcip/carleman.hpp"
#include "mfgcip/discrete.hpp"

namespace mfgcip {

void InverseProblemSpec::validate() const {
  const GridSpec& g = reference.u.spec;
  coeffs.validate(g);
  require_tag(reference.m, DomainKind::Spacetime, "reference m");
  if (!(observed.p.spec == g)) throw DomainMismatch("inversion: data and reference live on different grids");
  if (eps < 0) throw std::invalid_argument("inversion: eps must be nonnegative");
  if (!(lambda >= 0) || !(nu > 0)) throw std::invalid_argument("inversion: bad weight parameters");
  if (solver != "auto" && solver != "direct" && solver != "cg")
    throw std::invalid_argument("inversion: solver must be auto, direct or cg");
  RBound rb = check_R_bound(compute_R(coeffs.kernel, reference.m), r_bound_c);
  if (!rb.ok)
    throw NumericalFailure("inversion: |R| of the reference drops to " + std::to_string(rb.min_abs) +
                           ", below the required bound");
}

InversionIterate zero_iterate(const GridSpec& g) {
  return {Field(g, DomainTag::spacetime()), Field(g, DomainTag::spacetime()), Field(g, DomainTag::space())};
}

double LinearSystem::residual_norm(const std::vector<double>& x) const {
  double s = 0;
  for (std::size_t r = 0; r < rows(); ++r) {
    double v = -rhs[r];
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) v += vals[p] * x[cols[p]];
    s += v * v;
  }
  return std::sqrt(s);
}

namespace {

struct RowBuilder {
  LinearSystem& sys;
  LevelOps::Coeffs row;  // (column, value)
  void add(int col, double v) { row.push_back({col, v}); }
  void finish(double weight, double rhs) {
    std::sort(row.begin(), row.end());
    for (std::size_t i = 0; i < row.size();) {
      int c = row[i].first;
      double v = 0;
      for (; i < row.size() && row[i].first == c; ++i) v += row[i].second;
      if (v != 0) {
        sys.cols.push_back(c);
        sys.vals.push_back(weight * v);
      }
    }
    sys.row_ptr.push_back(sys.cols.size());
    sys.rhs.push_back(weight * rhs);
    row.clear();
  }
};

// Outward one-sided normal derivative coefficients at a boundary node.
void normal_coeffs(const GridSpec& g, int axis0, int sign, int s, LevelOps::Coeffs& out) {
  int stride = axis0 == 0 ? g.nodes(1) : 1;
  double h = g.h(axis0);
  int dir = sign > 0 ? -1 : 1;  // towards the interior
  // sign > 0: (3 f_e - 4 f_{e-1} + f_{e-2}) / 2h; sign < 0: -(-3 f_0 + 4 f_1 - f_2) / 2h
  out.push_back({s, 3 / (2 * h)});
  out.push_back({s + dir * stride, -4 / (2 * h)});
  out.push_back({s + 2 * dir * stride, 1 / (2 * h)});
}

std::vector<int> face_nodes(const GridSpec& g, int axis1, int sign) {
  std::vector<int> out;
  int N1 = g.nodes(0), N2 = g.nodes(1);
  if (axis1 == 1) {
    int i1 = sign > 0 ? N1 - 1 : 0;
    for (int i2 = 0; i2 < N2; ++i2) out.push_back(i1 * N2 + i2);
  } else {
    int i2 = sign > 0 ? N2 - 1 : 0;
    for (int i1 = 0; i1 < N1; ++i1) out.push_back(i1 * N2 + i2);
  }
  return out;
}

}  // namespace

LinearSystem assemble_system(const InverseProblemSpec& spec, const InversionIterate& it) {
  const GridSpec& g = spec.reference.u.spec;
  const int nsp = g.nspace(), Nt = g.Nt, n = g.n;
  const double tau = g.tau();
  double hn = 1;
  for (int a = 0; a < n; ++a) hn *= g.h(a);
  LevelOps ops(g);
  LinearSystem sys;
  sys.n_main = std::size_t(2) * nsp * Nt;
  sys.n_b = nsp;
  sys.level_size = 2 * nsp;
  auto U = [&](int k, int s) { return k * 2 * nsp + s; };
  auto M = [&](int k, int s) { return k * 2 * nsp + nsp + s; };
  auto B = [&](int s) { return int(sys.n_main) + s; };

  const Field& u2 = spec.reference.u;
  const Field& m2 = spec.reference.m;
  const Field u1 = u2 + it.ut;
  const Field m1 = m2 + it.mt;
  const Field b1 = spec.coeffs.kernel.b + it.bt;
  const Field I2 = bracket(spec.coeffs.kernel, m2);
  const double* a = spec.coeffs.a.values.data();
  const Field& sc = spec.coeffs.s;

  std::vector<double> wpde(nsp, 1.0);
  if (spec.carleman_weights) {
    Field w = cwf_scaled(g, spec.lambda, spec.nu);
    for (int s = 0; s < nsp; ++s) wpde[s] = std::sqrt(w.values[s]);
  }
  const double qpde = std::sqrt(hn * tau);

  // Bracket stencils do not depend on the level.
  std::vector<std::vector<std::pair<int, double>>> bw(nsp);
  for (int i1 = 0; i1 < g.nodes(0); ++i1)
    for (int i2 = 0; i2 < g.nodes(1); ++i2) bw[i1 * g.nodes(1) + i2] = bracket_weights(spec.coeffs.kernel, i1, i2);

  RowBuilder rb{sys, {}};
  LevelOps::Coeffs c;
  std::vector<double> u1m(nsp), u2m(nsp), m1m(nsp);
  for (int k = 0; k + 1 < Nt; ++k) {
    const double* u1a = u1.values.data() + std::size_t(k) * nsp;
    const double* u1b = u1a + nsp;
    const double* u2a = u2.values.data() + std::size_t(k) * nsp;
    const double* u2b = u2a + nsp;
    const double* m1a = m1.values.data() + std::size_t(k) * nsp;
    const double* m1b = m1a + nsp;
    for (int s = 0; s < nsp; ++s) {
      u1m[s] = 0.5 * (u1a[s] + u1b[s]);
      u2m[s] = 0.5 * (u2a[s] + u2b[s]);
      m1m[s] = 0.5 * (m1a[s] + m1b[s]);
    }
    for (int s : ops.interior()) {
      const double w = wpde[s] * qpde;
      // HJB difference
      rb.add(U(k + 1, s), 1 / tau);
      rb.add(U(k, s), -1 / tau);
      c.clear();
      ops.lap_coeffs(s, c);
      for (auto [j, v] : c) {
        rb.add(U(k, j), 0.5 * v);
        rb.add(U(k + 1, j), 0.5 * v);
      }
      for (int ax = 0; ax < n; ++ax) {
        double G = ops.grad(u1m.data(), s, ax) + ops.grad(u2m.data(), s, ax);
        c.clear();
        ops.grad_coeffs(s, ax, c);
        for (auto [j, v] : c) {
          rb.add(U(k, j), -0.25 * a[s] * G * v);
          rb.add(U(k + 1, j), -0.25 * a[s] * G * v);
        }
      }
      for (auto [j, v] : bw[s]) {
        rb.add(M(k, j), 0.5 * b1.values[s] * v);
        rb.add(M(k + 1, j), 0.5 * b1.values[s] * v);
      }
      rb.add(M(k, s), 0.5 * sc.values[std::size_t(k) * nsp + s]);
      rb.add(M(k + 1, s), 0.5 * sc.values[std::size_t(k + 1) * nsp + s]);
      rb.add(B(s), 0.5 * (I2.values[std::size_t(k) * nsp + s] + I2.values[std::size_t(k + 1) * nsp + s]));
      rb.finish(w, 0.0);

      // FP difference
      rb.add(M(k + 1, s), 1 / tau);
      rb.add(M(k, s), -1 / tau);
      c.clear();
      ops.lap_coeffs(s, c);
      for (auto [j, v] : c) {
        rb.add(M(k, j), -0.5 * v);
        rb.add(M(k + 1, j), -0.5 * v);
      }
      c.clear();
      ops.drift_coeffs_m(a, u2m.data(), s, c);
      for (auto [j, v] : c) {
        rb.add(M(k, j), -0.5 * v);
        rb.add(M(k + 1, j), -0.5 * v);
      }
      c.clear();
      ops.drift_coeffs_u(a, m1m.data(), s, c);
      for (auto [j, v] : c) {
        rb.add(U(k, j), -0.5 * v);
        rb.add(U(k + 1, j), -0.5 * v);
      }
      rb.finish(w, 0.0);
      sys.pde_rows += 2;
    }
  }

  // Endpoint data.
  CipData ref = generate_cip_data(spec.reference, CipMode::Complete);
  const CipData& obs = spec.observed;
  const double qsp = std::sqrt(hn);
  int last = Nt - 1;
  for (int s = 0; s < nsp; ++s) {
    rb.add(U(0, s), 1);
    rb.finish(qsp, obs.p.values[s] - ref.p.values[s]);
    rb.add(M(0, s), 1);
    rb.finish(qsp, obs.q.values[s] - ref.q.values[s]);
    rb.add(U(last, s), 1);
    rb.finish(qsp, obs.F.values[s] - ref.F.values[s]);
    rb.add(M(last, s), 1);
    rb.finish(qsp, obs.G.values[s] - ref.G.values[s]);
    sys.data_rows += 4;
  }
  // Lateral Cauchy data on the observed faces.
  for (auto [axis, sign] : lateral_faces(g)) {
    if (!face_observed(obs.mode, axis, sign)) continue;
    const FaceData* fo = obs.face(axis, sign);
    const FaceData* fr = ref.face(axis, sign);
    if (!fo) throw IncompatibleData("inversion: observation lacks a face required by its mode");
    std::vector<int> nodes = face_nodes(g, axis, sign);
    double qf = std::sqrt(tau * hn / g.h(axis - 1));
    int m = int(nodes.size());
    for (int k = 0; k < Nt; ++k)
      for (int j = 0; j < m; ++j) {
        int s = nodes[j];
        std::size_t fi = std::size_t(k) * m + j;
        rb.add(U(k, s), 1);
        rb.finish(qf, fo->f0.values[fi] - fr->f0.values[fi]);
        rb.add(M(k, s), 1);
        rb.finish(qf, fo->g0.values[fi] - fr->g0.values[fi]);
        c.clear();
        normal_coeffs(g, axis - 1, sign, s, c);
        for (auto [col, v] : c) rb.add(U(k, col), v);
        rb.finish(qf, fo->f1.values[fi] - fr->f1.values[fi]);
        for (auto [col, v] : c) rb.add(M(k, col), v);
        rb.finish(qf, fo->g1.values[fi] - fr->g1.values[fi]);
        sys.data_rows += 4;
      }
  }
  return sys;
}

namespace {

// Second differences along each axis at nodes interior to that axis,
// without the 1/h^2 factor.
std::vector<LevelOps::Coeffs> smoothing_rows(const GridSpec& g) {
  std::vector<LevelOps::Coeffs> rows;
  int N1 = g.nodes(0), N2 = g.nodes(1);
  for (int ax = 0; ax < g.n; ++ax) {
    int stride = ax == 0 ? N2 : 1;
    for (int i1 = 0; i1 < N1; ++i1)
      for (int i2 = 0; i2 < N2; ++i2) {
        int i = ax == 0 ? i1 : i2, len = ax == 0 ? N1 : N2;
        if (i == 0 || i == len - 1) continue;
        int s = i1 * N2 + i2;
        rows.push_back({{s - stride, 1.0}, {s, -2.0}, {s + stride, 1.0}});
      }
  }
  return rows;
}

struct Regularizer {
  double wu = 0, wb = 0;
  std::vector<LevelOps::Coeffs> rows;
  std::vector<char> interior;
};

Regularizer make_regularizer(const InverseProblemSpec& spec, const LinearSystem& sys) {
  const GridSpec& g = spec.reference.u.spec;
  Regularizer r;
  r.rows = smoothing_rows(g);
  LevelOps ops(g);
  r.interior.assign(g.nspace(), 0);
  for (int s : ops.interior()) r.interior[s] = 1;
  std::vector<double> diag(sys.n_main + sys.n_b, 0.0);
  for (std::size_t p = 0; p < sys.vals.size(); ++p) diag[sys.cols[p]] += sys.vals[p] * sys.vals[p];
  double sm = 0, sb = 0;
  for (std::size_t i = 0; i < sys.n_main; ++i) sm += diag[i];
  for (int i = 0; i < sys.n_b; ++i) sb += diag[sys.n_main + i];
  r.wu = spec.eps * sm / double(sys.n_main);
  r.wb = spec.eps * sb / double(sys.n_b);
  return r;
}

template <class AddFn>
void for_each_reg_entry(const Regularizer& R, const LinearSystem& sys, int nsp, int Nt, AddFn add) {
  for (int k = 0; k < Nt; ++k)
    for (int blk = 0; blk < 2; ++blk) {
      int off = k * 2 * nsp + blk * nsp;
      for (const auto& row : R.rows)
        for (auto [i, vi] : row)
          for (auto [j, vj] : row) add(off + i, off + j, R.wu * vi * vj);
    }
  int off = int(sys.n_main);
  for (const auto& row : R.rows)
    for (auto [i, vi] : row)
      for (auto [j, vj] : row) add(off + i, off + j, R.wb * vi * vj);
  for (int s = 0; s < nsp; ++s)
    if (R.interior[s]) add(off + s, off + s, R.wb);
}

// The main block of the normal matrix is block tridiagonal over time levels.
std::vector<double> solve_block_tridiagonal(const InverseProblemSpec& spec, const LinearSystem& sys, double* rcond) {
  const GridSpec& g = spec.reference.u.spec;
  const int L = g.Nt, nl = sys.level_size, nb = sys.n_b;
  const int N = int(sys.n_main);
  using Mat = Eigen::MatrixXd;
  std::vector<Mat> D(L, Mat::Zero(nl, nl)), E(L > 1 ? L - 1 : 0, Mat::Zero(nl, nl));
  Mat NAB = Mat::Zero(N, nb), NBB = Mat::Zero(nb, nb);
  Eigen::VectorXd rA = Eigen::VectorXd::Zero(N), rB = Eigen::VectorXd::Zero(nb);

  // i <= j on entry
  auto add = [&](int i, int j, double v) {
    if (j < N) {
      int li = i / nl, lj = j / nl, ii = i % nl, jj = j % nl;
      if (li == lj) {
        D[li](ii, jj) += v;
        if (ii != jj) D[li](jj, ii) += v;
      } else if (lj == li + 1) {
        E[li](jj, ii) += v;
      } else {
        throw NumericalFailure("inversion: row couples non-adjacent time levels");
      }
    } else if (i < N) {
      NAB(i, j - N) += v;
    } else {
      NBB(i - N, j - N) += v;
      if (i != j) NBB(j - N, i - N) += v;
    }
  };
  for (std::size_t r = 0; r < sys.rows(); ++r) {
    std::size_t p0 = sys.row_ptr[r], p1 = sys.row_ptr[r + 1];
    for (std::size_t p = p0; p < p1; ++p) {
      int i = sys.cols[p];
      double vi = sys.vals[p];
      if (i < N) rA[i] += vi * sys.rhs[r];
      else rB[i - N] += vi * sys.rhs[r];
      for (std::size_t q = p; q < p1; ++q) add(i, sys.cols[q], vi * sys.vals[q]);
    }
  }
  Regularizer R = make_regularizer(spec, sys);
  for_each_reg_entry(R, sys, g.nspace(), g.Nt, [&](int i, int j, double v) {
    if (i <= j) add(i, j, v);
  });

  // Block Cholesky: D_k - G_{k-1} G_{k-1}^T = L_k L_k^T, G_k = E_k L_k^{-T}.
  std::vector<Eigen::LLT<Mat>> chol(L);
  std::vector<Mat> G(L > 1 ? L - 1 : 0);
  double rc = 1;
  for (int k = 0; k < L; ++k) {
    if (k > 0) D[k].noalias() -= G[k - 1] * G[k - 1].transpose();
    chol[k].compute(D[k]);
    if (chol[k].info() != Eigen::Success)
      throw NumericalFailure("inversion: normal matrix is not positive definite at level " + std::to_string(k));
    rc = std::min(rc, chol[k].rcond());
    if (k + 1 < L) {
      Mat Et = E[k].transpose();
      chol[k].matrixL().solveInPlace(Et);
      G[k] = Et.transpose();
    }
    D[k].resize(0, 0);
  }
  if (rcond) *rcond = rc;
  if (!(rc > std::numeric_limits<double>::epsilon()))
    throw NumericalFailure("inversion: normal matrix is numerically singular (block rcond " + std::to_string(rc) + ")");

  Mat Y(N, nb + 1);
  Y.col(0) = rA;
  Y.rightCols(nb) = NAB;
  for (int k = 0; k < L; ++k) {
    auto blk = Y.middleRows(Eigen::Index(k) * nl, nl);
    if (k > 0) blk.noalias() -= G[k - 1] * Y.middleRows(Eigen::Index(k - 1) * nl, nl);
    chol[k].matrixL().solveInPlace(blk);
  }
  for (int k = L - 1; k >= 0; --k) {
    auto blk = Y.middleRows(Eigen::Index(k) * nl, nl);
    if (k + 1 < L) blk.noalias() -= G[k].transpose() * Y.middleRows(Eigen::Index(k + 1) * nl, nl);
    chol[k].matrixU().solveInPlace(blk);
  }
  Mat S = NBB - NAB.transpose() * Y.rightCols(nb);
  Eigen::VectorXd sb = rB - NAB.transpose() * Y.col(0);
  Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success) throw NumericalFailure("inversion: reduced system for b is not positive definite");
  Eigen::VectorXd xb = llt.solve(sb);
  Eigen::VectorXd xa = Y.col(0) - Y.rightCols(nb) * xb;

  std::vector<double> x(std::size_t(N) + nb);
  for (int i = 0; i < N; ++i) x[i] = xa[i];
  for (int i = 0; i < nb; ++i) x[std::size_t(N) + i] = xb[i];
  return x;
}

std::vector<double> solve_cg(const InverseProblemSpec& spec, const LinearSystem& sys) {
  const GridSpec& g = spec.reference.u.spec;
  const Eigen::Index nt = Eigen::Index(sys.n_main) + sys.n_b;
  using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(sys.vals.size());
  for (std::size_t r = 0; r < sys.rows(); ++r)
    for (std::size_t p = sys.row_ptr[r]; p < sys.row_ptr[r + 1]; ++p)
      trip.emplace_back(Eigen::Index(r), sys.cols[p], sys.vals[p]);
  SpMat A(Eigen::Index(sys.rows()), nt);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> Nm = Eigen::SparseMatrix<double>(A.transpose()) * A;
  trip.clear();
  Regularizer R = make_regularizer(spec, sys);
  for_each_reg_entry(R, sys, g.nspace(), g.Nt, [&](int i, int j, double v) { trip.emplace_back(i, j, v); });
  Eigen::SparseMatrix<double> Rm(nt, nt);
  Rm.setFromTriplets(trip.begin(), trip.end());
  Nm += Rm;
  Eigen::Map<const Eigen::VectorXd> d(sys.rhs.data(), Eigen::Index(sys.rows()));
  Eigen::VectorXd rhs = A.transpose() * d;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(spec.cg_tol);
  cg.setMaxIterations(spec.cg_max_iter);
  cg.compute(Nm);
  Eigen::VectorXd x = cg.solve(rhs);
  if (cg.info() != Eigen::Success)
    throw NumericalFailure("inversion: conjugate gradients stopped at relative residual " +
                           std::to_string(cg.error()));
  return std::vector<double>(x.data(), x.data() + x.size());
}

double penalty_seminorm(const InverseProblemSpec& spec, const LinearSystem& sys, const std::vector<double>& x) {
  const GridSpec& g = spec.reference.u.spec;
  Regularizer R = make_regularizer(spec, sys);
  double q = 0;
  for_each_reg_entry(R, sys, g.nspace(), g.Nt, [&](int i, int j, double v) { q += x[i] * v * x[j]; });
  return spec.eps > 0 ? std::sqrt(std::max(q, 0.0) / spec.eps) : 0.0;
}

bool use_direct(const InverseProblemSpec& spec, const LinearSystem& sys) {
  if (spec.solver == "direct") return true;
  if (spec.solver == "cg") return false;
  return 2.0 * spec.reference.u.spec.Nt * double(sys.level_size) * sys.level_size < 1.5e8;
}

InversionIterate unpack(const GridSpec& g, const std::vector<double>& x) {
  InversionIterate it = zero_iterate(g);
  int nsp = g.nspace();
  for (int k = 0; k < g.Nt; ++k)
    for (int s = 0; s < nsp; ++s) {
      std::size_t idx = std::size_t(k) * nsp + s;
      it.ut.values[idx] = x[std::size_t(k) * 2 * nsp + s];
      it.mt.values[idx] = x[std::size_t(k) * 2 * nsp + nsp + s];
    }
  std::size_t off = std::size_t(2) * nsp * g.Nt;
  for (int s = 0; s < nsp; ++s) it.bt.values[s] = x[off + s];
  return it;
}

}  // namespace

std::vector<double> solve_normal(const InverseProblemSpec& spec, const LinearSystem& sys, double* rcond) {
  if (use_direct(spec, sys)) return solve_block_tridiagonal(spec, sys, rcond);
  if (rcond) *rcond = -1;
  return solve_cg(spec, sys);
}

ReconstructionResult solve_outer(const InverseProblemSpec& spec) {
  spec.validate();
  const GridSpec& g = spec.reference.u.spec;
  ReconstructionResult res;
  InversionIterate it = zero_iterate(g);
  LinearSystem sys = assemble_system(spec, it);
  std::vector<double> x;
  for (int outer = 0; outer < spec.outer_iters; ++outer) {
    x = solve_normal(spec, sys, &res.rcond);
    InversionIterate next = unpack(g, x);
    double change = norm_L2(next.bt - it.bt) / std::max(norm_L2(next.bt), 1e-300);
    it = std::move(next);
    res.outer_iterations = outer + 1;
    sys = assemble_system(spec, it);
    double r = sys.residual_norm(x);
    if (!std::isfinite(r)) throw Diverged("inversion: non-finite residual", res.residual_history);
    res.residual_history.push_back(r);
    std::size_t h = res.residual_history.size();
    if (h >= 2 && r > 10 * res.residual_history.front() && r > 1e-12)
      throw Diverged("inversion: weighted residual grew tenfold", res.residual_history);
    if (change < spec.outer_tol) {
      res.converged = true;
      break;
    }
    if (h >= 3 && r > res.residual_history[h - 2] * (1 + 1e-6) && r > 1e-12) {
      res.note = "weighted residual increased; stopped early";
      break;
    }
  }
  if (!res.converged && res.note.empty()) res.note = "outer iteration limit reached";
  res.rows = sys.rows();
  if (!x.empty()) res.penalty = penalty_seminorm(spec, sys, x);
  res.b_hat = spec.coeffs.kernel.b + it.bt;
  res.u_hat = spec.reference.u + it.ut;
  res.m_hat = spec.reference.m + it.mt;
  return res;
}

ExtractedB extract_b_from_v(const Field& v, double grid_tol) {
  require_tag(v, DomainKind::Spacetime, "extract_b_from_v");
  const GridSpec& g = v.spec;
  int nsp = g.nspace();
  ExtractedB out;
  out.b_tilde = Field(g, DomainTag::space());
  const double* v0 = v.values.data();
  const double* vT = v0 + std::size_t(g.Nt - 1) * nsp;
  for (int s = 0; s < nsp; ++s) {
    out.b_tilde.values[s] = -0.5 * (v0[s] + vT[s]);
    out.endpoint_gap = std::max(out.endpoint_gap, std::abs(v0[s] - vT[s]));
  }
  out.flagged = out.endpoint_gap > 10 * grid_tol;
  return out;
}

Field oracle_recover(const Field& u, const Field& m, const MfgCoefficients& coeffs, double c, const Field* forcing) {
  require_tag(u, DomainKind::Spacetime, "oracle_recover");
  require_same_layout(u, m, "oracle_recover");
  const GridSpec& g = u.spec;
  int nsp = g.nspace();
  Field br = bracket(coeffs.kernel, m);
  std::vector<Field> gu = gradient(u);
  Field gsq = hadamard(gu[0], gu[0]);
  for (int i = 1; i < g.n; ++i) gsq += hadamard(gu[i], gu[i]);
  Field lhs = dt(u) + laplacian(u) + hadamard(coeffs.s, m);
  for (std::size_t i = 0; i < lhs.size(); ++i) lhs.values[i] -= 0.5 * coeffs.a.values[i % nsp] * gsq.values[i];
  if (forcing) lhs -= *forcing;
  Field b(g, DomainTag::space());
  for (int s = 0; s < nsp; ++s) {
    double num = 0, den = 0, peak = 0;
    for (int k = 0; k < g.Nt; ++k) {
      std::size_t i = std::size_t(k) * nsp + s;
      num += br.values[i] * -lhs.values[i];
      den += br.values[i] * br.values[i];
      peak = std::max(peak, std::abs(br.values[i]));
    }
    if (!(peak >= c)) throw NumericalFailure("oracle_recover: b is unidentifiable where the bracket vanishes");
    b.values[s] = num / den;
  }
  return b;
}

ErrorReport error_report(const Field& b_hat, const Field& b_true, double gamma) {
  require_same_layout(b_hat, b_true, "error_report");
  if (!b_hat.tag.is_spatial()) throw DomainMismatch("error_report: spatial fields expected");
  const GridSpec& g = b_hat.spec;
  if (!(gamma >= 0 && gamma < 2 * g.A[0])) throw std::invalid_argument("error_report: gamma must lie in [0, 2*A1)");
  Field e = b_hat - b_true;
  ErrorReport r;
  r.Linf = e.max_abs();
  Field e2 = hadamard(e, e);
  r.L2_full = std::sqrt(integrate(e2));
  int N1 = g.nodes(0), N2 = g.nodes(1);
  double cut = -g.A[0] + gamma;
  int first = 0;
  while (first < N1 && g.coord(0, first) < cut - 1e-12 * g.A[0]) ++first;
  double sg = 0, so = 0;
  int ng = 0, no = 0;
  double h1 = g.h(0);
  for (int i1 = 0; i1 < N1; ++i1) {
    double row = 0;
    for (int i2 = 0; i2 < N2; ++i2) {
      double w2 = (g.n > 1) ? ((i2 == 0 || i2 == N2 - 1) ? 0.5 : 1.0) * g.h(1) : 1.0;
      row += w2 * e2.sp(i1, i2);
      if (i1 >= first) {
        sg += e2.sp(i1, i2);
        ++ng;
      } else {
        so += e2.sp(i1, i2);
        ++no;
      }
    }
    if (i1 >= first && first < N1 - 1) {
      double w1 = (i1 == first || i1 == N1 - 1) ? 0.5 * h1 : h1;
      r.L2_gamma += w1 * row;
    }
  }
  r.L2_gamma = std::sqrt(r.L2_gamma);
  r.rms_gamma = ng ? std::sqrt(sg / ng) : 0.0;
  r.rms_outside = no ? std::sqrt(so / no) : 0.0;
  return r;
}

}  // namespace mfgcip
