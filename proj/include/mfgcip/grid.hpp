#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfgcip {

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainMismatch : public GridError {
 public:
  using GridError::GridError;
};

// Box (-A_1,A_1) x ... x (-A_n,A_n) times [0,T], uniform nodes including
// the boundary. For n == 1 the second axis is a dummy of one node.
struct GridSpec {
  int n = 1;
  std::array<double, 2> A{1.0, 1.0};
  double T = 1.0;
  std::array<int, 2> Nx{3, 1};
  int Nt = 3;
  double gamma = 1.0;

  void validate() const;
  double h(int axis) const;  // axis is 0-based
  double tau() const { return T / (Nt - 1); }
  int nodes(int axis) const { return axis < n ? Nx[axis] : 1; }
  int nspace() const { return nodes(0) * nodes(1); }
  double coord(int axis, int i) const { return -A[axis] + i * h(axis); }
  double time(int k) const { return k * tau(); }
  bool operator==(const GridSpec& o) const;
};

enum class DomainKind { Spacetime, Space, LateralFace, TimeSlice, Pair };

// axis is 1-based on lateral faces, sign is +1 / -1.
struct DomainTag {
  DomainKind kind = DomainKind::Spacetime;
  int axis = 0;
  int sign = 0;
  int slice = 0;

  static DomainTag spacetime() { return {DomainKind::Spacetime, 0, 0, 0}; }
  static DomainTag space() { return {DomainKind::Space, 0, 0, 0}; }
  static DomainTag face(int axis, int sign) { return {DomainKind::LateralFace, axis, sign, 0}; }
  static DomainTag time_slice(int k) { return {DomainKind::TimeSlice, 0, 0, k}; }
  static DomainTag pair() { return {DomainKind::Pair, 0, 0, 0}; }

  std::string str() const;
  static DomainTag parse(const std::string& s);
  bool operator==(const DomainTag& o) const;
  bool is_spatial() const { return kind == DomainKind::Space || kind == DomainKind::TimeSlice; }
};

// Node values, row-major. Spacetime: index = k * nspace + i1 * N2 + i2.
// Face of axis 1: index = k * N2 + i2. Face of axis 2: index = k * N1 + i1.
// Pair (kernel tables): index = s * nspace + s' over spatial nodes, or
// over cross-section nodes for the cross-section kernel.
struct Field {
  GridSpec spec;
  DomainTag tag;
  std::vector<double> values;

  Field() = default;
  Field(const GridSpec& g, const DomainTag& t);
  Field(const GridSpec& g, const DomainTag& t, double fill);

  static std::size_t expected_count(const GridSpec& g, const DomainTag& t);
  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  // spacetime / spatial accessors
  double& at(int k, int i1, int i2 = 0) { return values[std::size_t(k) * spec.nspace() + i1 * spec.nodes(1) + i2]; }
  double at(int k, int i1, int i2 = 0) const { return values[std::size_t(k) * spec.nspace() + i1 * spec.nodes(1) + i2]; }
  double& sp(int i1, int i2 = 0) { return values[i1 * spec.nodes(1) + i2]; }
  double sp(int i1, int i2 = 0) const { return values[i1 * spec.nodes(1) + i2]; }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double c);
  double max_abs() const;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double c, Field a);
Field hadamard(const Field& a, const Field& b);

void require_tag(const Field& f, DomainKind kind, const char* op);
void require_same_layout(const Field& a, const Field& b, const char* op);

// Sampling helpers.
template <class Fn>
Field sample_spacetime(const GridSpec& g, Fn fn) {
  Field f(g, DomainTag::spacetime());
  for (int k = 0; k < g.Nt; ++k)
    for (int i = 0; i < g.nodes(0); ++i)
      for (int j = 0; j < g.nodes(1); ++j)
        f.at(k, i, j) = fn(g.coord(0, i), g.n > 1 ? g.coord(1, j) : 0.0, g.time(k));
  return f;
}

template <class Fn>
Field sample_space(const GridSpec& g, Fn fn) {
  Field f(g, DomainTag::space());
  for (int i = 0; i < g.nodes(0); ++i)
    for (int j = 0; j < g.nodes(1); ++j) f.sp(i, j) = fn(g.coord(0, i), g.n > 1 ? g.coord(1, j) : 0.0);
  return f;
}

// Finite differences: second-order central inside, second-order one-sided
// at boundary nodes. `axis` is 0-based. Accepts spacetime or spatial fields.
Field partial(const Field& f, int axis);
Field second_partial(const Field& f, int axis);
std::vector<Field> gradient(const Field& f);
Field laplacian(const Field& f);
Field dt(const Field& f);
Field divergence(const std::vector<Field>& comps);

// Trapezoid rule over the field's own domain. A lateral face of a 1-D box
// is a point carrying unit measure, so its integral is a time integral.
double integrate(const Field& f);
double norm_L2(const Field& f);

// Slices and traces of spacetime fields.
Field time_slice(const Field& f, int k);
Field embed_slice(const Field& slice, int k, Field into);
Field face_trace(const Field& f, int axis1, int sign);
// Outward normal derivative on a lateral face (one-sided, second order).
Field normal_derivative_trace(const Field& f, int axis1, int sign);
std::vector<std::pair<int, int>> lateral_faces(const GridSpec& g);

// Derivatives of lateral-face fields along time and tangential axes.
Field face_dt(const Field& f);
Field face_tangential(const Field& f, int order);

// H^{2,1} on a face: tangential first and second derivatives, the mixed
// normal-tangential derivatives (when the normal derivative trace is
// supplied), the function and its time derivative. Corner nodes belong to
// every face that contains them.
double norm_H21_lateral(const Field& trace, const Field* normal_trace = nullptr);
double norm_H10_lateral(const Field& trace);

// Spatial Sobolev norm, all derivatives of total order <= k (k <= 4).
double norm_Hk_space(const Field& f, int k);

// Field file: one text header line, then little-endian doubles.
void write_field(const Field& f, const std::string& path);
Field read_field(const std::string& path);

}  // namespace mfgcip
