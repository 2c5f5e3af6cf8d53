#include "mfgcip/grid.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace mfgcip {

void GridSpec::validate() const {
  if (n != 1 && n != 2) throw GridError("grid: n must be 1 or 2");
  for (int a = 0; a < n; ++a) {
    if (!(A[a] > 0)) throw GridError("grid: half-widths must be positive");
    if (Nx[a] < 3) throw GridError("grid: at least 3 nodes per axis");
  }
  if (!(T > 0)) throw GridError("grid: T must be positive");
  if (Nt < 3) throw GridError("grid: at least 3 time levels");
  if (!(gamma > 0 && gamma < 2 * A[0])) throw GridError("grid: gamma must lie in (0, 2*A1)");
}

double GridSpec::h(int axis) const { return 2.0 * A[axis] / (Nx[axis] - 1); }

bool GridSpec::operator==(const GridSpec& o) const {
  if (n != o.n || T != o.T || Nt != o.Nt || gamma != o.gamma) return false;
  for (int a = 0; a < n; ++a)
    if (A[a] != o.A[a] || Nx[a] != o.Nx[a]) return false;
  return true;
}

std::string DomainTag::str() const {
  switch (kind) {
    case DomainKind::Spacetime: return "spacetime";
    case DomainKind::Space: return "space";
    case DomainKind::LateralFace: return "lateral_face:" + std::to_string(axis) + (sign > 0 ? ":+" : ":-");
    case DomainKind::TimeSlice: return "time_slice:" + std::to_string(slice);
    case DomainKind::Pair: return "pair";
  }
  return "?";
}

DomainTag DomainTag::parse(const std::string& s) {
  if (s == "spacetime") return spacetime();
  if (s == "space") return space();
  if (s == "pair") return pair();
  if (s.rfind("time_slice:", 0) == 0) return time_slice(std::stoi(s.substr(11)));
  if (s.rfind("lateral_face:", 0) == 0 && s.size() == 16) {
    int ax = s[13] - '0';
    char sg = s[15];
    if ((ax == 1 || ax == 2) && (sg == '+' || sg == '-')) return face(ax, sg == '+' ? 1 : -1);
  }
  throw GridError("unknown domain tag '" + s + "'");
}

bool DomainTag::operator==(const DomainTag& o) const {
  return kind == o.kind && axis == o.axis && sign == o.sign && slice == o.slice;
}

std::size_t Field::expected_count(const GridSpec& g, const DomainTag& t) {
  switch (t.kind) {
    case DomainKind::Spacetime: return std::size_t(g.Nt) * g.nspace();
    case DomainKind::Space:
    case DomainKind::TimeSlice: return g.nspace();
    case DomainKind::LateralFace:
      if (t.axis < 1 || t.axis > g.n) throw GridError("face axis out of range");
      return std::size_t(g.Nt) * g.nodes(t.axis == 1 ? 1 : 0);
    case DomainKind::Pair: return std::size_t(g.nspace()) * g.nspace();
  }
  return 0;
}

Field::Field(const GridSpec& g, const DomainTag& t) : spec(g), tag(t), values(expected_count(g, t), 0.0) {}
Field::Field(const GridSpec& g, const DomainTag& t, double fill) : spec(g), tag(t), values(expected_count(g, t), fill) {}

void require_tag(const Field& f, DomainKind kind, const char* op) {
  if (f.tag.kind != kind) throw DomainMismatch(std::string(op) + ": unexpected domain tag " + f.tag.str());
}

void require_same_layout(const Field& a, const Field& b, const char* op) {
  if (!(a.tag == b.tag) || a.size() != b.size() || !(a.spec == b.spec))
    throw DomainMismatch(std::string(op) + ": fields live on different domains (" + a.tag.str() + " vs " +
                         b.tag.str() + ")");
}

Field& Field::operator+=(const Field& o) {
  require_same_layout(*this, o, "add");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  return *this;
}
Field& Field::operator-=(const Field& o) {
  require_same_layout(*this, o, "subtract");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  return *this;
}
Field& Field::operator*=(double c) {
  for (double& v : values) v *= c;
  return *this;
}
double Field::max_abs() const {
  double m = 0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double c, Field a) { return a *= c; }
Field hadamard(const Field& a, const Field& b) {
  require_same_layout(a, b, "multiply");
  Field r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] *= b.values[i];
  return r;
}

namespace {

// Lines through a field: count of lines, length, stride, and start offsets.
struct Lines {
  int len = 0;
  std::size_t stride = 0;
  std::vector<std::size_t> starts;
};

Lines spatial_lines(const Field& f, int axis) {
  const GridSpec& g = f.spec;
  if (axis < 0 || axis >= g.n) throw GridError("axis out of range");
  int levels = 1;
  if (f.tag.kind == DomainKind::Spacetime) levels = g.Nt;
  else if (!f.tag.is_spatial()) throw DomainMismatch("spatial derivative of a " + f.tag.str() + " field");
  Lines L;
  int N1 = g.nodes(0), N2 = g.nodes(1);
  L.len = axis == 0 ? N1 : N2;
  L.stride = axis == 0 ? std::size_t(N2) : 1;
  for (int k = 0; k < levels; ++k) {
    std::size_t base = std::size_t(k) * g.nspace();
    if (axis == 0)
      for (int j = 0; j < N2; ++j) L.starts.push_back(base + j);
    else
      for (int i = 0; i < N1; ++i) L.starts.push_back(base + std::size_t(i) * N2);
  }
  return L;
}

void d1_line(const double* f, double* out, int len, std::size_t st, double h) {
  for (int i = 1; i + 1 < len; ++i) out[i * st] = (f[(i + 1) * st] - f[(i - 1) * st]) / (2 * h);
  out[0] = (-3 * f[0] + 4 * f[st] - f[2 * st]) / (2 * h);
  int e = len - 1;
  out[e * st] = (3 * f[e * st] - 4 * f[(e - 1) * st] + f[(e - 2) * st]) / (2 * h);
}

void d2_line(const double* f, double* out, int len, std::size_t st, double h) {
  double h2 = h * h;
  for (int i = 1; i + 1 < len; ++i) out[i * st] = (f[(i - 1) * st] - 2 * f[i * st] + f[(i + 1) * st]) / h2;
  int e = len - 1;
  if (len >= 4) {
    out[0] = (2 * f[0] - 5 * f[st] + 4 * f[2 * st] - f[3 * st]) / h2;
    out[e * st] = (2 * f[e * st] - 5 * f[(e - 1) * st] + 4 * f[(e - 2) * st] - f[(e - 3) * st]) / h2;
  } else {
    out[0] = out[st];
    out[e * st] = out[st];
  }
}

Field apply_lines(const Field& f, const Lines& L, double h, bool second) {
  Field r(f.spec, f.tag);
  for (std::size_t s : L.starts) {
    if (second)
      d2_line(f.values.data() + s, r.values.data() + s, L.len, L.stride, h);
    else
      d1_line(f.values.data() + s, r.values.data() + s, L.len, L.stride, h);
  }
  return r;
}

std::vector<double> trap_weights(int len, double h) {
  std::vector<double> w(len, h);
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

}  // namespace

Field partial(const Field& f, int axis) { return apply_lines(f, spatial_lines(f, axis), f.spec.h(axis), false); }

Field second_partial(const Field& f, int axis) {
  return apply_lines(f, spatial_lines(f, axis), f.spec.h(axis), true);
}

std::vector<Field> gradient(const Field& f) {
  std::vector<Field> g;
  for (int a = 0; a < f.spec.n; ++a) g.push_back(partial(f, a));
  return g;
}

Field laplacian(const Field& f) {
  Field r = second_partial(f, 0);
  for (int a = 1; a < f.spec.n; ++a) r += second_partial(f, a);
  return r;
}

Field dt(const Field& f) {
  require_tag(f, DomainKind::Spacetime, "dt");
  Lines L;
  L.len = f.spec.Nt;
  L.stride = f.spec.nspace();
  for (int s = 0; s < f.spec.nspace(); ++s) L.starts.push_back(s);
  return apply_lines(f, L, f.spec.tau(), false);
}

Field divergence(const std::vector<Field>& comps) {
  if (comps.empty()) throw GridError("divergence of an empty vector field");
  if (int(comps.size()) != comps[0].spec.n) throw GridError("divergence: need one component per axis");
  Field r = partial(comps[0], 0);
  for (std::size_t a = 1; a < comps.size(); ++a) {
    require_same_layout(comps[0], comps[a], "divergence");
    r += partial(comps[a], int(a));
  }
  return r;
}

double integrate(const Field& f) {
  const GridSpec& g = f.spec;
  auto wt = trap_weights(g.Nt, g.tau());
  auto w1 = trap_weights(g.nodes(0), g.n >= 1 ? g.h(0) : 1.0);
  std::vector<double> w2 = g.n > 1 ? trap_weights(g.nodes(1), g.h(1)) : std::vector<double>{1.0};
  double s = 0;
  switch (f.tag.kind) {
    case DomainKind::Spacetime:
      for (int k = 0; k < g.Nt; ++k)
        for (int i = 0; i < g.nodes(0); ++i)
          for (int j = 0; j < g.nodes(1); ++j) s += wt[k] * w1[i] * w2[j] * f.at(k, i, j);
      return s;
    case DomainKind::Space:
    case DomainKind::TimeSlice:
      for (int i = 0; i < g.nodes(0); ++i)
        for (int j = 0; j < g.nodes(1); ++j) s += w1[i] * w2[j] * f.sp(i, j);
      return s;
    case DomainKind::LateralFace: {
      const std::vector<double>& wf = f.tag.axis == 1 ? w2 : w1;
      int m = int(wf.size());
      for (int k = 0; k < g.Nt; ++k)
        for (int j = 0; j < m; ++j) s += wt[k] * wf[j] * f.values[std::size_t(k) * m + j];
      return s;
    }
    case DomainKind::Pair: break;
  }
  throw DomainMismatch("integrate: kernel tables are not integrable fields");
}

double norm_L2(const Field& f) {
  Field sq = hadamard(f, f);
  return std::sqrt(std::max(0.0, integrate(sq)));
}

Field time_slice(const Field& f, int k) {
  require_tag(f, DomainKind::Spacetime, "time_slice");
  if (k < 0 || k >= f.spec.Nt) throw GridError("time slice out of range");
  Field r(f.spec, DomainTag::time_slice(k));
  std::copy_n(f.values.begin() + std::size_t(k) * f.spec.nspace(), f.spec.nspace(), r.values.begin());
  return r;
}

Field embed_slice(const Field& slice, int k, Field into) {
  require_tag(into, DomainKind::Spacetime, "embed_slice");
  if (!slice.tag.is_spatial()) throw DomainMismatch("embed_slice: need a spatial field");
  std::copy(slice.values.begin(), slice.values.end(), into.values.begin() + std::size_t(k) * into.spec.nspace());
  return into;
}

std::vector<std::pair<int, int>> lateral_faces(const GridSpec& g) {
  std::vector<std::pair<int, int>> f;
  for (int a = 1; a <= g.n; ++a) {
    f.push_back({a, -1});
    f.push_back({a, +1});
  }
  return f;
}

Field face_trace(const Field& f, int axis1, int sign) {
  require_tag(f, DomainKind::Spacetime, "face_trace");
  const GridSpec& g = f.spec;
  Field r(g, DomainTag::face(axis1, sign));
  int N1 = g.nodes(0), N2 = g.nodes(1);
  for (int k = 0; k < g.Nt; ++k) {
    if (axis1 == 1) {
      int i = sign > 0 ? N1 - 1 : 0;
      for (int j = 0; j < N2; ++j) r.values[std::size_t(k) * N2 + j] = f.at(k, i, j);
    } else {
      int j = sign > 0 ? N2 - 1 : 0;
      for (int i = 0; i < N1; ++i) r.values[std::size_t(k) * N1 + i] = f.at(k, i, j);
    }
  }
  return r;
}

Field normal_derivative_trace(const Field& f, int axis1, int sign) {
  Field d = partial(f, axis1 - 1);
  Field r = face_trace(d, axis1, sign);
  if (sign < 0) r *= -1.0;
  return r;
}

Field face_dt(const Field& f) {
  require_tag(f, DomainKind::LateralFace, "face_dt");
  const GridSpec& g = f.spec;
  int m = int(f.size() / g.Nt);
  Field r(g, f.tag);
  for (int j = 0; j < m; ++j) d1_line(f.values.data() + j, r.values.data() + j, g.Nt, m, g.tau());
  return r;
}

Field face_tangential(const Field& f, int order) {
  require_tag(f, DomainKind::LateralFace, "face_tangential");
  const GridSpec& g = f.spec;
  if (g.n < 2) throw GridError("a face of a 1-D box has no tangential direction");
  int tang = f.tag.axis == 1 ? 1 : 0;
  int m = g.nodes(tang);
  Field r(g, f.tag);
  for (int k = 0; k < g.Nt; ++k) {
    const double* src = f.values.data() + std::size_t(k) * m;
    double* dst = r.values.data() + std::size_t(k) * m;
    if (order == 2)
      d2_line(src, dst, m, 1, g.h(tang));
    else
      d1_line(src, dst, m, 1, g.h(tang));
  }
  return r;
}

double norm_H21_lateral(const Field& trace, const Field* normal_trace) {
  require_tag(trace, DomainKind::LateralFace, "norm_H21_lateral");
  auto sq = [](const Field& x) { return integrate(hadamard(x, x)); };
  double s = sq(trace) + sq(face_dt(trace));
  if (trace.spec.n > 1) {
    s += sq(face_tangential(trace, 1)) + sq(face_tangential(trace, 2));
    if (normal_trace) {
      require_same_layout(trace, *normal_trace, "norm_H21_lateral");
      s += 2 * sq(face_tangential(*normal_trace, 1));
    }
  }
  return std::sqrt(s);
}

double norm_H10_lateral(const Field& trace) {
  require_tag(trace, DomainKind::LateralFace, "norm_H10_lateral");
  auto sq = [](const Field& x) { return integrate(hadamard(x, x)); };
  double s = sq(trace);
  if (trace.spec.n > 1) s += sq(face_tangential(trace, 1));
  return std::sqrt(s);
}

namespace {
Field derivative_power(Field f, int axis, int order) {
  while (order >= 2) {
    f = second_partial(f, axis);
    order -= 2;
  }
  if (order == 1) f = partial(f, axis);
  return f;
}
}  // namespace

double norm_Hk_space(const Field& f, int k) {
  if (!f.tag.is_spatial()) throw DomainMismatch("norm_Hk_space: need a spatial field, got " + f.tag.str());
  if (k < 0 || k > 4) throw GridError("norm_Hk_space: order must be in 0..4");
  double s = 0;
  for (int a1 = 0; a1 <= k; ++a1) {
    int a2max = f.spec.n > 1 ? k - a1 : 0;
    for (int a2 = 0; a2 <= a2max; ++a2) {
      Field d = derivative_power(f, 0, a1);
      if (a2 > 0) d = derivative_power(d, 1, a2);
      s += integrate(hadamard(d, d));
    }
  }
  return std::sqrt(s);
}

namespace {

std::string join(const double* v, int m) {
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < m; ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

}  // namespace

void write_field(const Field& f, const std::string& path) {
  const GridSpec& g = f.spec;
  std::ostringstream hdr;
  hdr.precision(17);
  double Nxd[2] = {double(g.Nx[0]), double(g.Nx[1])};
  hdr << "version=1 n=" << g.n << " A=" << join(g.A.data(), g.n) << " T=" << g.T << " Nx=" << join(Nxd, g.n)
      << " Nt=" << g.Nt << " gamma=" << g.gamma << " domain_tag=" << f.tag.str() << " dtype=f64le count=" << f.size()
      << "\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GridError("cannot open " + path + " for writing");
  std::string h = hdr.str();
  out.write(h.data(), std::streamsize(h.size()));
  std::vector<unsigned char> buf(f.size() * 8);
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(f.values[i]);
    for (int b = 0; b < 8; ++b) buf[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw GridError("write failed for " + path);
}

Field read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GridError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw GridError(path + ": missing header");
  std::map<std::string, std::string> kv;
  std::istringstream ls(line);
  std::string tok;
  while (ls >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw GridError(path + ": malformed header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"version", "n", "A", "T", "Nx", "Nt", "domain_tag", "dtype", "count"})
    if (!kv.count(key)) throw GridError(path + ": header lacks '" + key + "'");
  if (kv["version"] != "1") throw GridError(path + ": unsupported version " + kv["version"]);
  if (kv["dtype"] != "f64le") throw GridError(path + ": unsupported dtype " + kv["dtype"]);
  GridSpec g;
  g.n = std::stoi(kv["n"]);
  auto A = split_numbers(kv["A"]);
  auto Nx = split_numbers(kv["Nx"]);
  if (int(A.size()) != g.n || int(Nx.size()) != g.n) throw GridError(path + ": A/Nx arity does not match n");
  for (int a = 0; a < g.n; ++a) {
    g.A[a] = A[a];
    g.Nx[a] = int(Nx[a]);
  }
  g.T = std::stod(kv["T"]);
  g.Nt = std::stoi(kv["Nt"]);
  if (kv.count("gamma")) g.gamma = std::stod(kv["gamma"]);
  else g.gamma = g.A[0];
  g.validate();
  Field f(g, DomainTag::parse(kv["domain_tag"]));
  std::size_t count = std::stoull(kv["count"]);
  if (count != f.size())
    throw GridError(path + ": count " + std::to_string(count) + " does not match the grid (" +
                    std::to_string(f.size()) + ")");
  std::vector<unsigned char> buf(count * 8);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (std::size_t(in.gcount()) != buf.size()) throw GridError(path + ": payload shorter than count");
  if (in.peek() != std::char_traits<char>::eof()) throw GridError(path + ": trailing bytes after payload");
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t(buf[i * 8 + b]) << (8 * b);
    f.values[i] = std::bit_cast<double>(bits);
  }
  return f;
}

}  // namespace mfgcip
