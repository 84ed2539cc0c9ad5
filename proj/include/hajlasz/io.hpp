#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hajlasz/embeddings.hpp"
#include "hajlasz/grid.hpp"
#include "hajlasz/hajlasz.hpp"
#include "hajlasz/norms.hpp"
#include "hajlasz/verification.hpp"
#include "hajlasz/weights.hpp"

namespace hajlasz {

using json = nlohmann::ordered_json;

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON number, with non-finite values spelled "inf", "-inf" or "nan".
inline json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline json point_json(const Point& p, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(num(p[i]));
  return a;
}

inline std::string_view field_kind_name(FieldKind k) {
  switch (k) {
    case FieldKind::scalar:
      return "scalar";
    case FieldKind::gradient_component:
      return "gradient-component";
    case FieldKind::weight:
      return "weight";
  }
  return "scalar";
}

inline json domain_json(const BoxDomain& d) {
  json lo = json::array(), hi = json::array(), res = json::array();
  for (int a = 0; a < d.dim(); ++a) {
    lo.push_back(d.lower(a));
    hi.push_back(d.upper(a));
    res.push_back(d.resolution(a));
  }
  return json{{"dim", d.dim()}, {"lower", lo}, {"upper", hi}, {"resolution", res}};
}

inline json to_json(const GrandNormResult& r, bool with_profile = false) {
  json j{{"value", num(r.value)}, {"argmax_eps", num(r.argmax_eps)}, {"q", num(r.q)},
         {"profile_points", r.profile.size()}, {"endpoint_trend", r.endpoint_trend}};
  if (with_profile) {
    json p = json::array();
    for (const auto& e : r.profile) p.push_back(json::array({num(e.eps), num(e.value)}));
    j["profile"] = std::move(p);
  }
  return j;
}

inline json to_json(const VerificationReport& r) {
  json c = json::object();
  for (const auto& [k, v] : r.constants) c[k] = num(v);
  return json{{"check", r.check},           {"passed", r.passed},   {"worst_ratio", num(r.worst_ratio)},
              {"violations", r.violations}, {"constants", c},       {"excluded", r.excluded}};
}

inline json to_json(const MuckenhouptEstimate& e, int dim) {
  json hw = json::array(), sm = json::array();
  for (double v : e.half_widths) hw.push_back(num(v));
  for (double v : e.scale_maxima) sm.push_back(num(v));
  return json{{"q", num(e.q)},
              {"value", num(e.value)},
              {"divergent", e.divergent},
              {"argmax", {{"center", point_json(e.argmax.center, dim)}, {"half_width", num(e.argmax.half_width)}}},
              {"center_stride", e.center_stride},
              {"half_widths", hw},
              {"scale_maxima", sm},
              {"cubes", e.cubes}};
}

inline json to_json(const HajlaszReport& r, int dim) {
  json v = json::array();
  for (const auto& p : r.violations) v.push_back(json{{"x", p.x}, {"y", p.y}, {"ratio", num(p.ratio)}});
  return json{{"minimal_constant", num(r.minimal_constant)},
              {"n_pairs", r.n_pairs},
              {"n_admissible", r.n_admissible},
              {"worst_pair", json::array({point_json(r.worst_x, dim), point_json(r.worst_y, dim)})},
              {"threshold", num(r.threshold)},
              {"violation_count", r.violation_count},
              {"violations", v},
              {"neighbor_max", num(r.neighbor_max)},
              {"far_max", num(r.far_max)},
              {"blow_up", r.blow_up},
              {"seed", r.seed},
              {"count", r.count},
              {"strategy", r.strategy}};
}

inline json to_json(const EmbeddingReport& r) {
  json d = json::object();
  for (const auto& [k, v] : r.details) d[k] = num(v);
  return json{{"check", r.check},          {"lhs", num(r.lhs)},         {"rhs", num(r.rhs)}, {"ratio", num(r.ratio)},
              {"passed", r.passed},        {"tolerance", r.tolerance},  {"details", d}};
}

inline json to_json(const ProbeReport& r) {
  json ratios = json::array(), nums = json::array();
  for (double v : r.ratios) ratios.push_back(num(v));
  for (double v : r.numerators) nums.push_back(num(v));
  return json{{"max_ratio", num(r.max_ratio)}, {"argmax", r.argmax}, {"finite", r.finite},
              {"ratios", ratios},              {"numerators", nums}};
}

inline json to_json(const PoincareEstimate& e, int dim) {
  return json{{"constant", num(e.constant)}, {"mean", num(e.mean)}, {"argmax", point_json(e.argmax, dim)},
              {"samples", e.samples},        {"skipped", e.skipped}};
}

/// Shortest round-trip decimal representation, for CSV output.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline void write_profile_csv(std::ostream& out, const GrandNormResult& r) {
  out << "eps,value\n";
  for (const auto& p : r.profile) out << fmt(p.eps) << ',' << fmt(p.value) << '\n';
}

/// Cell centers and values; one row per cell (1D and 2D slices of plot data).
inline void write_field_csv(std::ostream& out, const GridFunction& f) {
  const BoxDomain& d = f.domain();
  static const char* names[] = {"x", "y", "z"};
  for (int a = 0; a < d.dim(); ++a) out << names[a] << ',';
  out << "value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point c = d.center(i);
    for (int a = 0; a < d.dim(); ++a) out << fmt(c[a]) << ',';
    out << fmt(f[i]) << '\n';
  }
}

/// x_1..x_n, y_1..y_n, admissible, ratio for every sampled pair.
inline void write_pairs_csv(std::ostream& out, const GridFunction& f, const GridFunction& g, const PairSample& s) {
  const BoxDomain& d = f.domain();
  const int n = d.dim();
  for (int a = 0; a < n; ++a) out << "x" << a + 1 << ',';
  for (int a = 0; a < n; ++a) out << "y" << a + 1 << ',';
  out << "admissible,ratio\n";
  for (std::size_t k = 0; k < s.pairs.size(); ++k) {
    const auto [i, j] = s.pairs[k];
    const Point x = d.center(i), y = d.center(j);
    for (int a = 0; a < n; ++a) out << fmt(x[a]) << ',';
    for (int a = 0; a < n; ++a) out << fmt(y[a]) << ',';
    out << int(s.admissible[k]) << ',' << fmt(hajlasz_ratio(f[i], f[j], g[i], g[j], distance(x, y, n))) << '\n';
  }
}

// Binary field layout, little-endian: int64 dim, int64 resolution[dim], double lower[dim],
// double upper[dim], double values[size] in row-major order (last axis fastest).
namespace detail {

template <class T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "binary fields assume a little-endian host");
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw io_error("truncated binary field");
  return v;
}

}  // namespace detail

inline void write_binary(const GridFunction& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path + " for writing");
  const BoxDomain& d = f.domain();
  detail::put<std::int64_t>(out, d.dim());
  for (int a = 0; a < d.dim(); ++a) detail::put<std::int64_t>(out, static_cast<std::int64_t>(d.resolution(a)));
  for (int a = 0; a < d.dim(); ++a) detail::put<double>(out, d.lower(a));
  for (int a = 0; a < d.dim(); ++a) detail::put<double>(out, d.upper(a));
  for (double v : f.values()) detail::put<double>(out, v);
  if (!out) throw io_error("write failed for " + path);
  std::ofstream side(path + ".json");
  json meta = domain_json(d);
  meta["kind"] = field_kind_name(f.kind());
  meta["format"] = "int64 dim, int64 resolution[dim], f64 lower[dim], f64 upper[dim], f64 values (little-endian)";
  side << meta.dump(2) << '\n';
}

inline GridFunction read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  const auto dim = detail::get<std::int64_t>(in);
  if (dim < 1 || dim > kMaxDim) throw io_error("bad dimension in " + path);
  std::vector<std::size_t> res(dim);
  std::vector<double> lo(dim), hi(dim);
  for (auto& r : res) {
    const auto v = detail::get<std::int64_t>(in);
    if (v <= 0) throw io_error("bad resolution in " + path);
    r = static_cast<std::size_t>(v);
  }
  for (auto& v : lo) v = detail::get<double>(in);
  for (auto& v : hi) v = detail::get<double>(in);
  BoxDomain d(lo, hi, res);
  std::vector<double> values(d.size());
  for (auto& v : values) v = detail::get<double>(in);
  bool extended = false;
  for (double v : values) extended = extended || std::isinf(v);
  return GridFunction(d, std::move(values), extended ? FieldKind::weight : FieldKind::scalar, extended);
}

}  // namespace hajlasz
