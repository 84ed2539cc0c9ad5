#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hajlasz/grid.hpp"
#include "hajlasz/prefix.hpp"
#include "hajlasz/verification.hpp"

namespace hajlasz {

enum class WeightFamily { constant, power, shifted_power, exp_decay, grid };

// A weight w > 0. Parameters:
//   constant       [c]              w = c
//   power          [beta]           w = |x|^beta
//   shifted-power  [beta, x0..]     w = |x - x0|^beta
//   exp-decay      [lambda]         w = exp(-lambda |x|)
//   grid           []               samples taken from `field`
struct WeightSpec {
  WeightFamily family = WeightFamily::constant;
  std::vector<double> params{1.0};
  std::shared_ptr<const GridFunction> field;

  static WeightSpec constant(double c) { return {WeightFamily::constant, {c}, nullptr}; }
  static WeightSpec power(double beta) { return {WeightFamily::power, {beta}, nullptr}; }
  static WeightSpec exp_decay(double lambda) { return {WeightFamily::exp_decay, {lambda}, nullptr}; }
  static WeightSpec shifted_power(double beta, const Point& x0, int dim) {
    WeightSpec w{WeightFamily::shifted_power, {beta}, nullptr};
    for (int i = 0; i < dim; ++i) w.params.push_back(x0[i]);
    return w;
  }
  static WeightSpec grid(GridFunction g) {
    return {WeightFamily::grid, {}, std::make_shared<const GridFunction>(std::move(g))};
  }
};

struct WeightFamilyInfo {
  WeightFamily family;
  std::string_view name;
  std::string_view formula;
  std::string_view params;
};

inline std::span<const WeightFamilyInfo> weight_catalog() {
  static const WeightFamilyInfo entries[] = {
      {WeightFamily::constant, "constant", "c", "[c]"},
      {WeightFamily::exp_decay, "exp-decay", "exp(-lambda*|x|)", "[lambda]"},
      {WeightFamily::grid, "grid", "arbitrary positive grid function", "[] + field"},
      {WeightFamily::power, "power", "|x|^β", "[β]"},
      {WeightFamily::shifted_power, "shifted-power", "|x - x0|^β", "[β, x0_1..x0_dim]"},
  };
  return entries;
}

inline std::optional<WeightFamily> weight_family_from_name(std::string_view name) {
  for (const auto& e : weight_catalog()) {
    if (e.name == name) return e.family;
  }
  return std::nullopt;
}

inline std::string_view weight_family_name(WeightFamily f) {
  for (const auto& e : weight_catalog()) {
    if (e.family == f) return e.name;
  }
  return "unknown";
}

/// Product of powers of weights, prod_i w_i^{e_i}.
struct WeightProduct {
  std::vector<std::pair<WeightSpec, double>> factors;

  WeightProduct() = default;
  WeightProduct(const WeightSpec& w) : factors{{w, 1.0}} {}  // NOLINT(google-explicit-constructor)

  static WeightProduct power_of(const WeightSpec& w, double e) {
    WeightProduct p;
    p.factors.push_back({w, e});
    return p;
  }

  WeightProduct times(const WeightSpec& w, double e) const {
    WeightProduct p = *this;
    p.factors.push_back({w, e});
    return p;
  }
};

namespace detail {

inline void validate_weight(const WeightSpec& w, int dim) {
  const auto& p = w.params;
  auto need = [&](std::size_t n) {
    if (p.size() != n) {
      throw precondition_error(std::string(weight_family_name(w.family)) + " weight expects " + std::to_string(n) +
                               " parameters, got " + std::to_string(p.size()));
    }
  };
  switch (w.family) {
    case WeightFamily::constant:
      need(1);
      if (!(p[0] > 0.0)) throw precondition_error("constant weight must be positive");
      break;
    case WeightFamily::power: need(1); break;
    case WeightFamily::shifted_power: need(1 + static_cast<std::size_t>(dim)); break;
    case WeightFamily::exp_decay: need(1); break;
    case WeightFamily::grid:
      need(0);
      if (!w.field) throw precondition_error("grid weight needs a field");
      for (double v : w.field->values()) {
        if (!(v > 0.0)) throw precondition_error("grid weight must be positive");
      }
      break;
  }
}

// Mean of |x|^g over [a, b] in 1D; +inf when the cell touches 0 and g <= -1.
inline double power_cell_average_1d(double a, double b, double g) {
  auto prim = [g](double x) {
    const double s = x < 0.0 ? -1.0 : 1.0;
    return s * std::pow(std::abs(x), g + 1.0) / (g + 1.0);
  };
  if (a <= 0.0 && b >= 0.0 && g <= -1.0 + 1e-12) return kInf;
  return (prim(b) - prim(a)) / (b - a);
}

}  // namespace detail

/// Samples (prod_i w_i^{e_i})^s at cell centers. Power factors sharing a singular point are merged;
/// cells touching the singularity get the closed-form cell average in 1D and, in higher
/// dimensions, the value at a point offset by h/4 when the center coincides with the singularity.
inline GridFunction sample_weight(const WeightProduct& w, const BoxDomain& d, double s = 1.0) {
  const int n = d.dim();
  double scale = 1.0;
  double power_exponent = 0.0;
  std::optional<Point> singular;
  std::vector<std::pair<const WeightSpec*, double>> pointwise;
  for (const auto& [spec, e] : w.factors) {
    detail::validate_weight(spec, n);
    switch (spec.family) {
      case WeightFamily::constant:
        scale *= std::pow(spec.params[0], e);
        break;
      case WeightFamily::power:
      case WeightFamily::shifted_power: {
        Point x0{};
        if (spec.family == WeightFamily::shifted_power) {
          for (int i = 0; i < n; ++i) x0[i] = spec.params[1 + i];
        }
        if (singular && *singular != x0) {
          pointwise.push_back({&spec, e});
        } else {
          singular = x0;
          power_exponent += spec.params[0] * e;
        }
        break;
      }
      case WeightFamily::exp_decay:
      case WeightFamily::grid:
        pointwise.push_back({&spec, e});
        break;
    }
    if (spec.family == WeightFamily::grid && !(spec.field->domain() == d)) {
      throw domain_mismatch("grid weight lives on a different domain");
    }
  }
  const double gamma = power_exponent * s;
  const double cscale = std::pow(scale, s);
  std::vector<double> v(d.size());
  bool extended = false;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Index idx = d.multi_index(i);
    const Point c = d.center(idx);
    double val = cscale;
    if (singular && gamma != 0.0) {
      const Point& x0 = *singular;
      bool touches = true;
      bool at_center = true;
      for (int a = 0; a < n; ++a) {
        const double lo = d.lower(a) + static_cast<double>(idx[a]) * d.spacing(a);
        touches = touches && x0[a] >= lo && x0[a] <= lo + d.spacing(a);
        at_center = at_center && std::abs(c[a] - x0[a]) <= 1e-12 * d.spacing(a);
      }
      if (n == 1 && touches) {
        const double lo = d.lower(0) + static_cast<double>(idx[0]) * d.spacing(0);
        val *= detail::power_cell_average_1d(lo - x0[0], lo + d.spacing(0) - x0[0], gamma);
      } else if (at_center) {
        Point p = c;
        for (int a = 0; a < n; ++a) p[a] += 0.25 * d.spacing(a);
        val *= std::pow(distance(p, x0, n), gamma);
      } else {
        val *= std::pow(distance(c, x0, n), gamma);
      }
    }
    for (const auto& [spec, e] : pointwise) {
      double base = 0.0;
      switch (spec->family) {
        case WeightFamily::exp_decay: base = std::exp(-spec->params[0] * norm(c, n)); break;
        case WeightFamily::grid: base = (*spec->field)[i]; break;
        case WeightFamily::power:
        case WeightFamily::shifted_power: {
          Point x0{};
          if (spec->family == WeightFamily::shifted_power) {
            for (int a = 0; a < n; ++a) x0[a] = spec->params[1 + a];
          }
          const double r = distance(c, x0, n);
          base = std::pow(r > 0.0 ? r : 0.25 * d.min_spacing(), spec->params[0]);
          break;
        }
        case WeightFamily::constant: base = spec->params[0]; break;
      }
      val *= std::pow(base, e * s);
    }
    if (std::isinf(val)) extended = true;
    if (std::isnan(val) || val < 0.0) throw precondition_error("weight sample is not a positive number");
    v[i] = val;
  }
  return GridFunction(d, std::move(v), FieldKind::weight, extended);
}

inline GridFunction sample_weight(const WeightSpec& w, const BoxDomain& d, double s = 1.0) {
  return sample_weight(WeightProduct(w), d, s);
}

// Search family of cell-aligned cubes: centers on a coarse lattice of cell vertices anchored at
// the domain midpoint, half-widths growing geometrically. Only cubes inside the domain count.
struct CubeFamily {
  std::size_t center_stride = 0;  ///< vertex spacing between centers; 0 picks about 64 per axis
  std::size_t min_half_width = 1;  ///< in cells along the finest axis
  double half_width_ratio = 2.0;
};

struct CubeDescriptor {
  Point center{};
  double half_width = 0.0;
};

struct MuckenhouptEstimate {
  double q = 2.0;
  double value = 1.0;  ///< +inf when divergent
  bool divergent = false;
  CubeDescriptor argmax;
  std::size_t center_stride = 0;
  std::vector<double> half_widths;    ///< physical half-widths searched
  std::vector<double> scale_maxima;  ///< max over cubes with half-width >= half_widths[j]
  std::size_t cubes = 0;
};

namespace detail {

struct CubeLattice {
  std::array<std::vector<std::size_t>, 3> centers;  // vertex indices per axis
  std::vector<std::array<std::size_t, 3>> half;     // half-widths in cells per axis
  std::vector<double> physical;
  std::size_t stride = 1;
};

inline CubeLattice make_lattice(const BoxDomain& d, const CubeFamily& fam) {
  const int n = d.dim();
  CubeLattice lat;
  std::size_t stride = fam.center_stride;
  if (stride == 0) {
    std::size_t maxres = 0;
    for (int a = 0; a < n; ++a) maxres = std::max(maxres, d.resolution(a));
    stride = std::max<std::size_t>(1, maxres / 64);
  }
  lat.stride = stride;
  for (int a = 0; a < n; ++a) {
    const std::size_t res = d.resolution(a);
    const std::size_t mid = res / 2;
    std::vector<std::size_t> cs;
    for (std::size_t c = mid % stride; c <= res; c += stride) cs.push_back(c);
    lat.centers[a] = cs;
  }
  if (fam.min_half_width == 0 || !(fam.half_width_ratio > 1.0)) {
    throw precondition_error("cube family needs min_half_width >= 1 and ratio > 1");
  }
  const double h = d.min_spacing();
  double k = static_cast<double>(fam.min_half_width);
  std::size_t last = 0;
  while (true) {
    const auto cells = static_cast<std::size_t>(std::llround(k));
    if (cells != last) {
      std::array<std::size_t, 3> hw{0, 0, 0};
      bool fits = false;
      for (int a = 0; a < n; ++a) {
        hw[a] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(cells) * h / d.spacing(a))));
        fits = fits || 2 * hw[a] <= d.resolution(a);
      }
      bool all_fit = true;
      for (int a = 0; a < n; ++a) all_fit = all_fit && 2 * hw[a] <= d.resolution(a);
      if (!all_fit) break;
      lat.half.push_back(hw);
      lat.physical.push_back(static_cast<double>(cells) * h);
      last = cells;
    }
    k *= fam.half_width_ratio;
  }
  return lat;
}

// A_q expression (avg w)(avg w^{-1/(q-1)})^{q-1} on one cube from precomputed sums.
inline double aq_expression(double sum_w, double sum_dual, double cells, double q) {
  if (std::isinf(sum_w) || std::isinf(sum_dual)) return kInf;
  return (sum_w / cells) * std::pow(sum_dual / cells, q - 1.0);
}

}  // namespace detail

/// Estimated Muckenhoupt constant [w]_{A_q}: the maximum of the A_q expression over the family.
inline MuckenhouptEstimate aq_constant(const WeightProduct& w, double q, const BoxDomain& d,
                                       const CubeFamily& fam = {}) {
  if (!(q > 1.0)) throw precondition_error("A_q needs q > 1");
  const int n = d.dim();
  const GridFunction wv = sample_weight(w, d, 1.0);
  const GridFunction dual = sample_weight(w, d, -1.0 / (q - 1.0));
  const SummedVolumeTable tw(d, wv.values());
  const SummedVolumeTable td(d, dual.values());
  const auto lat = detail::make_lattice(d, fam);

  MuckenhouptEstimate est;
  est.q = q;
  est.center_stride = lat.stride;
  est.half_widths = lat.physical;
  est.scale_maxima.assign(lat.half.size(), 0.0);
  est.value = 0.0;
  std::vector<double> level_max(lat.half.size(), 0.0);

  for (std::size_t j = 0; j < lat.half.size(); ++j) {
    const auto& hw = lat.half[j];
    double cells = 1.0;
    for (int a = 0; a < n; ++a) cells *= static_cast<double>(2 * hw[a]);
    std::array<std::size_t, 3> pos{0, 0, 0};
    while (true) {
      std::array<std::size_t, 3> lo{}, hi{};
      bool interior = true;
      for (int a = 0; a < n; ++a) {
        const std::size_t c = lat.centers[a][pos[a]];
        if (c < hw[a] || c + hw[a] > d.resolution(a)) {
          interior = false;
          break;
        }
        lo[a] = c - hw[a];
        hi[a] = c + hw[a];
      }
      if (interior) {
        const double val = detail::aq_expression(tw.box_sum(lo, hi), td.box_sum(lo, hi), cells, q);
        ++est.cubes;
        if (val > level_max[j]) level_max[j] = val;
        if (val > est.value) {
          est.value = val;
          for (int a = 0; a < n; ++a) {
            est.argmax.center[a] = d.lower(a) + static_cast<double>(lat.centers[a][pos[a]]) * d.spacing(a);
          }
          est.argmax.half_width = lat.physical[j];
        }
      }
      int a = n - 1;
      while (a >= 0) {
        if (++pos[a] < lat.centers[a].size()) break;
        pos[a] = 0;
        --a;
      }
      if (a < 0) break;
    }
  }
  if (est.cubes == 0) throw precondition_error("no interior cube in the search family");

  // Nested families: all cubes with half-width >= half_widths[j].
  double running = 0.0;
  for (std::size_t j = lat.half.size(); j-- > 0;) {
    running = std::max(running, level_max[j]);
    est.scale_maxima[j] = running;
  }
  if (!std::isfinite(est.value)) {
    est.divergent = true;
  } else if (est.scale_maxima.size() >= 3) {
    const double e0 = est.scale_maxima[0], e1 = est.scale_maxima[1], e2 = est.scale_maxima[2];
    est.divergent = e0 >= 2.0 * e1 && e1 >= 2.0 * e2;
  }
  if (est.divergent) est.value = kInf;
  return est;
}

/// Checks items (i)-(iii) of the A_q structure results on one shared cube family.
inline VerificationReport aq_properties_check(const WeightSpec& w, double q, double p, double alpha,
                                              const BoxDomain& d, const CubeFamily& fam = {},
                                              double tol = 1e-9) {
  if (!(p > q)) throw precondition_error("properties check needs p > q");
  if (alpha < 0.0 || alpha > 1.0) throw precondition_error("alpha must lie in [0, 1]");
  const auto wq = aq_constant(w, q, d, fam);
  const auto wp = aq_constant(w, p, d, fam);
  const auto wa = aq_constant(WeightProduct::power_of(w, alpha), q, d, fam);
  if (wq.divergent || wp.divergent || wa.divergent) throw precondition_error("divergent A_q estimate");
  VerificationReport r;
  r.check = "aq-properties";
  r.constants = {{"A_q", wq.value}, {"A_p", wp.value}, {"A_q(w^alpha)", wa.value},
                 {"q", q},          {"p", p},          {"alpha", alpha}};
  if (!(wp.value <= wq.value + tol)) r.fail("(i) [w]_{A_p} exceeds [w]_{A_q}");
  if (!(wq.value >= 1.0 - tol)) r.fail("(ii) [w]_{A_q} below 1");
  if (!(wa.value <= std::pow(wq.value, alpha) + tol)) r.fail("(iii) [w^alpha]_{A_q} exceeds [w]_{A_q}^alpha");
  r.record_ratio(wp.value / wq.value);
  r.record_ratio(wa.value / std::pow(wq.value, alpha));
  return r;
}

struct ExponentSearchResult {
  double exponent = 0.0;
  MuckenhouptEstimate estimate;
};

/// Largest sigma on the grid with a finite, non-divergent estimate of [w]_{A_{q - sigma}}.
inline std::optional<ExponentSearchResult> find_self_improvement(const WeightSpec& w, double q, const BoxDomain& d,
                                                                 std::vector<double> sigma_grid,
                                                                 const CubeFamily& fam = {}) {
  if (aq_constant(w, q, d, fam).divergent) throw precondition_error("divergent base constant [w]_{A_q}");
  std::sort(sigma_grid.begin(), sigma_grid.end());
  for (auto it = sigma_grid.rbegin(); it != sigma_grid.rend(); ++it) {
    const double sigma = *it;
    if (!(sigma > 0.0 && sigma < q - 1.0)) continue;
    auto est = aq_constant(w, q - sigma, d, fam);
    if (!est.divergent) return ExponentSearchResult{sigma, est};
  }
  return std::nullopt;
}

/// Largest alpha > 1 on the grid with a finite, non-divergent estimate of [w^alpha]_{A_q}.
inline std::optional<ExponentSearchResult> find_power_improvement(const WeightSpec& w, double q, const BoxDomain& d,
                                                                  std::vector<double> alpha_grid,
                                                                  const CubeFamily& fam = {}) {
  if (aq_constant(w, q, d, fam).divergent) throw precondition_error("divergent base constant [w]_{A_q}");
  std::sort(alpha_grid.begin(), alpha_grid.end());
  for (auto it = alpha_grid.rbegin(); it != alpha_grid.rend(); ++it) {
    if (!(*it > 1.0)) continue;
    auto est = aq_constant(WeightProduct::power_of(w, *it), q, d, fam);
    if (!est.divergent) return ExponentSearchResult{*it, est};
  }
  return std::nullopt;
}

struct GrandizerExponent {
  double epsilon = 0.0;
  double delta_used = 0.0;  ///< delta after clamping below q - 1
  MuckenhouptEstimate estimate;
};

/// Clamp applied to delta when delta >= q - 1, so that q - epsilon stays above 1.
inline double clamp_grandizer_delta(double q, double delta) {
  return delta < q - 1.0 ? delta : 0.95 * (q - 1.0);
}

/// Searches epsilon in (0, delta) for the smallest estimated [w a^epsilon]_{A_{q - epsilon}}.
inline GrandizerExponent grandizer_exponent_search(const WeightSpec& w, const WeightSpec& a, double q, double delta,
                                                   const BoxDomain& d, std::size_t grid_points = 32,
                                                   const CubeFamily& fam = {}) {
  if (!(q > 1.0)) throw precondition_error("grandizer search needs q > 1");
  if (!(delta > 0.0)) throw precondition_error("grandizer search needs delta > 0");
  if (grid_points == 0) throw precondition_error("empty epsilon grid");
  const double d0 = clamp_grandizer_delta(q, delta);
  if (aq_constant(w, q, d, fam).divergent) throw precondition_error("w is not in A_q on the search family");
  if (aq_constant(WeightProduct::power_of(a, d0), q, d, fam).divergent) {
    throw precondition_error("a^delta is not in A_q on the search family");
  }
  std::optional<GrandizerExponent> best;
  for (std::size_t i = 1; i <= grid_points; ++i) {
    const double eps = d0 * static_cast<double>(i) / static_cast<double>(grid_points + 1);
    auto est = aq_constant(WeightProduct(w).times(a, eps), q - eps, d, fam);
    if (est.divergent) continue;
    if (!best || est.value < best->estimate.value) best = GrandizerExponent{eps, d0, est};
  }
  if (!best) throw precondition_error("no epsilon on the grid yields a finite estimate");
  return *best;
}

}  // namespace hajlasz
