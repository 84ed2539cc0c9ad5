#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hajlasz/core.hpp"

namespace hajlasz {

inline constexpr std::size_t kDefaultCellBudget = std::size_t{1} << 24;

// Axis-aligned box discretized into cells; samples sit at cell centers.
// Flat indices are row-major with the last axis fastest.
class BoxDomain {
 public:
  BoxDomain() = default;

  BoxDomain(std::span<const double> lower, std::span<const double> upper,
            std::span<const std::size_t> resolution, std::size_t cell_budget = kDefaultCellBudget) {
    const std::size_t n = lower.size();
    if (n < 1 || n > static_cast<std::size_t>(kMaxDim)) {
      throw precondition_error("domain dimension must be 1, 2 or 3");
    }
    if (upper.size() != n || resolution.size() != n) {
      throw precondition_error("domain bounds and resolution must have the same length");
    }
    dim_ = static_cast<int>(n);
    std::size_t cells = 1;
    for (int i = 0; i < dim_; ++i) {
      if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
        throw precondition_error("domain requires lower < upper on axis " + std::to_string(i));
      }
      if (resolution[i] == 0) {
        throw precondition_error("domain resolution must be positive on axis " + std::to_string(i));
      }
      lower_[i] = lower[i];
      upper_[i] = upper[i];
      res_[i] = resolution[i];
      h_[i] = (upper[i] - lower[i]) / static_cast<double>(resolution[i]);
      if (cells > cell_budget / resolution[i]) {
        throw precondition_error("domain exceeds the cell budget of " + std::to_string(cell_budget));
      }
      cells *= resolution[i];
    }
    size_ = cells;
    std::size_t s = 1;
    for (int i = dim_ - 1; i >= 0; --i) {
      stride_[i] = s;
      s *= res_[i];
    }
  }

  BoxDomain(std::initializer_list<double> lower, std::initializer_list<double> upper,
            std::initializer_list<std::size_t> resolution)
      : BoxDomain(std::span<const double>(lower.begin(), lower.size()),
                  std::span<const double>(upper.begin(), upper.size()),
                  std::span<const std::size_t>(resolution.begin(), resolution.size())) {}

  static BoxDomain interval(double lo, double hi, std::size_t n) { return BoxDomain({lo}, {hi}, {n}); }

  static BoxDomain cube(int dim, double lo, double hi, std::size_t n) {
    std::vector<double> l(dim, lo), u(dim, hi);
    std::vector<std::size_t> r(dim, n);
    return BoxDomain(l, u, r);
  }

  int dim() const { return dim_; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  std::size_t resolution(int axis) const { return res_[axis]; }
  std::size_t stride(int axis) const { return stride_[axis]; }
  std::size_t size() const { return size_; }

  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < dim_; ++i) v *= h_[i];
    return v;
  }

  double measure() const { return cell_volume() * static_cast<double>(size_); }

  double min_spacing() const {
    double m = h_[0];
    for (int i = 1; i < dim_; ++i) m = std::min(m, h_[i]);
    return m;
  }

  double diameter() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += (upper_[i] - lower_[i]) * (upper_[i] - lower_[i]);
    return std::sqrt(s);
  }

  Index multi_index(std::size_t flat) const {
    Index idx{};
    for (int i = 0; i < dim_; ++i) {
      idx[i] = static_cast<std::ptrdiff_t>(flat / stride_[i]);
      flat %= stride_[i];
    }
    return idx;
  }

  std::size_t flat_index(const Index& idx) const {
    std::size_t f = 0;
    for (int i = 0; i < dim_; ++i) f += static_cast<std::size_t>(idx[i]) * stride_[i];
    return f;
  }

  bool in_range(const Index& idx) const {
    for (int i = 0; i < dim_; ++i) {
      if (idx[i] < 0 || idx[i] >= static_cast<std::ptrdiff_t>(res_[i])) return false;
    }
    return true;
  }

  double center_coordinate(int axis, std::ptrdiff_t i) const {
    return lower_[axis] + (static_cast<double>(i) + 0.5) * h_[axis];
  }

  Point center(const Index& idx) const {
    Point p{};
    for (int i = 0; i < dim_; ++i) p[i] = center_coordinate(i, idx[i]);
    return p;
  }

  Point center(std::size_t flat) const { return center(multi_index(flat)); }

  bool contains(const Point& p) const {
    for (int i = 0; i < dim_; ++i) {
      if (p[i] < lower_[i] || p[i] > upper_[i]) return false;
    }
    return true;
  }

  /// Index of the cell containing p; points on the upper face map to the last cell.
  Index cell_of(const Point& p) const {
    Index idx{};
    for (int i = 0; i < dim_; ++i) {
      auto k = static_cast<std::ptrdiff_t>(std::floor((p[i] - lower_[i]) / h_[i]));
      idx[i] = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(res_[i]) - 1);
    }
    return idx;
  }

  /// Distance from p to the boundary of the box (0 outside).
  double distance_to_boundary(const Point& p) const {
    double d = kInf;
    for (int i = 0; i < dim_; ++i) d = std::min({d, p[i] - lower_[i], upper_[i] - p[i]});
    return std::max(d, 0.0);
  }

  friend bool operator==(const BoxDomain& a, const BoxDomain& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i) {
      if (a.lower_[i] != b.lower_[i] || a.upper_[i] != b.upper_[i] || a.res_[i] != b.res_[i]) return false;
    }
    return true;
  }

 private:
  int dim_ = 1;
  std::array<double, 3> lower_{0.0, 0.0, 0.0};
  std::array<double, 3> upper_{1.0, 1.0, 1.0};
  std::array<double, 3> h_{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> res_{1, 1, 1};
  std::array<std::size_t, 3> stride_{1, 1, 1};
  std::size_t size_ = 1;
};

enum class FieldKind { scalar, gradient_component, weight };

// Immutable samples of a scalar field, one per cell center.
class GridFunction {
 public:
  GridFunction() = default;

  /// `extended` admits +inf samples (weights whose cell average diverges).
  GridFunction(BoxDomain domain, std::vector<double> values, FieldKind kind = FieldKind::scalar,
               bool extended = false)
      : domain_(std::move(domain)), values_(std::move(values)), kind_(kind), extended_(extended) {
    if (values_.size() != domain_.size()) {
      throw precondition_error("grid function has " + std::to_string(values_.size()) + " values, domain has " +
                               std::to_string(domain_.size()) + " cells");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double v = values_[i];
      if (std::isnan(v) || (std::isinf(v) && !(extended_ && v > 0.0))) {
        throw precondition_error("grid function value at cell " + std::to_string(i) + " is not finite");
      }
    }
  }

  static GridFunction constant(const BoxDomain& d, double c, FieldKind kind = FieldKind::scalar) {
    return GridFunction(d, std::vector<double>(d.size(), c), kind);
  }

  template <class F>
  static GridFunction from_function(const BoxDomain& d, F&& f, FieldKind kind = FieldKind::scalar) {
    std::vector<double> v(d.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(d.center(i));
    return GridFunction(d, std::move(v), kind);
  }

  const BoxDomain& domain() const { return domain_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  FieldKind kind() const { return kind_; }
  bool extended() const { return extended_; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  template <class F>
  GridFunction map(F&& f) const {
    std::vector<double> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), f);
    return GridFunction(domain_, std::move(v), kind_, extended_);
  }

  GridFunction abs() const {
    auto r = map([](double v) { return std::abs(v); });
    r.kind_ = FieldKind::scalar;
    return r;
  }

  GridFunction scaled(double c) const {
    return map([c](double v) { return c * v; });
  }

  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }
  double min_value() const { return *std::min_element(values_.begin(), values_.end()); }

  friend GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    require_same_domain(a, b);
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] + b.values_[i];
    return GridFunction(a.domain_, std::move(v));
  }

  friend GridFunction operator*(const GridFunction& a, const GridFunction& b) {
    require_same_domain(a, b);
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] * b.values_[i];
    return GridFunction(a.domain_, std::move(v), a.kind_, a.extended_ || b.extended_);
  }

  friend GridFunction operator*(double c, const GridFunction& a) { return a.scaled(c); }

  static void require_same_domain(const GridFunction& a, const GridFunction& b) {
    if (!(a.domain_ == b.domain_)) throw domain_mismatch("grid functions live on different domains");
  }

 private:
  BoxDomain domain_;
  std::vector<double> values_{0.0};
  FieldKind kind_ = FieldKind::scalar;
  bool extended_ = false;
};

/// Midpoint quadrature of f (times weight, if given) over the domain.
inline double integrate(const GridFunction& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.domain().cell_volume();
}

inline double integrate(const GridFunction& f, const GridFunction& weight) {
  GridFunction::require_same_domain(f, weight);
  double s = 0.0;
  const auto fv = f.values();
  const auto wv = weight.values();
  for (std::size_t i = 0; i < fv.size(); ++i) s += fv[i] * wv[i];
  return s * f.domain().cell_volume();
}

/// Central differences in the interior, second-order one-sided stencils on boundary cells.
inline std::vector<GridFunction> gradient(const GridFunction& f) {
  const BoxDomain& d = f.domain();
  for (int a = 0; a < d.dim(); ++a) {
    if (d.resolution(a) < 3) {
      throw precondition_error("gradient needs resolution >= 3 on every axis");
    }
  }
  const auto v = f.values();
  std::vector<GridFunction> out;
  out.reserve(d.dim());
  for (int a = 0; a < d.dim(); ++a) {
    const std::size_t s = d.stride(a);
    const auto n = static_cast<std::ptrdiff_t>(d.resolution(a));
    const double h = d.spacing(a);
    std::vector<double> g(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::ptrdiff_t k = d.multi_index(i)[a];
      if (k == 0) {
        g[i] = (-3.0 * v[i] + 4.0 * v[i + s] - v[i + 2 * s]) / (2.0 * h);
      } else if (k == n - 1) {
        g[i] = (3.0 * v[i] - 4.0 * v[i - s] + v[i - 2 * s]) / (2.0 * h);
      } else {
        g[i] = (v[i + s] - v[i - s]) / (2.0 * h);
      }
    }
    out.emplace_back(d, std::move(g), FieldKind::gradient_component);
  }
  return out;
}

/// Euclidean length of the gradient field, |grad f|.
inline GridFunction gradient_magnitude(const GridFunction& f) {
  const auto comps = gradient(f);
  std::vector<double> m(f.size(), 0.0);
  for (const auto& c : comps) {
    const auto cv = c.values();
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += cv[i] * cv[i];
  }
  for (double& x : m) x = std::sqrt(x);
  return GridFunction(f.domain(), std::move(m));
}

/// Visits every cell whose center lies in the open ball, passing (flat index, squared distance).
template <class Visitor>
void for_each_cell_in_ball(const BoxDomain& d, const Point& center, double radius, Visitor&& visit) {
  const double r2 = radius * radius;
  Index lo{}, hi{};
  for (int a = 0; a < d.dim(); ++a) {
    const double h = d.spacing(a);
    lo[a] = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor((center[a] - radius - d.lower(a)) / h)) - 1);
    hi[a] = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(d.resolution(a)) - 1,
                                     static_cast<std::ptrdiff_t>(std::ceil((center[a] + radius - d.lower(a)) / h)) + 1);
    if (lo[a] > hi[a]) return;
  }
  Index idx = lo;
  while (true) {
    const Point c = d.center(idx);
    const double d2 = distance_squared(c, center, d.dim());
    if (d2 < r2) visit(d.flat_index(idx), d2);
    int a = d.dim() - 1;
    while (a >= 0) {
      if (++idx[a] <= hi[a]) break;
      idx[a] = lo[a];
      --a;
    }
    if (a < 0) break;
  }
}

enum class AverageNormalization {
  ball_volume,    ///< divide by the exact volume omega_n r^n
  covered_cells,  ///< divide by the total volume of the cells counted
};

struct BallAverage {
  double value = 0.0;
  std::size_t cells = 0;
  bool degenerate = false;  ///< no cell center inside the ball
};

/// Average of f over B with f extended by zero outside the domain; membership by cell center.
inline BallAverage integral_average(const GridFunction& f, const Ball& b,
                                    AverageNormalization norm = AverageNormalization::ball_volume) {
  const BoxDomain& d = f.domain();
  double s = 0.0;
  std::size_t count = 0;
  const auto v = f.values();
  for_each_cell_in_ball(d, b.center, b.radius, [&](std::size_t i, double) {
    s += v[i];
    ++count;
  });
  BallAverage out;
  out.cells = count;
  if (count == 0) {
    out.degenerate = true;
    return out;
  }
  if (norm == AverageNormalization::ball_volume) {
    out.value = s * d.cell_volume() / (unit_ball_volume(d.dim()) * std::pow(b.radius, d.dim()));
  } else {
    out.value = s / static_cast<double>(count);
  }
  return out;
}

}  // namespace hajlasz
