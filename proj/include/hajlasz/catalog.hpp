#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hajlasz/expression.hpp"
#include "hajlasz/grid.hpp"

namespace hajlasz {

enum class CatalogId {
  constant,
  linear,
  power,
  bump,
  sine,
  abs,
  indicator,
  power_weight,
  exp_decay_weight,
  custom_expression,
};

struct TestFunctionSpec {
  CatalogId id = CatalogId::constant;
  std::vector<double> params;
  std::string expression;  ///< only read for custom_expression
};

struct CatalogEntry {
  CatalogId id;
  std::string_view name;
  std::string_view formula;
  std::string_view params;
  /// Number of parameters expected for a given dimension.
  std::size_t (*arity)(int dim);
};

/// Test-function catalog, sorted by name.
inline std::span<const CatalogEntry> function_catalog() {
  static const CatalogEntry entries[] = {
      {CatalogId::abs, "abs", "|x|", "[]", [](int) -> std::size_t { return 0; }},
      {CatalogId::bump, "bump", "A*exp(1 - 1/(1 - |x-c|^2/R^2)) for |x-c| < R, else 0", "[A, R, c_1..c_dim]",
       [](int d) -> std::size_t { return 2 + static_cast<std::size_t>(d); }},
      {CatalogId::constant, "constant", "c", "[c]", [](int) -> std::size_t { return 1; }},
      {CatalogId::custom_expression, "custom-expression", "user expression in x, y, z, r", "[] + expression",
       [](int) -> std::size_t { return 0; }},
      {CatalogId::exp_decay_weight, "exp-decay-weight", "exp(-lambda*|x|)", "[lambda]",
       [](int) -> std::size_t { return 1; }},
      {CatalogId::indicator, "indicator", "1 on the open box prod (lo_i, hi_i), else 0",
       "[lo_1, hi_1, .., lo_dim, hi_dim]", [](int d) -> std::size_t { return 2 * static_cast<std::size_t>(d); }},
      {CatalogId::linear, "linear", "s_1*x_1 + .. + s_dim*x_dim", "[s_1..s_dim]",
       [](int d) -> std::size_t { return static_cast<std::size_t>(d); }},
      {CatalogId::power, "power", "|x|^beta", "[beta]", [](int) -> std::size_t { return 1; }},
      {CatalogId::power_weight, "power-weight", "|x|^β", "[β]", [](int) -> std::size_t { return 1; }},
      {CatalogId::sine, "sine", "prod_i sin(k*x_i + phi)", "[k, phi]", [](int) -> std::size_t { return 2; }},
  };
  return entries;
}

inline const CatalogEntry& catalog_entry(CatalogId id) {
  for (const auto& e : function_catalog()) {
    if (e.id == id) return e;
  }
  throw precondition_error("unknown catalog id");
}

inline std::optional<CatalogId> catalog_id_from_name(std::string_view name) {
  for (const auto& e : function_catalog()) {
    if (e.name == name) return e.id;
  }
  return std::nullopt;
}

using PointFunction = std::function<double(const Point&)>;

/// Validated closed-form evaluator for a catalog spec in dimension `dim`.
inline PointFunction make_evaluator(const TestFunctionSpec& spec, int dim) {
  const CatalogEntry& entry = catalog_entry(spec.id);
  const std::size_t want = entry.arity(dim);
  if (spec.params.size() != want) {
    throw precondition_error(std::string(entry.name) + " expects " + std::to_string(want) + " parameters in " +
                             std::to_string(dim) + "D, got " + std::to_string(spec.params.size()));
  }
  const std::vector<double> p = spec.params;
  switch (spec.id) {
    case CatalogId::constant:
      return [c = p[0]](const Point&) { return c; };
    case CatalogId::linear:
      return [p, dim](const Point& x) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += p[i] * x[i];
        return s;
      };
    case CatalogId::power:
    case CatalogId::power_weight:
      return [beta = p[0], dim](const Point& x) { return std::pow(norm(x, dim), beta); };
    case CatalogId::bump: {
      if (!(p[1] > 0.0)) throw precondition_error("bump radius must be positive");
      return [p, dim](const Point& x) {
        Point c{};
        for (int i = 0; i < dim; ++i) c[i] = p[2 + i];
        const double s = distance_squared(x, c, dim) / (p[1] * p[1]);
        return s < 1.0 ? p[0] * std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
      };
    }
    case CatalogId::sine:
      return [k = p[0], phi = p[1], dim](const Point& x) {
        double v = 1.0;
        for (int i = 0; i < dim; ++i) v *= std::sin(k * x[i] + phi);
        return v;
      };
    case CatalogId::abs:
      return [dim](const Point& x) { return norm(x, dim); };
    case CatalogId::indicator:
      return [p, dim](const Point& x) {
        for (int i = 0; i < dim; ++i) {
          if (!(x[i] > p[2 * i] && x[i] < p[2 * i + 1])) return 0.0;
        }
        return 1.0;
      };
    case CatalogId::exp_decay_weight:
      return [lambda = p[0], dim](const Point& x) { return std::exp(-lambda * norm(x, dim)); };
    case CatalogId::custom_expression: {
      auto e = std::make_shared<Expression>(spec.expression);
      return [e, dim](const Point& x) { return (*e)(x, dim); };
    }
  }
  throw precondition_error("unknown catalog id");
}

/// Samples the analytic formula at every cell center.
inline GridFunction sample(const TestFunctionSpec& spec, const BoxDomain& domain) {
  const auto f = make_evaluator(spec, domain.dim());
  std::vector<double> v(domain.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = f(domain.center(i));
    if (!std::isfinite(v[i])) {
      throw precondition_error(std::string(catalog_entry(spec.id).name) + " is not finite at cell " +
                               std::to_string(i));
    }
  }
  return GridFunction(domain, std::move(v));
}

}  // namespace hajlasz
