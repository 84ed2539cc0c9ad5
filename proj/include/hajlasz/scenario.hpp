#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hajlasz/catalog.hpp"
#include "hajlasz/embeddings.hpp"
#include "hajlasz/hajlasz.hpp"
#include "hajlasz/io.hpp"
#include "hajlasz/maximal.hpp"
#include "hajlasz/norms.hpp"
#include "hajlasz/weights.hpp"

namespace hajlasz {

/// Invalid configuration; `field` is the dotted path of the offending key.
class config_error : public std::runtime_error {
 public:
  config_error(std::string field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ExitCode { pass = 0, verification_failure = 1, config_error = 2 };

inline constexpr std::string_view kScenarios[] = {"norm",    "grand-norm", "maximal", "aq",    "hajlasz-verify",
                                                  "hedberg", "poincare",   "embed",   "probe", "bench"};

struct FunctionSource {
  std::optional<TestFunctionSpec> spec;
  std::string path;  ///< binary field file, used when spec is empty
};

struct HedbergPoint {
  Point x{};
  double t = 0.0;
};

struct OutputConfig {
  std::string dir = ".";
  std::string report = "report.json";
  std::string profile = "profile.csv";
  std::string pairs = "pairs.csv";
  std::string field;  ///< optional CSV dump of the main computed field
};

struct ScenarioConfig {
  std::string scenario;
  BoxDomain domain;
  std::optional<FunctionSource> function;
  WeightSpec weight = WeightSpec::constant(1.0);
  WeightSpec grandizer = WeightSpec::constant(1.0);
  std::optional<double> q, t, delta, p, alpha;
  double threshold = 1.15;
  double slack = 0.05;
  std::optional<double> constant;
  std::size_t poincare_samples = 512;
  std::optional<Ball> ball;
  std::optional<SubBox> box;
  EpsGrid eps_grid;
  PairSampleOptions sample;
  MaximalConfig maximal;
  CubeFamily cubes;
  std::vector<HedbergPoint> points;
  std::size_t random_points = 0;
  std::uint64_t points_seed = 1;
  std::size_t family_count = 20;
  std::uint64_t family_seed = 2024;
  std::vector<std::size_t> bench_resolutions{256, 512, 1024};
  std::vector<int> bench_dims{1, 2};
  std::size_t bench_brute_points = 2048;
  OutputConfig output;
  json source;  ///< the parsed document, echoed into the report
};

namespace detail {

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw config_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw config_error(at(key), "required field is missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw config_error(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw config_error(at(key), "expected a finite number");
    return x;
  }

  std::optional<double> opt_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::size_t count(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw config_error(at(key), "expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }

  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw config_error(at(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key) {
    const json& v = get(key);
    if (!v.is_boolean()) throw config_error(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) throw config_error(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw config_error(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) throw config_error(at(key), "expected an array of integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer() || v[i].get<std::int64_t>() <= 0) {
        throw config_error(at(key) + "[" + std::to_string(i) + "]", "expected a positive integer");
      }
      out.push_back(v[i].get<std::size_t>());
    }
    return out;
  }

  ObjectReader child(const std::string& key) { return ObjectReader(get(key), at(key)); }

  /// Rejects keys that were never asked for.
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw config_error(at(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Point to_point(const std::vector<double>& v, int dim, const std::string& field) {
  if (static_cast<int>(v.size()) != dim) {
    throw config_error(field, "expected " + std::to_string(dim) + " coordinates");
  }
  Point p{};
  for (int i = 0; i < dim; ++i) p[i] = v[i];
  return p;
}

inline BoxDomain parse_domain(ObjectReader r) {
  const auto lo = r.numbers("lower");
  const auto hi = r.numbers("upper");
  const auto res = r.counts("resolution");
  r.finish();
  try {
    return BoxDomain(lo, hi, res);
  } catch (const precondition_error& e) {
    throw config_error(r.path(), e.what());
  }
}

inline FunctionSource parse_function(ObjectReader r, int dim) {
  FunctionSource src;
  if (r.has("path")) {
    src.path = r.string("path");
    r.finish();
    return src;
  }
  const std::string name = r.string("name");
  const auto id = catalog_id_from_name(name);
  if (!id) throw config_error(r.at("name"), "unknown catalog function '" + name + "'");
  TestFunctionSpec spec;
  spec.id = *id;
  if (r.has("params")) spec.params = r.numbers("params");
  if (*id == CatalogId::custom_expression) spec.expression = r.string("expression");
  r.finish();
  try {
    (void)make_evaluator(spec, dim);
  } catch (const precondition_error& e) {
    throw config_error(r.at("params"), e.what());
  } catch (const expression_error& e) {
    throw config_error(r.at("expression"), e.what());
  }
  src.spec = spec;
  return src;
}

inline WeightSpec parse_weight(ObjectReader r, int dim) {
  const std::string name = r.string("family");
  const auto fam = weight_family_from_name(name);
  if (!fam) throw config_error(r.at("family"), "unknown weight family '" + name + "'");
  WeightSpec w;
  w.family = *fam;
  w.params.clear();
  if (*fam == WeightFamily::grid) {
    const std::string path = r.string("path");
    try {
      w.field = std::make_shared<const GridFunction>(read_binary(path));
    } catch (const std::exception& e) {
      throw config_error(r.at("path"), e.what());
    }
  } else {
    w.params = r.numbers("params");
  }
  r.finish();
  try {
    validate_weight(w, dim);
  } catch (const precondition_error& e) {
    throw config_error(r.at("params"), e.what());
  }
  return w;
}

}  // namespace detail

/// Parses and validates a scenario document. Throws config_error naming the field.
inline ScenarioConfig parse_config(const json& doc) {
  ScenarioConfig c;
  c.source = doc;
  detail::ObjectReader r(doc, "");
  c.scenario = r.string("scenario");
  if (std::find(std::begin(kScenarios), std::end(kScenarios), c.scenario) == std::end(kScenarios)) {
    throw config_error("scenario", "unknown scenario '" + c.scenario + "'");
  }
  c.domain = detail::parse_domain(r.child("domain"));
  const int dim = c.domain.dim();
  if (r.has("function")) c.function = detail::parse_function(r.child("function"), dim);
  if (r.has("weight")) c.weight = detail::parse_weight(r.child("weight"), dim);
  if (r.has("grandizer")) c.grandizer = detail::parse_weight(r.child("grandizer"), dim);
  c.q = r.opt_number("q");
  c.t = r.opt_number("t");
  c.delta = r.opt_number("delta");
  c.p = r.opt_number("p");
  c.alpha = r.opt_number("alpha");
  c.constant = r.opt_number("constant");
  if (r.has("threshold")) c.threshold = r.number("threshold");
  if (r.has("slack")) c.slack = r.number("slack");
  if (r.has("poincare_samples")) c.poincare_samples = r.count("poincare_samples");
  if (r.has("ball")) {
    auto b = r.child("ball");
    const Point center = detail::to_point(b.numbers("center"), dim, b.at("center"));
    const double radius = b.number("radius");
    b.finish();
    if (!(radius > 0.0)) throw config_error(b.at("radius"), "must be positive");
    c.ball = Ball(center, radius);
  }
  if (r.has("box")) {
    auto b = r.child("box");
    SubBox e;
    e.lo = detail::to_point(b.numbers("lower"), dim, b.at("lower"));
    e.hi = detail::to_point(b.numbers("upper"), dim, b.at("upper"));
    b.finish();
    for (int a = 0; a < dim; ++a) {
      if (!(e.lo[a] < e.hi[a])) throw config_error(b.at("lower"), "box requires lower < upper");
    }
    c.box = e;
  }
  if (r.has("eps_grid")) {
    auto g = r.child("eps_grid");
    if (g.has("points")) c.eps_grid.points = g.count("points");
    if (g.has("refine")) c.eps_grid.refine = g.boolean("refine");
    if (g.has("min_fraction")) c.eps_grid.min_fraction = g.number("min_fraction");
    g.finish();
    if (c.eps_grid.points == 0) throw config_error(g.at("points"), "empty epsilon grid");
    if (!(c.eps_grid.min_fraction > 0.0 && c.eps_grid.min_fraction < 0.5)) {
      throw config_error(g.at("min_fraction"), "must lie in (0, 1/2)");
    }
  }
  if (r.has("sample")) {
    auto s = r.child("sample");
    if (s.has("seed")) c.sample.seed = s.count("seed");
    if (s.has("count")) c.sample.count = s.count("count");
    if (s.has("nearest_neighbors")) c.sample.nearest_neighbors = s.boolean("nearest_neighbors");
    if (s.has("symmetric")) c.sample.symmetric = s.boolean("symmetric");
    s.finish();
  }
  if (r.has("maximal")) {
    auto m = r.child("maximal");
    if (m.has("window")) {
      const std::string w = m.string("window");
      if (w == "ball") {
        c.maximal.window = WindowShape::ball;
      } else if (w == "cube") {
        c.maximal.window = WindowShape::cube;
      } else {
        throw config_error(m.at("window"), "expected \"ball\" or \"cube\"");
      }
    }
    if (m.has("radii")) c.maximal.radii = m.numbers("radii");
    if (m.has("min_radius")) c.maximal.min_radius = m.number("min_radius");
    if (m.has("radii_per_doubling")) c.maximal.radii_per_doubling = static_cast<int>(m.count("radii_per_doubling"));
    m.finish();
    if (c.maximal.radii_per_doubling < 1) throw config_error(m.at("radii_per_doubling"), "must be at least 1");
  }
  if (c.t) {
    if (!(*c.t > 0.0)) throw config_error("t", "must be positive");
    c.maximal.truncation = *c.t;
  }
  try {
    (void)radius_grid(c.domain, c.maximal);
  } catch (const precondition_error& e) {
    throw config_error("maximal.radii", e.what());
  }
  if (r.has("cubes")) {
    auto cb = r.child("cubes");
    if (cb.has("center_stride")) c.cubes.center_stride = cb.count("center_stride");
    if (cb.has("min_half_width")) c.cubes.min_half_width = cb.count("min_half_width");
    if (cb.has("half_width_ratio")) c.cubes.half_width_ratio = cb.number("half_width_ratio");
    cb.finish();
  }
  if (r.has("points")) {
    const json& pts = r.get("points");
    if (!pts.is_array()) throw config_error("points", "expected an array of {x, t}");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      detail::ObjectReader pr(pts[i], "points[" + std::to_string(i) + "]");
      HedbergPoint hp;
      hp.x = detail::to_point(pr.numbers("x"), dim, pr.at("x"));
      hp.t = pr.number("t");
      pr.finish();
      if (!(hp.t > 0.0)) throw config_error(pr.at("t"), "must be positive");
      c.points.push_back(hp);
    }
  }
  if (r.has("random_points")) {
    auto rp = r.child("random_points");
    c.random_points = rp.count("count");
    if (rp.has("seed")) c.points_seed = rp.count("seed");
    rp.finish();
  }
  if (r.has("family")) {
    auto f = r.child("family");
    if (f.has("count")) c.family_count = f.count("count");
    if (f.has("seed")) c.family_seed = f.count("seed");
    f.finish();
  }
  if (r.has("bench")) {
    auto b = r.child("bench");
    if (b.has("resolutions")) c.bench_resolutions = b.counts("resolutions");
    if (b.has("dims")) {
      c.bench_dims.clear();
      for (std::size_t v : b.counts("dims")) {
        if (v > 2) throw config_error(b.at("dims"), "bench supports dimensions 1 and 2");
        c.bench_dims.push_back(static_cast<int>(v));
      }
    }
    if (b.has("brute_points")) c.bench_brute_points = b.count("brute_points");
    b.finish();
  }
  if (r.has("output")) {
    auto o = r.child("output");
    if (o.has("dir")) c.output.dir = o.string("dir");
    if (o.has("report")) c.output.report = o.string("report");
    if (o.has("profile")) c.output.profile = o.string("profile");
    if (o.has("pairs")) c.output.pairs = o.string("pairs");
    if (o.has("field")) c.output.field = o.string("field");
    o.finish();
  }
  r.finish();

  auto need_function = [&] {
    if (!c.function) throw config_error("function", "required field is missing");
  };
  auto need_q = [&](bool strict) {
    if (!c.q) throw config_error("q", "required field is missing");
    if (strict ? !(*c.q > 1.0) : !(*c.q >= 1.0)) throw config_error("q", strict ? "must be > 1" : "must be >= 1");
  };
  const std::string& s = c.scenario;
  if (s == "norm") {
    need_function();
    need_q(false);
  } else if (s == "grand-norm" || s == "embed") {
    need_function();
    need_q(true);
    if (s == "embed" && c.box && !c.delta) throw config_error("delta", "required when box is given");
  } else if (s == "maximal" || s == "hajlasz-verify" || s == "poincare") {
    need_function();
  } else if (s == "hedberg") {
    need_function();
    if (c.points.empty() && c.random_points == 0) throw config_error("points", "required field is missing");
  } else if (s == "aq") {
    need_q(true);
    if (c.p && !(*c.p > *c.q)) throw config_error("p", "must exceed q");
    if (c.p && !c.alpha) throw config_error("alpha", "required when p is given");
    if (c.alpha && !(*c.alpha >= 0.0 && *c.alpha <= 1.0)) throw config_error("alpha", "must lie in [0, 1]");
  } else if (s == "probe") {
    need_q(true);
    if (c.family_count == 0) throw config_error("family.count", "must be positive");
  } else if (s == "bench") {
    if (c.bench_resolutions.empty()) throw config_error("bench.resolutions", "empty resolution list");
  }
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("<file>", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw config_error("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

struct ScenarioResult {
  ExitCode status = ExitCode::pass;
  json report;
  std::optional<GrandNormResult> profile;
  std::string pairs_csv;
  std::string field_csv;
  std::string bench_csv;
};

namespace detail {

inline GridFunction load_function(const ScenarioConfig& c) {
  if (c.function->spec) return sample(*c.function->spec, c.domain);
  GridFunction f = read_binary(c.function->path);
  if (!(f.domain() == c.domain)) throw precondition_error("function file domain differs from the configured domain");
  return f;
}

inline double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline json run_bench(const ScenarioConfig& c, std::string& csv, bool& passed) {
  json rows = json::array();
  std::ostringstream out;
  out << "path,dim,resolution,wall_time,speedup\n";
  for (int dim : c.bench_dims) {
    for (std::size_t res : c.bench_resolutions) {
      const BoxDomain d = BoxDomain::cube(dim, -1.0, 1.0, res);
      std::mt19937_64 rng(c.sample.seed + res * 31 + static_cast<std::size_t>(dim));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> v(d.size());
      for (auto& x : v) x = u(rng);
      const GridFunction g(d, std::move(v));
      MaximalConfig cfg = c.maximal;

      auto t0 = std::chrono::steady_clock::now();
      cfg.window = WindowShape::ball;
      const GridFunction ball = maximal_field(g, cfg);
      const double t_ball = elapsed_seconds(t0);
      t0 = std::chrono::steady_clock::now();
      cfg.window = WindowShape::cube;
      const GridFunction cube = maximal_field(g, cfg);
      const double t_cube = elapsed_seconds(t0);

      // Direct summation on a strided subset of cells; its cost is scaled to the full grid.
      const std::size_t npts = std::min(d.size(), std::max<std::size_t>(1, c.bench_brute_points));
      const auto constants = ball_cube_constants(dim);
      std::size_t mismatches = 0, comparability_failures = 0;
      double max_ball_error = 0.0;
      t0 = std::chrono::steady_clock::now();
      for (std::size_t k = 0; k < npts; ++k) {
        const std::size_t i = k * d.size() / npts;
        MaximalConfig bc = c.maximal;
        bc.window = WindowShape::ball;
        const double mb = maximal_at(g, d.center(i), bc);
        bc.window = WindowShape::cube;
        const double mc = maximal_at(g, d.center(i), bc);
        max_ball_error = std::max(max_ball_error, std::abs(mb - ball[i]) / std::max(1.0, mb));
        if (std::abs(mb - ball[i]) > 1e-12 * std::max(1.0, mb) || std::abs(mc - cube[i]) > 1e-12 * std::max(1.0, mc)) {
          ++mismatches;
        }
        if (dim == 1 && std::abs(cube[i] - ball[i]) > 1e-12 * std::max(1.0, ball[i])) ++mismatches;
        const double slack = 1e-12 * std::max(1.0, mb);
        if (!(mb <= constants.ball_over_cube * cube[i] + slack) || !(cube[i] <= constants.cube_over_ball * mb + slack)) {
          ++comparability_failures;
        }
      }
      const double t_brute = elapsed_seconds(t0) * static_cast<double>(d.size()) / static_cast<double>(npts) / 2.0;
      if (mismatches || comparability_failures) passed = false;
      const double speed_ball = t_ball > 0 ? t_brute / t_ball : kInf;
      const double speed_cube = t_cube > 0 ? t_brute / t_cube : kInf;
      out << "brute," << dim << ',' << res << ',' << fmt(t_brute) << ",1\n";
      out << "fast-ball," << dim << ',' << res << ',' << fmt(t_ball) << ',' << fmt(speed_ball) << '\n';
      out << "fast-cube," << dim << ',' << res << ',' << fmt(t_cube) << ',' << fmt(speed_cube) << '\n';
      rows.push_back(json{{"dim", dim},
                          {"resolution", res},
                          {"brute_points", npts},
                          {"brute_time_estimate", num(t_brute)},
                          {"ball_time", num(t_ball)},
                          {"cube_time", num(t_cube)},
                          {"speedup_ball", num(speed_ball)},
                          {"speedup_cube", num(speed_cube)},
                          {"max_ball_error", num(max_ball_error)},
                          {"mismatches", mismatches},
                          {"comparability_failures", comparability_failures}});
    }
  }
  csv = out.str();
  return rows;
}

inline std::vector<HedbergPoint> hedberg_points(const ScenarioConfig& c) {
  std::vector<HedbergPoint> pts = c.points;
  const BoxDomain& d = c.domain;
  std::mt19937_64 rng(c.points_seed);
  double side = kInf;
  for (int a = 0; a < d.dim(); ++a) side = std::min(side, d.upper(a) - d.lower(a));
  std::uniform_real_distribution<double> ut(2.0 * d.min_spacing(), 0.5 * side);
  for (std::size_t k = 0; k < c.random_points; ++k) {
    HedbergPoint hp;
    for (int a = 0; a < d.dim(); ++a) {
      std::uniform_real_distribution<double> ux(d.lower(a), d.upper(a));
      hp.x[a] = ux(rng);
    }
    hp.t = ut(rng);
    pts.push_back(hp);
  }
  return pts;
}

}  // namespace detail

/// Runs one scenario. Never writes files; see write_outputs.
inline ScenarioResult run_scenario(const ScenarioConfig& c) {
  ScenarioResult out;
  const BoxDomain& d = c.domain;
  const int dim = d.dim();
  json result = json::object();
  bool passed = true;
  try {
    const std::string& s = c.scenario;
    if (s == "bench") {
      result["rows"] = detail::run_bench(c, out.bench_csv, passed);
    } else if (s == "aq") {
      const auto est = aq_constant(c.weight, *c.q, d, c.cubes);
      result["estimate"] = to_json(est, dim);
      passed = !est.divergent;
      if (c.p) {
        const auto props = aq_properties_check(c.weight, *c.q, *c.p, *c.alpha, d, c.cubes);
        result["properties"] = to_json(props);
        passed = passed && props.passed;
      }
    } else if (s == "probe") {
      const GridFunction w = sample_weight(c.weight, d);
      const GridFunction a = sample_weight(c.grandizer, d);
      double lo = kInf, hi = -kInf;
      for (int ax = 0; ax < dim; ++ax) {
        lo = std::min(lo, d.lower(ax));
        hi = std::max(hi, d.upper(ax));
      }
      std::vector<GridFunction> family;
      for (const auto& spec : stress_family(dim, lo, hi, c.family_count, *c.q, c.family_seed)) {
        family.push_back(sample(spec, d));
      }
      const auto probe = maximal_boundedness_probe(family, *c.q, &w, &a, c.maximal, c.eps_grid);
      result["probe"] = to_json(probe);
      passed = probe.finite;
    } else {
      const GridFunction f = detail::load_function(c);
      if (s == "norm") {
        const GridFunction w = sample_weight(c.weight, d);
        result["lq_norm"] = num(lq_norm(f, *c.q, w));
        result["sobolev_norm"] = num(sobolev_norm(f, *c.q, w));
      } else if (s == "grand-norm") {
        const GridFunction w = sample_weight(c.weight, d);
        const GridFunction a = sample_weight(c.grandizer, d);
        out.profile = grand_norm(f, *c.q, &w, &a, c.eps_grid);
        result["grand_norm"] = to_json(*out.profile);
        const auto sp = sobolev_profile(f, *c.q, &w, &a, c.eps_grid);
        const auto sup = grand_sobolev_sup(sp);
        const auto sum = grand_sobolev_sum(sp);
        const auto eq = equivalence_check(sp);
        result["grand_sobolev_sup"] = to_json(sup);
        result["grand_sobolev_sum"] = num(sum.value);
        result["equivalence"] = to_json(eq);
        passed = eq.passed;
      } else if (s == "maximal") {
        const GridFunction m = maximal_field(f, c.maximal);
        MaximalConfig other = c.maximal;
        other.window = c.maximal.window == WindowShape::ball ? WindowShape::cube : WindowShape::ball;
        const GridFunction m2 = maximal_field(f, other);
        const GridFunction& ball = c.maximal.window == WindowShape::ball ? m : m2;
        const GridFunction& cube = c.maximal.window == WindowShape::ball ? m2 : m;
        const auto k = ball_cube_constants(dim);
        std::size_t failures = 0;
        for (std::size_t i = 0; i < d.size(); ++i) {
          const double slack = 1e-12 * std::max(1.0, ball[i]);
          if (!(ball[i] <= k.ball_over_cube * cube[i] + slack) || !(cube[i] <= k.cube_over_ball * ball[i] + slack)) {
            ++failures;
          }
        }
        result["max"] = num(m.max_value());
        result["min"] = num(m.min_value());
        result["integral"] = num(integrate(m));
        result["radii"] = radius_grid(d, c.maximal).size();
        result["comparability_failures"] = failures;
        passed = failures == 0;
        if (!c.output.field.empty()) {
          std::ostringstream os;
          write_field_csv(os, m);
          out.field_csv = os.str();
        }
      } else if (s == "poincare") {
        const Ball b = c.ball.value_or(inscribed_ball(d));
        const auto est = poincare_pointwise_check(f, b, c.poincare_samples);
        result["poincare"] = to_json(est, dim);
        result["hajlasz_constant"] = num(hajlasz_constant(est.constant, dim));
        passed = std::isfinite(est.constant);
      } else if (s == "hedberg") {
        const GridFunction grad = gradient_magnitude(f);
        json rows = json::array();
        double worst = 0.0;
        for (const auto& hp : detail::hedberg_points(c)) {
          const auto rep = hedberg_check_field(grad, hp.x, hp.t, c.slack, c.maximal);
          worst = std::max(worst, rep.worst_ratio);
          passed = passed && rep.passed;
          json row = to_json(rep);
          row["x"] = point_json(hp.x, dim);
          rows.push_back(std::move(row));
        }
        result["checks"] = std::move(rows);
        result["worst_ratio"] = num(worst);
      } else if (s == "hajlasz-verify") {
        double constant = 0.0;
        if (c.constant) {
          constant = *c.constant;
        } else {
          const auto est = poincare_pointwise_check(f, inscribed_ball(d), c.poincare_samples);
          result["poincare"] = to_json(est, dim);
          constant = hajlasz_constant(est.constant, dim);
        }
        result["constant"] = num(constant);
        const GridFunction g = hajlasz_gradient(f, constant, c.maximal);
        const PairSample sample = make_pair_sample(d, c.sample);
        const HajlaszReport rep = verify_pointwise(f, g, sample, c.threshold);
        result["hajlasz"] = to_json(rep, dim);
        passed = rep.minimal_constant <= c.threshold;
        if (dim == 1) {
          try {
            const auto db = derivative_bound_check(f, g, 1.0, sample);
            result["derivative_bound"] = to_json(db);
            passed = passed && db.passed;
          } catch (const precondition_error& e) {
            result["derivative_bound"] = json{{"skipped", e.what()}};
          }
        }
        std::ostringstream os;
        write_pairs_csv(os, f, g, sample);
        out.pairs_csv = os.str();
      } else if (s == "embed") {
        const GridFunction w = sample_weight(c.weight, d);
        const GridFunction a = sample_weight(c.grandizer, d);
        json checks = json::array();
        const auto up = upper_embedding_check(f, *c.q, w, a, c.eps_grid);
        out.profile = grand_norm(f, *c.q, &w, &a, c.eps_grid);
        const auto low = lower_embedding_check(f, *c.q, w, a, *out.profile, 16);
        const auto sob = sobolev_embedding_check(f, *c.q, w, a, c.eps_grid);
        for (const auto* r : {&up, &low, &sob}) {
          checks.push_back(to_json(*r));
          passed = passed && r->passed;
        }
        if (c.box) {
          const auto loc = local_integrability_check(f, *c.box, *c.q, c.weight, c.grandizer, *c.delta, c.eps_grid,
                                                     c.cubes);
          checks.push_back(to_json(loc));
          passed = passed && loc.passed;
        }
        result["checks"] = std::move(checks);
      }
    }
  } catch (const precondition_error& e) {
    passed = false;
    result["error"] = e.what();
  } catch (const expression_error& e) {
    passed = false;
    result["error"] = e.what();
  } catch (const io_error& e) {
    passed = false;
    result["error"] = e.what();
  }
  out.status = passed ? ExitCode::pass : ExitCode::verification_failure;
  out.report = json{{"scenario", c.scenario}, {"passed", passed}, {"domain", domain_json(d)}, {"result", result},
                    {"config", c.source}};
  return out;
}

/// Writes report.json and whichever of profile.csv, pairs.csv, field and bench CSVs apply.
inline std::vector<std::string> write_outputs(const ScenarioConfig& c, const ScenarioResult& r) {
  namespace fs = std::filesystem;
  const fs::path dir(c.output.dir);
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream f(p);
    if (!f) throw io_error("cannot write " + p.string());
    f << text;
    written.push_back(p.string());
  };
  put(c.output.report, r.report.dump(2) + "\n");
  if (r.profile) {
    std::ostringstream os;
    write_profile_csv(os, *r.profile);
    put(c.output.profile, os.str());
  }
  if (!r.pairs_csv.empty()) put(c.output.pairs, r.pairs_csv);
  if (!r.field_csv.empty()) put(c.output.field, r.field_csv);
  if (!r.bench_csv.empty()) put("bench.csv", r.bench_csv);
  return written;
}

/// Catalog listing: test functions, then weight families.
inline std::string list_catalog(bool as_json) {
  if (as_json) {
    json arr = json::array();
    for (const auto& e : function_catalog()) {
      arr.push_back(json{{"kind", "function"},
                         {"name", e.name},
                         {"formula", e.formula},
                         {"params", e.params},
                         {"arity", json::array({e.arity(1), e.arity(2), e.arity(3)})}});
    }
    for (const auto& e : weight_catalog()) {
      arr.push_back(json{{"kind", "weight"}, {"name", e.name}, {"formula", e.formula}, {"params", e.params}});
    }
    return arr.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "test functions (parameter count in 1D/2D/3D):\n";
  for (const auto& e : function_catalog()) {
    os << "  " << e.name << ": " << e.formula << ", params " << e.params << " (" << e.arity(1) << '/' << e.arity(2)
       << '/' << e.arity(3) << ")\n";
  }
  os << "weights:\n";
  for (const auto& e : weight_catalog()) os << "  " << e.name << ": " << e.formula << ", params " << e.params << '\n';
  return os.str();
}

}  // namespace hajlasz
