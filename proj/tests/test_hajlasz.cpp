#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hajlasz/catalog.hpp"
#include "hajlasz/hajlasz.hpp"

using namespace hajlasz;

namespace {

constexpr double kPi = std::numbers::pi;

// Integral of |x - y|^{-1} over the unit disc, in polar coordinates around x.
double disc_potential_oracle(double x0, double x1) {
  const int m = 200000;
  double s = 0.0;
  for (int k = 0; k < m; ++k) {
    const double th = 2.0 * kPi * (k + 0.5) / m;
    const double b = x0 * std::cos(th) + x1 * std::sin(th);
    s += -b + std::sqrt(b * b + 1.0 - x0 * x0 - x1 * x1);
  }
  return s * 2.0 * kPi / m;
}

GridFunction field(const BoxDomain& d, double (*fn)(double)) {
  return GridFunction::from_function(d, [fn](const Point& p) { return fn(p[0]); });
}

double heaviside(double x) { return x > 0.0 ? 1.0 : 0.0; }

}  // namespace

TEST(Riesz, OneDimensionalKernelIsOne) {
  const auto d = BoxDomain::interval(-2.0, 2.0, 1024);
  EXPECT_NEAR(riesz_potential(GridFunction::constant(d, 1.0), {0.0}, Ball({0.0}, 1.0)), 2.0, 1e-12);
  EXPECT_EQ(riesz_potential(GridFunction::constant(d, 0.0), {0.0}, Ball({0.0}, 1.0)), 0.0);
  EXPECT_THROW(riesz_potential(GridFunction::constant(d, 1.0), {1.5}, Ball({0.0}, 1.0)), precondition_error);
}

TEST(Riesz, UnitDiscAtCenterIsTwoPi) {
  const BoxDomain d({-1.0, -1.0}, {1.0, 1.0}, {1024, 1024});
  const double v = riesz_potential(GridFunction::constant(d, 1.0), {0.0, 0.0}, Ball({0.0, 0.0}, 1.0));
  EXPECT_NEAR(v, 2.0 * kPi, 0.01 * 2.0 * kPi);
}

TEST(Riesz, OffCenterMatchesPolarOracle) {
  const BoxDomain d({-1.0, -1.0}, {1.0, 1.0}, {256, 256});
  const auto one = GridFunction::constant(d, 1.0);
  for (const Point x : {Point{0.3, 0.2, 0.0}, Point{-0.61, 0.05, 0.0}, Point{0.001, -0.002, 0.0}}) {
    const double oracle = disc_potential_oracle(x[0], x[1]);
    EXPECT_NEAR(riesz_potential(one, x, Ball({0.0, 0.0}, 1.0)), oracle, 0.01 * oracle);
  }
}

TEST(Riesz, ThreeDimensionalBall) {
  // Integral of |y|^{-2} over the unit ball is 4 pi.
  const auto d = BoxDomain::cube(3, -1.0, 1.0, 96);
  const double v = riesz_potential(GridFunction::constant(d, 1.0), {0.0, 0.0, 0.0}, Ball({0.0, 0.0, 0.0}, 1.0));
  EXPECT_NEAR(v, 4.0 * kPi, 0.03 * 4.0 * kPi);
}

TEST(Riesz, MonotoneAndAdditive) {
  const BoxDomain d({0.0, 0.0}, {1.0, 1.0}, {64, 64});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(d.size()), b(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    a[i] = u(rng);
    b[i] = a[i] + u(rng);
  }
  const GridFunction ga(d, a), gb(d, b);
  const Ball ball({0.5, 0.5}, 0.4);
  for (int k = 0; k < 10; ++k) {
    const Point x{0.3 + 0.4 * u(rng), 0.3 + 0.4 * u(rng), 0.0};
    const double pa = riesz_potential(ga, x, ball), pb = riesz_potential(gb, x, ball);
    EXPECT_LE(pa, pb);
    EXPECT_NEAR(riesz_potential(ga + gb, x, ball), pa + pb, 1e-12 * (pa + pb));
  }
}

TEST(Poincare, ConstantGivesZero) {
  const auto d = BoxDomain::interval(-1.0, 1.0, 256);
  const auto est = poincare_pointwise_check(GridFunction::constant(d, 2.0), Ball({0.0}, 1.0), 64);
  EXPECT_EQ(est.constant, 0.0);
  EXPECT_EQ(est.samples, 0u);
}

TEST(Poincare, LinearFunctionIsOneHalf) {
  const auto d = BoxDomain::interval(-1.0, 1.0, 1024);
  const auto f = field(d, [](double x) { return x; });
  const auto est = poincare_pointwise_check(f, Ball({0.0}, 1.0), 1024);
  EXPECT_NEAR(est.mean, 0.0, 1e-14);
  EXPECT_NEAR(est.constant, 0.5, 2.0 / 1024.0);
  EXPECT_LE(est.constant, 0.5 + 1e-12);
  EXPECT_THROW(poincare_pointwise_check(f, Ball({0.5}, 1.0), 8), precondition_error);
}

TEST(Poincare, TwoDimensionalBumpStableUnderRefinement) {
  auto estimate = [](std::size_t n) {
    const BoxDomain d({-1.0, -1.0}, {1.0, 1.0}, {n, n});
    const auto f = sample({CatalogId::bump, {1.0, 0.7, 0.1, -0.2}}, d);
    return poincare_pointwise_check(f, Ball({0.0, 0.0}, 1.0), 256).constant;
  };
  const double a = estimate(128), b = estimate(256);
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(a, b, 0.1 * b);
}

TEST(Hedberg, IndicatorGradientRatioQuarter) {
  const auto d = BoxDomain::interval(-2.0, 2.0, 1024);
  const auto grad = field(d, [](double x) { return (x > 0.0 && x < 1.0) ? 1.0 : 0.0; });
  MaximalConfig cfg;
  cfg.min_radius = 0.05;
  const auto r = hedberg_check_field(grad, {0.5}, 1.0, 0.05, cfg);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.constants.at("lhs"), 1.0, 1e-12);
  EXPECT_NEAR(r.constants.at("ratio"), 0.25, 0.25 * 0.05);
}

TEST(Hedberg, ZeroGradient) {
  const auto d = BoxDomain::interval(-1.0, 1.0, 64);
  const auto r = hedberg_check(GridFunction::constant(d, 3.0), {0.1}, 0.5);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.constants.at("lhs"), 0.0, 1e-12);
}

TEST(Hedberg, RandomPointsOnTwoDimensionalBump) {
  const BoxDomain d({-1.0, -1.0}, {1.0, 1.0}, {128, 128});
  const auto f = sample({CatalogId::bump, {1.0, 0.6, 0.0, 0.1}}, d);
  const auto grad = gradient_magnitude(f);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.8, 0.8), t(0.05, 0.8);
  for (int k = 0; k < 50; ++k) {
    const auto r = hedberg_check_field(grad, {u(rng), u(rng), 0.0}, t(rng));
    EXPECT_TRUE(r.passed) << r.worst_ratio;
    EXPECT_LE(r.worst_ratio, 1.05);
  }
}

TEST(HajlaszGradient, Examples) {
  const auto d = BoxDomain::interval(-1.0, 1.0, 512);
  for (double v : hajlasz_gradient(GridFunction::constant(d, 1.0), 5.0).values()) EXPECT_NEAR(v, 0.0, 1e-12);
  const auto g = hajlasz_gradient(field(d, [](double x) { return x; }), 0.5);
  for (std::size_t i = 2; i + 2 < d.size(); ++i) {
    EXPECT_GE(g[i], 0.5 - 1e-12);
    EXPECT_LE(g[i], 0.75);
  }
  EXPECT_NEAR(hajlasz_constant(0.5, 1), 3.0 * 0.5 * 1.0 * 2.0, 1e-15);
  EXPECT_NEAR(hajlasz_constant(1.0, 2), 6.0 * kPi, 1e-12);
  EXPECT_THROW(hajlasz_gradient(GridFunction::constant(d, 1.0), -1.0), precondition_error);
}

TEST(PairSample, AdmissibleDistinctAndSeeded) {
  const BoxDomain d({0.0, 0.0}, {1.0, 2.0}, {32, 64});
  PairSampleOptions opt;
  opt.count = 500;
  const auto s = make_pair_sample(d, opt);
  EXPECT_EQ(s.admissible_count(), s.pairs.size());
  for (const auto& [i, j] : s.pairs) {
    EXPECT_NE(i, j);
    const Point x = d.center(i), y = d.center(j);
    EXPECT_LE(3.0 * distance(x, y, 2), d.distance_to_boundary(x));
  }
  const auto again = make_pair_sample(d, opt);
  EXPECT_EQ(again.pairs, s.pairs);
  opt.seed = 99;
  EXPECT_NE(make_pair_sample(d, opt).pairs, s.pairs);

  opt.symmetric = true;
  for (const auto& [i, j] : make_pair_sample(d, opt).pairs) {
    EXPECT_LE(3.0 * distance(d.center(i), d.center(j), 2), d.distance_to_boundary(d.center(j)));
  }
}

TEST(PairSample, ExplicitPairs) {
  const auto d = BoxDomain::interval(0.0, 1.0, 100);
  const auto s = pair_sample_from(d, {{50, 51}, {0, 1}, {50, 60}});
  EXPECT_EQ(s.admissible, (std::vector<char>{1, 0, 1}));
  EXPECT_EQ(s.neighbor, (std::vector<char>{1, 1, 0}));
  EXPECT_THROW(pair_sample_from(d, {{3, 3}}), precondition_error);
}

TEST(VerifyPointwise, LinearIsExactlyOne) {
  const auto d = BoxDomain::interval(-1.0, 1.0, 1024);
  PairSampleOptions opt;
  opt.count = 2000;
  const auto r = verify_pointwise(field(d, [](double x) { return x; }), GridFunction::constant(d, 0.5),
                                  make_pair_sample(d, opt));
  EXPECT_NEAR(r.minimal_constant, 1.0, 1e-12);
  EXPECT_EQ(r.violation_count, 0u);
  EXPECT_FALSE(r.blow_up);
}

TEST(VerifyPointwise, JumpBlowsUp) {
  const auto d = BoxDomain::interval(-1.0, 1.0, 1024);
  const auto r = verify_pointwise(field(d, heaviside), GridFunction::constant(d, 1.0), make_pair_sample(d));
  EXPECT_GT(r.minimal_constant, 10.0);
  EXPECT_TRUE(r.blow_up);
  EXPECT_LT(std::abs(r.worst_x[0]), 2.0 / 1024.0);
  EXPECT_GT(r.violation_count, 0u);
}

TEST(VerifyPointwise, ZeroOverZeroIsZero) {
  EXPECT_EQ(hajlasz_ratio(1.0, 1.0, 0.0, 0.0, 0.1), 0.0);
  EXPECT_TRUE(std::isinf(hajlasz_ratio(1.0, 2.0, 0.0, 0.0, 0.1)));
  EXPECT_DOUBLE_EQ(hajlasz_ratio(0.0, 1.0, 1.0, 1.0, 0.25), 2.0);
}

TEST(VerifyPointwise, SineAgainstExhaustiveSweep) {
  // Every admissible pair at low resolution bounds any sample from above.
  const auto d = BoxDomain::interval(-kPi, kPi, 128);
  const auto f = field(d, [](double x) { return std::sin(x); });
  const auto g = hajlasz_gradient(f, 1.0);
  double sweep = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (i == j || !admissible_pair(d, d.center(i), d.center(j))) continue;
      all.emplace_back(i, j);
      sweep = std::max(sweep, hajlasz_ratio(f[i], f[j], g[i], g[j], std::abs(d.center(i)[0] - d.center(j)[0])));
    }
  }
  PairSampleOptions opt;
  opt.count = 3000;
  EXPECT_LE(verify_pointwise(f, g, make_pair_sample(d, opt)).minimal_constant, sweep);
  EXPECT_NEAR(verify_pointwise(f, g, pair_sample_from(d, all)).minimal_constant, sweep, 1e-15);
  EXPECT_LE(sweep, 1.2);
}

TEST(VerifyPointwise, SineStableUnderRefinement) {
  auto run = [](std::size_t n) {
    const auto d = BoxDomain::interval(-kPi, kPi, n);
    const auto f = field(d, [](double x) { return std::sin(x); });
    return verify_pointwise(f, hajlasz_gradient(f, 1.0), make_pair_sample(d)).minimal_constant;
  };
  const double a = run(1024), b = run(2048);
  EXPECT_LE(a, 1.2);
  EXPECT_LE(b, 1.2);
  EXPECT_NEAR(a, b, 0.15 * b);
}

TEST(DerivativeBound, AbsoluteValueAndLinear) {
  const auto d = BoxDomain::interval(-1.0, 1.0, 1000);
  const auto s = make_pair_sample(d);
  const auto half = GridFunction::constant(d, 0.5);
  const auto lin = derivative_bound_check(field(d, [](double x) { return x; }), half, 1.0, s);
  EXPECT_TRUE(lin.passed);
  EXPECT_NEAR(lin.worst_ratio, 1.0, 1e-9);
  EXPECT_TRUE(lin.excluded.empty());

  const auto kink = derivative_bound_check(field(d, [](double x) { return std::abs(x); }), half, 1.0, s);
  EXPECT_TRUE(kink.passed);
  EXPECT_LE(kink.excluded.size(), 2u);
  for (std::size_t i : kink.excluded) EXPECT_LT(std::abs(d.center(i)[0]), 2.0 * d.spacing(0));

  EXPECT_THROW(derivative_bound_check(field(d, [](double x) { return 3.0 * x; }), half, 1.0, s), precondition_error);
}

TEST(DerivativeBound, SineRoundTrip) {
  const auto d = BoxDomain::interval(-kPi, kPi, 1024);
  const auto f = field(d, [](double x) { return std::sin(x); });
  const auto g = hajlasz_gradient(f, 1.0);
  const auto s = make_pair_sample(d);
  const double c = std::max(1.0, verify_pointwise(f, g, s).minimal_constant);
  const auto r = derivative_bound_check(f, g, c, s);
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.excluded.empty());
  for (std::size_t i = 1; i + 1 < d.size(); ++i) {
    EXPECT_LE(std::abs(std::cos(d.center(i)[0])), 2.0 * c * g[i] + r.constants.at("tau") + 1e-4);
  }
}

TEST(TruncationSets, ExamplesAndNesting) {
  const auto d = BoxDomain::interval(-2.0, 2.0, 64);
  for (bool b : truncation_sets(GridFunction::constant(d, 0.5), 1.0)) EXPECT_TRUE(b);
  const auto absx = field(d, [](double x) { return std::abs(x); });
  const auto m = truncation_sets(absx, 1.0);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(m[i], std::abs(d.center(i)[0]) <= 1.0);

  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e(0.3);
  std::vector<double> v(d.size());
  for (auto& x : v) x = e(rng);
  const GridFunction g(d, v);
  for (int k = 1; k < 10; ++k) {
    const auto a = truncation_sets(g, k), b = truncation_sets(g, k + 1);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_TRUE(!a[i] || b[i]);
  }
}

TEST(TruncationSets, LipschitzOnLevelSets) {
  const auto d = BoxDomain::interval(-kPi, kPi, 1024);
  const auto f = field(d, [](double x) { return std::sin(x); });
  auto g = hajlasz_gradient(f, 1.0);
  const auto s = make_pair_sample(d);
  g = g.scaled(std::max(1.0, verify_pointwise(f, g, s).minimal_constant));
  for (double k : {0.3, 0.6, 1.0}) {
    const auto mask = truncation_sets(g, k);
    for (const auto& [i, j] : s.pairs) {
      if (!mask[i] || !mask[j]) continue;
      EXPECT_LE(std::abs(f[i] - f[j]), 2.0 * k * std::abs(d.center(i)[0] - d.center(j)[0]) * (1.0 + 1e-12));
    }
  }
}

TEST(McShane, Examples) {
  const auto e = mcshane_extend({Point{0.0}, Point{1.0}}, {0.0, 1.0}, 1.0, 1);
  EXPECT_DOUBLE_EQ(e({0.5}), 0.5);
  EXPECT_DOUBLE_EQ(e({2.0}), 2.0);
  EXPECT_THROW(mcshane_extend({Point{0.0}, Point{1.0}}, {0.0, 3.0}, 1.0, 1), precondition_error);
  EXPECT_THROW(mcshane_extend({}, {}, 1.0, 1), precondition_error);
}

TEST(McShane, InterpolatesAndStaysLipschitz) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double L = 2.5;
  for (int dim : {1, 2, 3}) {
    std::vector<Point> pts(100);
    std::vector<double> vals(100);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (int a = 0; a < dim; ++a) pts[i][a] = u(rng);
      // An L-Lipschitz profile truncated from above and below stays L-Lipschitz.
      vals[i] = std::clamp(L * std::sin(norm(pts[i], dim) * 1.0) + 0.3, -0.5, 1.5);
    }
    const auto ext = mcshane_extend(pts, vals, L, dim);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(ext(pts[i]), vals[i], 1e-12);
    for (int k = 0; k < 1000; ++k) {
      Point x{}, y{};
      for (int a = 0; a < dim; ++a) {
        x[a] = 2.0 * u(rng);
        y[a] = 2.0 * u(rng);
      }
      EXPECT_LE(std::abs(ext(x) - ext(y)), L * distance(x, y, dim) + 1e-12);
    }
  }
}
