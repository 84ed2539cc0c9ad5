#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hajlasz/catalog.hpp"
#include "hajlasz/norms.hpp"
#include "hajlasz/weights.hpp"

using namespace hajlasz;

namespace {

// Straight dense-grid oracle: max of (eps * sum |f|^{q-eps} w a^eps h^n)^{1/(q-eps)} over `points`
// uniform eps on the closed interval [e0, q-1-e0], e0 = (q-1)/4096.
double dense_grand(const GridFunction& f, double q, const GridFunction* w, const GridFunction* a, int points) {
  const double e0 = (q - 1.0) / 4096.0;
  double best = 0.0;
  for (int k = 0; k < points; ++k) {
    const double eps = e0 + (q - 1.0 - 2.0 * e0) * k / (points - 1.0);
    const double p = q - eps;
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double wi = w ? (*w)[i] : 1.0;
      const double ai = a ? (*a)[i] : 1.0;
      s += std::pow(std::abs(f[i]), p) * wi * std::pow(ai, eps);
    }
    best = std::max(best, std::pow(eps * s * f.domain().cell_volume(), 1.0 / p));
  }
  return best;
}

GridFunction random_catalog_function(const BoxDomain& d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p;
  switch (rng() % 4) {
    case 0:
      p = {0.5 + 2.0 * u(rng), 0.2 + 0.6 * u(rng)};
      for (int a = 0; a < d.dim(); ++a) p.push_back(u(rng));
      return sample({CatalogId::bump, p}, d);
    case 1: return sample({CatalogId::sine, {1.0 + 5.0 * u(rng), u(rng)}}, d);
    case 2: return sample({CatalogId::power, {0.5 + 2.0 * u(rng)}}, d);
    default:
      for (int a = 0; a < d.dim(); ++a) p.push_back(4.0 * u(rng) - 2.0);
      return sample({CatalogId::linear, p}, d);
  }
}

}  // namespace

TEST(LqNorm, Examples) {
  const auto d = BoxDomain::interval(0.0, 1.0, 4096);
  const auto chi = GridFunction::constant(d, 1.0);
  for (double q : {1.0, 1.5, 3.0}) {
    EXPECT_NEAR(lq_norm(chi, q), 1.0, 1e-14);
    EXPECT_NEAR(lq_norm(chi, q, GridFunction::constant(d, 2.0)), std::pow(2.0, 1.0 / q), 1e-14);
  }
  const auto x = GridFunction::from_function(d, [](const Point& p) { return p[0]; });
  EXPECT_NEAR(lq_norm(x, 2.0), 1.0 / std::sqrt(3.0), 1e-6);
  EXPECT_THROW(lq_norm(x, 0.5), precondition_error);
  EXPECT_THROW(lq_norm(x, 2.0, GridFunction::constant(BoxDomain::interval(0.0, 1.0, 8), 1.0)), domain_mismatch);
}

TEST(SobolevNorm, Examples) {
  const auto d = BoxDomain::interval(0.0, 1.0, 4096);
  EXPECT_EQ(sobolev_norm(GridFunction::constant(d, 0.0), 2.0), 0.0);
  const auto x = GridFunction::from_function(d, [](const Point& p) { return p[0]; });
  EXPECT_NEAR(sobolev_norm(x, 2.0), 1.0 / std::sqrt(3.0) + 1.0, 1e-4);
  EXPECT_NEAR(sobolev_norm(GridFunction::constant(d, 1.7), 2.0), 1.7, 1e-12);
  EXPECT_THROW(sobolev_norm(GridFunction::constant(BoxDomain::interval(0.0, 1.0, 2), 1.0), 2.0), precondition_error);
}

TEST(GrandNorm, ZeroFunction) {
  const auto r = grand_norm(GridFunction::constant(BoxDomain::interval(0.0, 1.0, 64), 0.0), 2.0);
  EXPECT_EQ(r.value, 0.0);
  for (const auto& p : r.profile) EXPECT_EQ(p.value, 0.0);
}

TEST(GrandNorm, IndicatorApproachesOne) {
  const auto d = BoxDomain::interval(0.0, 1.0, 1024);
  const auto chi = GridFunction::constant(d, 1.0);
  const auto r = grand_norm(chi, 2.0);
  EXPECT_NEAR(r.value, 1.0, 1e-3);
  EXPECT_NEAR(dense_grand(chi, 2.0, nullptr, nullptr, 10000), 1.0, 1e-3);
  EXPECT_GE(r.value, dense_grand(chi, 2.0, nullptr, nullptr, 10000) * (1.0 - 1e-12));
  // The sup is approached at the open end eps -> q - 1.
  EXPECT_EQ(r.endpoint_trend, 1);
  EXPECT_GT(r.argmax_eps, 0.99);
}

TEST(GrandNorm, MatchesDenseOracle) {
  const auto d = BoxDomain::interval(-1.0, 1.0, 256);
  const auto w = sample_weight(WeightSpec::exp_decay(1.0), d);
  const auto a = sample_weight(WeightSpec::power(0.5), d);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 6; ++k) {
    const auto f = random_catalog_function(d, rng);
    for (double q : {1.5, 3.0}) {
      const double oracle = dense_grand(f, q, &w, &a, 10000);
      const double fast = grand_norm(f, q, w, a).value;
      EXPECT_NEAR(fast, oracle, 1e-4 * oracle);
      EXPECT_GE(fast, oracle * (1.0 - 1e-12));
    }
  }
}

TEST(GrandNorm, ProfileInvariants) {
  const auto d = BoxDomain::interval(0.0, 1.0, 512);
  const auto f = sample({CatalogId::bump, {1.0, 0.4, 0.5}}, d);
  const auto r = grand_norm(f, 2.5);
  double mx = 0.0;
  for (std::size_t i = 0; i < r.profile.size(); ++i) {
    EXPECT_TRUE(std::isfinite(r.profile[i].value));
    EXPECT_GT(r.profile[i].eps, 0.0);
    EXPECT_LT(r.profile[i].eps, 1.5);
    if (i > 0) EXPECT_GE(r.profile[i].eps, r.profile[i - 1].eps);
    mx = std::max(mx, r.profile[i].value);
    // Every profile entry is a lower bound of the norm, exactly.
    EXPECT_LE(grand_profile_at(f, 2.5, r.profile[i].eps, nullptr, nullptr), r.value);
  }
  EXPECT_EQ(r.value, mx);
}

TEST(GrandNorm, RefinementIsGridIndependent) {
  const auto d = BoxDomain::interval(-1.0, 1.0, 512);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 5; ++k) {
    const auto f = random_catalog_function(d, rng);
    EpsGrid fine;
    fine.points = 8192;
    const double a = grand_norm(f, 2.0).value;
    const double b = grand_norm(f, 2.0, fine).value;
    EXPECT_NEAR(a, b, 1e-6 * b);
  }
}

TEST(GrandNorm, HomogeneityLatticeTriangle) {
  const auto d = BoxDomain::interval(-1.0, 1.0, 256);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const auto f = random_catalog_function(d, rng);
    const auto g = random_catalog_function(d, rng);
    const double q = 1.2 + 2.0 * u(rng);
    const double nf = grand_norm(f, q).value;
    EXPECT_NEAR(grand_norm(f.scaled(2.5), q).value, 2.5 * nf, 1e-12 * nf);
    EXPECT_LE(grand_norm(f + g, q).value, (nf + grand_norm(g, q).value) * (1.0 + 1e-10));
    // |f| min |g| <= |g| pointwise.
    std::vector<double> m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m[i] = std::min(std::abs(f[i]), std::abs(g[i]));
    const GridFunction lo(d, std::move(m));
    EXPECT_LE(grand_norm(lo, q).value, grand_norm(g, q).value * (1.0 + 1e-10));
  }
}

TEST(GrandNorm, MonotoneConvergenceOnTruncations) {
  const auto d = BoxDomain::interval(0.0, 1.0, 1024);
  const auto f = sample({CatalogId::power, {-0.3}}, d);
  double top = 0.0;
  for (double v : f.values()) top = std::max(top, v);
  double prev = 0.0;
  for (double level : {0.25, 0.5, 0.75, 1.0}) {
    std::vector<double> v(f.values().begin(), f.values().end());
    for (auto& x : v) x = std::min(x, level * top);
    const GridFunction fn(d, std::move(v));
    const double n = grand_norm(fn, 2.0).value;
    EXPECT_GE(n, prev);
    prev = n;
  }
  EXPECT_NEAR(prev, grand_norm(f, 2.0).value, 1e-15);
}

TEST(GrandNorm, Validation) {
  const auto f = GridFunction::constant(BoxDomain::interval(0.0, 1.0, 8), 1.0);
  EXPECT_THROW(grand_norm(f, 1.0), precondition_error);
  EpsGrid empty;
  empty.points = 0;
  EXPECT_THROW(grand_norm(f, 2.0, empty), precondition_error);
  EXPECT_THROW(grand_profile_at(f, 2.0, 1.0, nullptr, nullptr), precondition_error);
}

TEST(GrandSobolev, LinearFunctionMatchesClosedForm) {
  const auto d = BoxDomain::interval(0.0, 1.0, 4096);
  const auto x = GridFunction::from_function(d, [](const Point& p) { return p[0]; });
  // ||x||_p^p = 1/(p+1), ||x'||_p = 1.
  double sup = 0.0, fpart = 0.0;
  for (int k = 0; k <= 100000; ++k) {
    const double eps = (1.0 + 4094.0 * k / 100000.0) / 4096.0;
    const double p = 2.0 - eps;
    sup = std::max(sup, std::pow(eps * (1.0 / (p + 1.0) + 1.0), 1.0 / p));
    fpart = std::max(fpart, std::pow(eps / (p + 1.0), 1.0 / p));
  }
  const auto sp = sobolev_profile(x, 2.0, nullptr, nullptr);
  const auto s = grand_sobolev_sum(sp);
  EXPECT_NEAR(grand_sobolev_sup(sp).value, sup, 1e-5);
  EXPECT_NEAR(s.f_part, fpart, 1e-5);
  EXPECT_NEAR(s.grad_part, 1.0, 1e-3);
  const auto r = equivalence_check(sp);
  EXPECT_TRUE(r.passed);
  EXPECT_GT(r.constants.at("ratio"), 0.25);
  EXPECT_LE(r.constants.at("ratio"), 1.0);
}

TEST(GrandSobolev, ConstantAndZero) {
  const auto d = BoxDomain::interval(0.0, 1.0, 256);
  const auto c = GridFunction::constant(d, 3.0);
  EXPECT_NEAR(grand_sobolev_sum(c, 2.0, nullptr, nullptr), grand_norm(c, 2.0).value, 1e-12);
  const auto z = GridFunction::constant(d, 0.0);
  EXPECT_EQ(grand_sobolev_sup(z, 2.0, nullptr, nullptr).value, 0.0);
  EXPECT_EQ(grand_sobolev_sum(z, 2.0, nullptr, nullptr), 0.0);
  EXPECT_TRUE(equivalence_check(z, 2.0, nullptr, nullptr).passed);
}

TEST(GrandSobolev, SumFormPartsAreGrandNorms) {
  const BoxDomain d({0.0, 0.0}, {1.0, 1.0}, {64, 64});
  const auto f = sample({CatalogId::bump, {1.0, 0.3, 0.5, 0.5}}, d);
  const auto s = grand_sobolev_sum(sobolev_profile(f, 2.0, nullptr, nullptr));
  EXPECT_NEAR(s.f_part, grand_norm(f, 2.0).value, 1e-7 * s.f_part);
  EXPECT_NEAR(s.grad_part, grand_norm(gradient_magnitude(f), 2.0).value, 1e-7 * s.grad_part);
}

TEST(GrandSobolev, EquivalenceOnRandomFunctions) {
  std::mt19937_64 rng(21);
  for (int n : {1, 2}) {
    const auto d = BoxDomain::cube(n, 0.0, 1.0, n == 1 ? 512 : 48);
    for (int k = 0; k < 8; ++k) {
      const auto f = random_catalog_function(d, rng);
      for (double q : {1.5, 2.0, 3.0}) {
        const auto sp = sobolev_profile(f, q, nullptr, nullptr);
        EXPECT_TRUE(equivalence_check(sp).passed);
        const auto plain = grand_sobolev_sup(sp, InnerSobolevNorm::plain_sum).value;
        EXPECT_GE(plain, grand_sobolev_sup(sp).value * (1.0 - 1e-12));
        EXPECT_LE(plain, grand_sobolev_sum(sp).value * (1.0 + 1e-12));
      }
    }
  }
}
