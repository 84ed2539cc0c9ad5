#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "hajlasz/io.hpp"

using namespace hajlasz;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hajlasz_io_" + name)).string();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Json, NonFiniteNumbersAreStrings) {
  EXPECT_EQ(num(kInf), "inf");
  EXPECT_EQ(num(-kInf), "-inf");
  EXPECT_EQ(num(std::nan("")), "nan");
  EXPECT_EQ(num(0.25).get<double>(), 0.25);
}

TEST(Csv, FormatRoundTripsDoubles) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(fmt(v)), v);
  }
  EXPECT_EQ(fmt(kInf), "inf");
}

TEST(Binary, RoundTripPreservesDomainAndValues) {
  const BoxDomain d({-1.0, 0.5}, {2.0, 1.75}, {7, 5});
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  std::vector<double> v(d.size());
  for (auto& x : v) x = n01(rng);
  const GridFunction f(d, v);
  const auto path = temp_path("roundtrip.bin");
  write_binary(f, path);
  const auto g = read_binary(path);
  ASSERT_EQ(g.domain().dim(), 2);
  for (int a = 0; a < 2; ++a) {
    EXPECT_EQ(g.domain().resolution(a), d.resolution(a));
    EXPECT_EQ(g.domain().lower(a), d.lower(a));
    EXPECT_EQ(g.domain().upper(a), d.upper(a));
  }
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(g[i], f[i]);
  EXPECT_EQ(std::filesystem::file_size(path), 8 * (1 + 2 + 2 + 2 + d.size()));

  std::ifstream side(path + ".json");
  const auto meta = json::parse(side);
  EXPECT_EQ(meta["dim"], 2);
  EXPECT_EQ(meta["resolution"][0], 7);
  EXPECT_EQ(meta["kind"], "scalar");
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}

TEST(Binary, InfiniteWeightSamplesSurvive) {
  const auto d = BoxDomain::interval(-1.0, 1.0, 4);
  const GridFunction w(d, {1.0, kInf, 2.0, 3.0}, FieldKind::weight, true);
  const auto path = temp_path("weight.bin");
  write_binary(w, path);
  const auto g = read_binary(path);
  EXPECT_TRUE(std::isinf(g[1]));
  EXPECT_EQ(g[3], 3.0);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}

TEST(Binary, TruncatedAndMissingFilesRejected) {
  EXPECT_THROW(read_binary(temp_path("does_not_exist.bin")), io_error);
  const auto d = BoxDomain::interval(0.0, 1.0, 16);
  const auto path = temp_path("truncated.bin");
  write_binary(GridFunction::constant(d, 1.0), path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  EXPECT_THROW(read_binary(path), io_error);
  std::ofstream(path, std::ios::binary | std::ios::trunc) << "xxxxxxxx";
  EXPECT_THROW(read_binary(path), io_error);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}

TEST(Csv, FieldHasOneRowPerCell) {
  const BoxDomain d({0.0, 0.0}, {1.0, 2.0}, {2, 2});
  const GridFunction f(d, {1.0, 2.0, 3.0, 4.0});
  std::ostringstream out;
  write_field_csv(out, f);
  const auto l = lines(out.str());
  ASSERT_EQ(l.size(), 5u);
  EXPECT_EQ(l[0], "x,y,value");
  EXPECT_EQ(l[1], "0.25,0.5,1");
  EXPECT_EQ(l[2], "0.25,1.5,2");
  EXPECT_EQ(l[4], "0.75,1.5,4");
}

TEST(Csv, ProfileRows) {
  GrandNormResult r;
  r.profile = {{0.5, 1.0}, {0.25, kInf}};
  std::ostringstream out;
  write_profile_csv(out, r);
  EXPECT_EQ(out.str(), "eps,value\n0.5,1\n0.25,inf\n");
}

TEST(Csv, PairsCarryRatio) {
  const auto d = BoxDomain::interval(0.0, 1.0, 4);
  const GridFunction f(d, {0.0, 1.0, 2.0, 3.0});
  const auto g = GridFunction::constant(d, 2.0);
  PairSample s{d, {{0, 3}}, {1}, {0}, 1, 1, "explicit", false};
  std::ostringstream out;
  write_pairs_csv(out, f, g, s);
  const auto l = lines(out.str());
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[0], "x1,y1,admissible,ratio");
  // |f(x)-f(y)| = 3, |x-y| = 0.75, g(x)+g(y) = 4.
  EXPECT_EQ(l[1], "0.125,0.875,1,1");
}

TEST(Json, DomainDescription) {
  const auto j = domain_json(BoxDomain::cube(3, -1.0, 1.0, 8));
  EXPECT_EQ(j["dim"], 3);
  EXPECT_EQ(j["lower"].size(), 3u);
  EXPECT_EQ(j["resolution"][2], 8);
}
