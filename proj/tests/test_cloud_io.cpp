#include <doctest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "vfd/cloud.hpp"
#include "vfd/errors.hpp"

using namespace vfd;

TEST_SUITE("cloud_io") {

TEST_CASE("xyz parses points in file order") {
  const PointCloud c = parse_cloud("0 0 0\n1 0 0\n0 1 0", CloudFormat::xyz);
  REQUIRE(c.size() == 3);
  CHECK(c.points[0] == Point(0, 0, 0));
  CHECK(c.points[1] == Point(1, 0, 0));
  CHECK(c.points[2] == Point(0, 1, 0));
}

TEST_CASE("xyz skips comments and blank lines") {
  const PointCloud c = parse_cloud("# header\n\n1 2 3\n  # indented comment\n4 5 6\n", CloudFormat::xyz);
  REQUIRE(c.size() == 2);
  CHECK(c.points[1] == Point(4, 5, 6));
}

TEST_CASE("xyz errors") {
  CHECK_THROWS_AS(parse_cloud("", CloudFormat::xyz), EmptyCloud);
  CHECK_THROWS_AS(parse_cloud("# only a comment\n", CloudFormat::xyz), EmptyCloud);
  try {
    parse_cloud("1 2", CloudFormat::xyz);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
  try {
    parse_cloud("1 2 3\n4 5 x\n", CloudFormat::xyz);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_cloud("1 2 nan\n", CloudFormat::xyz), ParseError);
  CHECK_THROWS_AS(parse_cloud("1 2 3 4\n", CloudFormat::xyz), ParseError);
}

TEST_CASE("write_cloud format") {
  PointCloud c;
  c.points.emplace_back(0, 0, 0);
  CHECK(write_cloud(c) == "0 0 0\n");
}

TEST_CASE("xyz round trip is coordinate-exact") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::uniform_int_distribution<int> ex(-300, 300);
  for (int trial = 0; trial < 100; ++trial) {
    PointCloud c;
    for (int i = 0; i < 50; ++i)
      c.points.emplace_back(u(rng), std::ldexp(u(rng), ex(rng)), trial % 7 == 0 ? 0.1 : u(rng) * 1e-9);
    const PointCloud back = parse_cloud(write_cloud(c), CloudFormat::xyz);
    REQUIRE(back.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(back.points[i] == c.points[i]);
  }
}

TEST_CASE("0.1 survives a round trip bit for bit") {
  PointCloud c;
  c.points.emplace_back(0.1, -0.1, 1.0 / 3.0);
  const PointCloud back = parse_cloud(write_cloud(c), CloudFormat::xyz);
  CHECK(back.points[0] == c.points[0]);
}

TEST_CASE("OFF vertices are read and faces ignored") {
  const char* text =
      "OFF\n# comment\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 2 3\n";
  const PointCloud c = parse_cloud(text, CloudFormat::off);
  REQUIRE(c.size() == 4);
  CHECK(c.points[3] == Point(0, 0, 1));

  const PointCloud glued = parse_cloud("OFF3 0 0\n1 1 1\n2 2 2\n3 3 3\n", CloudFormat::off);
  CHECK(glued.size() == 3);

  CHECK_THROWS_AS(parse_cloud("4 2 0\n0 0 0\n", CloudFormat::off), ParseError);
  CHECK_THROWS_AS(parse_cloud("OFF\n3 0 0\n0 0 0\n1 1 1\n", CloudFormat::off), ParseError);
  CHECK_THROWS_AS(parse_cloud("OFF\n0 0 0\n", CloudFormat::off), EmptyCloud);
}

TEST_CASE("ascii PLY reads x y z by property name") {
  const char* text =
      "ply\nformat ascii 1.0\ncomment test\nelement vertex 2\nproperty float nx\nproperty float x\n"
      "property float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n"
      "9 1 2 3\n9 4 5 6\n3 0 1 1\n";
  const PointCloud c = parse_cloud(text, CloudFormat::ply_ascii);
  REQUIRE(c.size() == 2);
  CHECK(c.points[0] == Point(1, 2, 3));
  CHECK(c.points[1] == Point(4, 5, 6));

  CHECK_THROWS_AS(parse_cloud("ply\nformat binary_little_endian 1.0\nend_header\n", CloudFormat::ply_ascii),
                  ParseError);
}

TEST_CASE("format from extension") {
  CHECK(format_from_extension("a/b.xyz") == CloudFormat::xyz);
  CHECK(format_from_extension("b.OFF") == CloudFormat::off);
  CHECK(format_from_extension("b.ply") == CloudFormat::ply_ascii);
  CHECK_THROWS_AS(format_from_extension("b.obj"), InvalidArgument);
}

TEST_CASE("validate rejects empty and non-finite clouds") {
  CHECK_THROWS_AS(validate(PointCloud{}), EmptyCloud);
  PointCloud c;
  c.points.emplace_back(0, std::numeric_limits<double>::infinity(), 0);
  CHECK_THROWS_AS(validate(c), InvalidArgument);
}

TEST_CASE("resample identity, subset and superset") {
  const PointCloud c = oracle::random_cloud(4, 5);
  const PointCloud same = resample(c, 4, 9);
  for (std::size_t i = 0; i < 4; ++i) CHECK(same.points[i] == c.points[i]);

  const auto original = oracle::multiset(c);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PointCloud sub = resample(c, 2, seed);
    REQUIRE(sub.size() == 2);
    CHECK(sub.points[0] != sub.points[1]);
    for (const auto& [p, n] : oracle::multiset(sub)) CHECK(n <= original.at(p));
    // Survivors keep their relative order.
    std::vector<std::size_t> idx;
    for (const auto& p : sub.points)
      idx.push_back(static_cast<std::size_t>(std::find(c.points.begin(), c.points.end(), p) - c.points.begin()));
    CHECK(idx[0] < idx[1]);

    const PointCloud sup = resample(c, 6, seed);
    REQUIRE(sup.size() == 6);
    const auto counts = oracle::multiset(sup);
    int total = 0;
    for (const auto& [p, n] : original) {
      REQUIRE(counts.count(p));
      CHECK(counts.at(p) >= 1);
    }
    for (const auto& [p, n] : counts) {
      CHECK(original.count(p));
      total += n;
    }
    CHECK(total == 6);
    for (std::size_t i = 0; i < 4; ++i) CHECK(sup.points[i] == c.points[i]);
  }
}

TEST_CASE("resample is deterministic and rejects m = 0") {
  const PointCloud c = oracle::random_cloud(100, 3);
  const PointCloud a = resample(c, 37, 42), b = resample(c, 37, 42);
  CHECK(a.points == b.points);
  CHECK(resample(c, 37, 43).points != a.points);
  CHECK_THROWS_AS(resample(c, 0, 1), InvalidArgument);
}

TEST_CASE("manifest parsing") {
  const DatasetManifest m = parse_manifest("a.xyz,benign,1\nb.xyz,adversarial,1", "root");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].label == Label::benign);
  CHECK(m.entries[1].label == Label::adversarial);
  CHECK(m.entries[0].pair_id == m.entries[1].pair_id);
  CHECK(m.resolve(m.entries[1]) == std::filesystem::path("root") / "b.xyz");

  CHECK_THROWS_AS(parse_manifest("a.xyz,benign,1\nc.xyz,benign,1\n"), DuplicatePair);
  try {
    parse_manifest("# c\na.xyz,foo,1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_manifest("a.xyz,benign\n"), ParseError);

  const DatasetManifest again = parse_manifest(write_manifest(m), "root");
  REQUIRE(again.entries.size() == 2);
  CHECK(again.entries[1].path == m.entries[1].path);
}

TEST_CASE("file round trip and missing file") {
  const auto dir = std::filesystem::temp_directory_path() / "vfd_cloud_io_test";
  std::filesystem::create_directories(dir);
  const PointCloud c = oracle::random_cloud(20, 8);
  write_cloud_file(dir / "c.xyz", c);
  CHECK(read_cloud_file(dir / "c.xyz").points == c.points);
  CHECK_THROWS_AS(read_cloud_file(dir / "missing.xyz"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("format_double and parse_double") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double("2.5") == 2.5);
  CHECK_THROWS_AS(parse_double("2.5x", 4), ParseError);
  CHECK_THROWS_AS(parse_double("", 1), ParseError);
}

}
