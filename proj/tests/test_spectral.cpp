#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "vfd/errors.hpp"
#include "vfd/spectral.hpp"

using namespace vfd;

namespace {

PointCloud cloud_of(std::initializer_list<Point> pts) {
  PointCloud c;
  c.points.assign(pts.begin(), pts.end());
  return c;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("knn on hand geometry") {
  const PointCloud line = cloud_of({{0, 0, 0}, {1, 0, 0}, {3, 0, 0}});
  const NeighborLists nn = knn_indices(line, 1);
  CHECK(nn[0] == std::vector<std::size_t>{1});
  CHECK(nn[1] == std::vector<std::size_t>{0});
  CHECK(nn[2] == std::vector<std::size_t>{1});

  const PointCloud square = cloud_of({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}});
  const NeighborLists sq = knn_indices(square, 2);
  const NeighborLists ref = oracle::knn(square, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(sq[i] == ref[i]);
    const std::size_t a = (i + 1) % 4, b = (i + 3) % 4;
    CHECK(std::is_permutation(sq[i].begin(), sq[i].end(), std::vector<std::size_t>{a, b}.begin()));
  }

  CHECK_THROWS_AS(knn_indices(oracle::random_cloud(5, 1), 5), InvalidArgument);
  CHECK_THROWS_AS(knn_indices(oracle::random_cloud(5, 1), 0), InvalidArgument);
}

TEST_CASE("knn matches the brute-force oracle and prefixes nest") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PointCloud c = oracle::random_cloud(60, seed);
    const NeighborLists a = knn_indices(c, 12);
    CHECK(a == oracle::knn(c, 12));
    const NeighborLists b = knn_indices(c, 4);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::equal(b[i].begin(), b[i].end(), a[i].begin()));
  }
  // Exact ties resolve by index.
  const PointCloud grid = cloud_of({{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}});
  CHECK(knn_indices(grid, 4)[0] == std::vector<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("symmetrization equals the elementwise max exactly") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> ex(-30, 30);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd a(50, 50);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = std::ldexp(u(rng), ex(rng)) * (trial % 3 == 0 ? -1.0 : 1.0);
    const Eigen::MatrixXd s = symmetrize_adjacency(a);
    CHECK((s.array() == oracle::elementwise_max(a).array()).all());
  }
}

TEST_CASE("two-point graph") {
  const double d = 0.37;
  const NeighborGraph g = build_adjacency(cloud_of({{0, 0, 0}, {d, 0, 0}}), 1);
  CHECK(g.alpha == doctest::Approx(d * d).epsilon(1e-15));
  const Eigen::MatrixXd a(g.weights);
  CHECK(a(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(a(0, 1) == a(1, 0));
  CHECK(a(0, 0) == 0.0);

  const Eigen::MatrixXd l = normalized_laplacian(g);
  CHECK(max_abs(l - (Eigen::Matrix2d() << 1, -1, -1, 1).finished()) < 1e-15);
  const SpectralBasis b = eig_sym(l);
  CHECK(b.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(b.eigenvalues(1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("equilateral triangle with kg = 2 gets all three edges") {
  const double s = 2.0;
  const PointCloud tri = cloud_of({{0, 0, 0}, {s, 0, 0}, {s / 2, s * std::sqrt(3.0) / 2, 0}});
  const NeighborGraph g = build_adjacency(tri, 2);
  const Eigen::MatrixXd a(g.weights);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(a(i, j) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("adjacency invariants and the max identity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PointCloud c = oracle::random_cloud(80, 100 + seed);
    const std::size_t kg = 2 + seed % 5;
    const NeighborGraph g = build_adjacency(c, kg);
    const Eigen::MatrixXd a(g.weights);

    CHECK((a.array() == a.transpose().array()).all());
    CHECK(a.diagonal().isZero(0.0));
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(g.neighbors[i].size() >= kg);
      for (std::size_t j : g.neighbors[i]) {
        const double w = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        CHECK(w > 0.0);
        CHECK(w < 1.0);
      }
    }

    // Bandwidth from its definition over the symmetrized support.
    const NeighborLists knn = oracle::knn(c, kg);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) {
        const bool edge = std::find(knn[i].begin(), knn[i].end(), j) != knn[i].end() ||
                          std::find(knn[j].begin(), knn[j].end(), i) != knn[j].end();
        if (edge) sum += (c.points[i] - c.points[j]).squaredNorm(), ++count;
      }
    CHECK(g.alpha == doctest::Approx(sum / static_cast<double>(count)).epsilon(1e-12));

    const Eigen::MatrixXd a0 = directed_adjacency(c, knn, g.alpha);
    CHECK(max_abs(a - oracle::elementwise_max(a0)) == 0.0);
  }
}

TEST_CASE("coincident points are degenerate") {
  PointCloud c;
  for (int i = 0; i < 10; ++i) c.points.emplace_back(1, 2, 3);
  CHECK_THROWS_AS(build_adjacency(c, 3), DegenerateGeometry);
  CHECK_THROWS_AS(pca_unit_cube(c), DegenerateGeometry);
}

TEST_CASE("normalized Laplacian spectrum") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PointCloud c = oracle::random_cloud(60, 300 + seed);
    const NeighborGraph g = build_adjacency(c, 3 + seed % 4);
    const Eigen::MatrixXd l = normalized_laplacian(g);
    CHECK(max_abs(l - oracle::normalized_laplacian(Eigen::MatrixXd(g.weights))) < 1e-14);
    CHECK((l.diagonal().array() == 1.0).all());

    const SpectralBasis b = eig_sym(l);
    CHECK(b.eigenvalues.minCoeff() >= -1e-8);
    CHECK(b.eigenvalues.maxCoeff() <= 2.0 + 1e-8);
    for (Eigen::Index i = 1; i < b.eigenvalues.size(); ++i) CHECK(b.eigenvalues(i) >= b.eigenvalues(i - 1));
    CHECK(std::abs(b.eigenvalues(0)) < 1e-8);

    // Lowest eigenvector of a connected graph is D^1/2 1 up to sign.
    Eigen::VectorXd root_deg = Eigen::MatrixXd(g.weights).rowwise().sum().cwiseSqrt();
    root_deg.normalize();
    if (b.eigenvalues(1) > 1e-6) CHECK(std::abs(std::abs(root_deg.dot(b.eigenvectors.col(0))) - 1.0) < 1e-8);
  }
}

TEST_CASE("eig_sym on small matrices") {
  const SpectralBasis id = eig_sym(Eigen::MatrixXd::Identity(4, 4));
  CHECK((id.eigenvalues.array() - 1.0).abs().maxCoeff() < 1e-15);

  const Eigen::MatrixXd d = Eigen::Vector3d(3, 1, 2).asDiagonal();
  const SpectralBasis b = eig_sym(d);
  CHECK(b.eigenvalues(0) == doctest::Approx(1));
  CHECK(b.eigenvalues(1) == doctest::Approx(2));
  CHECK(b.eigenvalues(2) == doctest::Approx(3));
  CHECK(std::abs(b.eigenvectors(1, 0)) == doctest::Approx(1));
  CHECK(std::abs(b.eigenvectors(2, 1)) == doctest::Approx(1));
  CHECK(std::abs(b.eigenvectors(0, 2)) == doctest::Approx(1));

  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
  asym(0, 1) = 1e-6;
  CHECK_THROWS_AS(eig_sym(asym), InvalidArgument);
}

TEST_CASE("eig_sym reconstruction and partial solves") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(50, 50);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = g(rng);
  m = (m + m.transpose()).eval();

  const SpectralBasis b = eig_sym(m);
  const Eigen::MatrixXd q = b.eigenvectors;
  CHECK(max_abs(q.transpose() * q - Eigen::MatrixXd::Identity(50, 50)) < 1e-8);
  CHECK(max_abs(q * b.eigenvalues.asDiagonal() * q.transpose() - m) < 1e-8 * max_abs(m));

  const SpectralBasis top = eig_sym_range(m, 40, 10);
  CHECK(top.first == 40);
  REQUIRE(top.eigenvalues.size() == 10);
  for (Eigen::Index i = 0; i < 10; ++i) {
    CHECK(top.eigenvalues(i) == doctest::Approx(b.eigenvalues(40 + i)).epsilon(1e-10));
    CHECK(std::abs(std::abs(top.eigenvectors.col(i).dot(q.col(40 + i))) - 1.0) < 1e-8);
  }
  CHECK_THROWS_AS(eig_sym_range(m, 45, 10), InvalidArgument);
}

TEST_CASE("gft_smooth is an orthogonal projection") {
  const PointCloud c = oracle::random_cloud(70, 9);
  const NeighborGraph g = build_adjacency(c, 4);
  const SpectralBasis b = eig_sym(normalized_laplacian(g));
  const Eigen::MatrixX3d p = to_matrix(c);

  CHECK(max_abs(to_matrix(gft_smooth(c, b, c.size())) - p) < 1e-8);

  for (std::size_t t : {1, 5, 35, 69}) {
    const PointCloud s = gft_smooth(c, b, t);
    REQUIRE(s.size() == c.size());
    CHECK(max_abs(to_matrix(gft_smooth(s, b, t)) - to_matrix(s)) < 1e-8);
    for (int k = 0; k < 3; ++k) CHECK(to_matrix(s).col(k).norm() <= p.col(k).norm() + 1e-12);
  }

  // t = 1 projects each coordinate onto D^1/2 1.
  Eigen::VectorXd u = Eigen::MatrixXd(g.weights).rowwise().sum().cwiseSqrt();
  u.normalize();
  const Eigen::MatrixX3d expect = u * (u.transpose() * p);
  CHECK(max_abs(to_matrix(gft_smooth(c, b, 1)) - expect) < 1e-10);

  CHECK_THROWS_AS(gft_smooth(c, b, 0), InvalidArgument);
  CHECK_THROWS_AS(gft_smooth(c, b, c.size() + 1), InvalidArgument);
}

TEST_CASE("low_pass_reference agrees with the full-basis projection") {
  const PointCloud c = oracle::random_cloud(90, 21);
  const SpectralBasis b = eig_sym(normalized_laplacian(build_adjacency(c, 3)));
  for (std::size_t t : {1, 20, 44, 45, 46, 70, 89}) {
    const PointCloud fast = low_pass_reference(c, 3, t);
    CHECK(max_abs(to_matrix(fast) - to_matrix(gft_smooth(c, b, t))) < 1e-9);
  }
}

TEST_CASE("pca_unit_cube postconditions") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PointCloud c = oracle::random_cloud(200, 40 + seed, 3.0);
    for (auto& p : c.points) p += Point(5, -2, 1);
    const Eigen::MatrixX3d y = to_matrix(pca_unit_cube(c));
    CHECK(y.minCoeff() >= 0.0);
    CHECK(y.maxCoeff() <= 1.0);
    const Eigen::RowVector3d lo = y.colwise().minCoeff(), hi = y.colwise().maxCoeff();
    CHECK(((lo + hi) / 2 - Eigen::RowVector3d::Constant(0.5)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((hi - lo).maxCoeff() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("pca_unit_cube puts the elongation on the first axis") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  PointCloud c;
  const Point dir = Point(1, 1, 0).normalized();
  for (int i = 0; i < 500; ++i) c.points.push_back(5.0 * g(rng) * dir + 0.3 * Point(g(rng), g(rng), g(rng)));
  const Eigen::MatrixX3d y = to_matrix(pca_unit_cube(c));
  const Eigen::RowVector3d var = (y.rowwise() - y.colwise().mean()).colwise().squaredNorm();
  CHECK(var(0) > 10 * var(1));
  CHECK(var(0) > 10 * var(2));
}

TEST_CASE("pca_unit_cube is rotation invariant up to axis reflection") {
  // The axis sign convention is tied to the input frame, so a rotation can
  // reflect individual output axes about 0.5; the shape itself is fixed.
  PointCloud c = oracle::random_cloud(300, 77);
  for (auto& p : c.points) p = Point(3.0 * p.x(), 2.0 * p.y(), p.z());
  const Eigen::MatrixX3d y0 = to_matrix(pca_unit_cube(c));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::Matrix3d r = oracle::random_rotation(seed);
    PointCloud rc = c;
    for (auto& p : rc.points) p = r * p + Point(1, 2, 3);
    const Eigen::MatrixX3d y = to_matrix(pca_unit_cube(rc));
    for (int k = 0; k < 3; ++k) {
      const double same = (y.col(k) - y0.col(k)).cwiseAbs().maxCoeff();
      const double flipped = (y.col(k) - (1.0 - y0.col(k).array()).matrix()).cwiseAbs().maxCoeff();
      CHECK(std::min(same, flipped) < 1e-9);
    }
  }
}

}
