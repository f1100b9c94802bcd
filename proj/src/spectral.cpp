#include "vfd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <Eigen/Eigenvalues>
#include <lapack.h>

#include "vfd/errors.hpp"

namespace vfd {

namespace {

// Eigenpairs il..iu (1-based, inclusive) of the symmetric matrix m via dsyevr.
SpectralBasis lapack_syevr(const Eigen::MatrixXd& m, lapack_int il, lapack_int iu) {
  const lapack_int n = static_cast<lapack_int>(m.rows());
  const bool all = (il == 1 && iu == n);
  const char jobz = 'V', range = all ? 'A' : 'I', uplo = 'L';
  const double vl = 0.0, vu = 0.0, abstol = 0.0;

  Eigen::MatrixXd a = m;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, iu - il + 1);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(std::max<lapack_int>(1, iu - il + 1)));
  lapack_int found = 0, info = 0;

  lapack_int lwork = -1, liwork = -1, iwork_query = 0;
  double work_query = 0.0;
  LAPACK_dsyevr(&jobz, &range, &uplo, &n, a.data(), &n, &vl, &vu, &il, &iu, &abstol, &found, w.data(),
                z.data(), &n, isuppz.data(), &work_query, &lwork, &iwork_query, &liwork, &info);
  if (info != 0) throw Error("dsyevr workspace query failed, info=" + std::to_string(info));

  lwork = static_cast<lapack_int>(work_query);
  liwork = iwork_query;
  std::vector<double> work(static_cast<std::size_t>(lwork));
  std::vector<lapack_int> iwork(static_cast<std::size_t>(liwork));
  LAPACK_dsyevr(&jobz, &range, &uplo, &n, a.data(), &n, &vl, &vu, &il, &iu, &abstol, &found, w.data(),
                z.data(), &n, isuppz.data(), work.data(), &lwork, iwork.data(), &liwork, &info);
  if (info != 0) throw Error("dsyevr failed, info=" + std::to_string(info));
  if (found != iu - il + 1) throw Error("dsyevr returned " + std::to_string(found) + " eigenpairs");

  SpectralBasis basis;
  basis.eigenvalues = w.head(found);
  basis.eigenvectors = std::move(z);
  basis.first = il - 1;
  return basis;
}

void require_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("eig_sym: matrix is not square");
  if (m.rows() == 0) throw InvalidArgument("eig_sym: empty matrix");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym < 1e-10)) throw InvalidArgument("eig_sym: matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
}

}  // namespace

NeighborLists knn_indices(const PointCloud& cloud, std::size_t k) {
  const std::size_t n = cloud.size();
  if (k < 1 || k >= n)
    throw InvalidArgument("knn_indices: k=" + std::to_string(k) + " must lie in [1, N-1] for N=" + std::to_string(n));

  NeighborLists out(n);
  std::vector<std::pair<double, std::size_t>> cand(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[c++] = {(cloud.points[i] - cloud.points[j]).squaredNorm(), j};
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    out[i].resize(k);
    for (std::size_t r = 0; r < k; ++r) out[i][r] = cand[r].second;
  }
  return out;
}

Eigen::MatrixXd symmetrize_adjacency(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("symmetrize_adjacency: matrix is not square");
  Eigen::MatrixXd out = a;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double d = a(i, j) - a(j, i);
      // 1/2 |d - |d|| is 0 for d >= 0 and |d| for d < 0, i.e. A + that term
      // selects A^T exactly where A^T is larger.
      const double correction = 0.5 * std::abs(d - std::abs(d));
      if (correction > 0.0) out(i, j) = a(j, i);
    }
  }
  return out;
}

Eigen::MatrixXd directed_adjacency(const PointCloud& cloud, const NeighborLists& knn, double alpha) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < knn.size(); ++i)
    for (std::size_t j : knn[i])
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::exp(-(cloud.points[i] - cloud.points[j]).squaredNorm() / (2.0 * alpha));
  return a;
}

NeighborGraph build_adjacency(const PointCloud& cloud, std::size_t kg) {
  validate(cloud);
  const std::size_t n = cloud.size();
  const NeighborLists knn = knn_indices(cloud, kg);

  // The support of A does not depend on alpha, so symmetrize the support
  // first and only then average squared lengths over it.
  NeighborGraph g;
  g.neighbors.assign(n, {});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : knn[i]) {
      g.neighbors[i].push_back(j);
      g.neighbors[j].push_back(i);
    }
  double sum_sq = 0.0;
  std::size_t edges = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& nb = g.neighbors[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    for (std::size_t j : nb) sum_sq += (cloud.points[i] - cloud.points[j]).squaredNorm();
    edges += nb.size();
  }
  g.alpha = sum_sq / static_cast<double>(edges);
  if (!(g.alpha > 0.0)) throw DegenerateGeometry("build_adjacency: all neighbor distances are zero (alpha = 0)");

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : g.neighbors[i]) {
      const double w = std::exp(-(cloud.points[i] - cloud.points[j]).squaredNorm() / (2.0 * g.alpha));
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
    }
  g.weights.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  g.weights.setFromTriplets(triplets.begin(), triplets.end());
  g.weights.makeCompressed();
  return g;
}

Eigen::MatrixXd normalized_laplacian(const NeighborGraph& graph) {
  const Eigen::Index n = graph.weights.rows();
  Eigen::VectorXd inv_sqrt_deg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double deg = graph.weights.row(i).sum();
    if (!(deg > 0.0)) throw DegenerateGeometry("normalized_laplacian: node " + std::to_string(i) + " has zero degree");
    inv_sqrt_deg(i) = 1.0 / std::sqrt(deg);
  }

  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index col = 0; col < graph.weights.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(graph.weights, col); it; ++it)
      if (it.row() != it.col()) l(it.row(), it.col()) = -it.value() * inv_sqrt_deg(it.row()) * inv_sqrt_deg(it.col());

  l = 0.5 * (l + l.transpose());
  return l;
}

SpectralBasis eig_sym(const Eigen::MatrixXd& m) {
  require_symmetric(m);
  return lapack_syevr(m, 1, static_cast<lapack_int>(m.rows()));
}

SpectralBasis eig_sym_range(const Eigen::MatrixXd& m, Eigen::Index first, Eigen::Index count) {
  require_symmetric(m);
  if (count < 1 || first < 0 || first + count > m.rows())
    throw InvalidArgument("eig_sym_range: requested pairs outside [0, N)");
  return lapack_syevr(m, static_cast<lapack_int>(first + 1), static_cast<lapack_int>(first + count));
}

PointCloud gft_smooth(const PointCloud& cloud, const SpectralBasis& basis, std::size_t t) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  if (basis.first != 0 || basis.eigenvectors.rows() != n || basis.eigenvectors.cols() != n)
    throw InvalidArgument("gft_smooth: basis must be a full N x N eigenbasis of the cloud's graph");
  if (t < 1 || t > cloud.size())
    throw InvalidArgument("gft_smooth: t=" + std::to_string(t) + " must lie in [1, N]");

  const auto qt = basis.eigenvectors.leftCols(static_cast<Eigen::Index>(t));
  const Eigen::MatrixX3d p = to_matrix(cloud);
  const Eigen::MatrixX3d smoothed = qt * (qt.transpose() * p);
  return from_matrix(smoothed, cloud.name);
}

PointCloud low_pass_reference(const PointCloud& cloud, std::size_t kg, std::size_t t) {
  const std::size_t n = cloud.size();
  if (t < 1 || t > n) throw InvalidArgument("low_pass_reference: t=" + std::to_string(t) + " must lie in [1, N]");
  const Eigen::MatrixX3d p = to_matrix(cloud);
  if (t == n) return cloud;

  const Eigen::MatrixXd lap = normalized_laplacian(build_adjacency(cloud, kg));
  const auto nn = static_cast<Eigen::Index>(n);
  const auto tt = static_cast<Eigen::Index>(t);
  Eigen::MatrixX3d smoothed;
  if (tt <= nn - tt) {
    const SpectralBasis low = eig_sym_range(lap, 0, tt);
    smoothed = low.eigenvectors * (low.eigenvectors.transpose() * p);
  } else {
    const SpectralBasis high = eig_sym_range(lap, tt, nn - tt);
    smoothed = p - high.eigenvectors * (high.eigenvectors.transpose() * p);
  }
  return from_matrix(smoothed, cloud.name);
}

PointCloud pca_unit_cube(const PointCloud& cloud) {
  validate(cloud);
  if (cloud.size() < 2) throw DegenerateGeometry("pca_unit_cube: need at least 2 points");

  const Eigen::MatrixX3d p = to_matrix(cloud);
  const Eigen::RowVector3d centroid = p.colwise().mean();
  const Eigen::MatrixX3d centered = p.rowwise() - centroid;
  const Eigen::Matrix3d cov = (centered.transpose() * centered) / static_cast<double>(p.rows());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  if (es.info() != Eigen::Success) throw Error("pca_unit_cube: covariance eigensolver failed");
  Eigen::Matrix3d axes = es.eigenvectors().rowwise().reverse();  // descending variance
  for (int c = 0; c < 3; ++c) {
    Eigen::Index big = 0;
    axes.col(c).cwiseAbs().maxCoeff(&big);
    if (axes(big, c) < 0.0) axes.col(c) = -axes.col(c);
  }

  Eigen::MatrixX3d y = centered * axes;
  const Eigen::RowVector3d lo = y.colwise().minCoeff();
  const Eigen::RowVector3d extent = y.colwise().maxCoeff() - lo;
  const double scale = extent.maxCoeff();
  const double magnitude = std::max(1.0, p.cwiseAbs().maxCoeff());
  if (!(scale > 1e-12 * magnitude)) throw DegenerateGeometry("pca_unit_cube: cloud has zero extent");

  for (int c = 0; c < 3; ++c) {
    const double offset = 0.5 * (1.0 - extent(c) / scale);
    y.col(c) = ((y.col(c).array() - lo(c)) / scale + offset).cwiseMax(0.0).cwiseMin(1.0);
  }
  return from_matrix(y, cloud.name);
}

}  // namespace vfd
