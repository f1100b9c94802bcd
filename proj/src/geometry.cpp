#include "vfd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "vfd/errors.hpp"

namespace vfd {

namespace {

void require_neighbors(const NeighborLists& neighbors, std::size_t n, std::size_t k, const char* who) {
  if (neighbors.size() != n) throw InvalidArgument(std::string(who) + ": neighbor table size mismatch");
  for (const auto& nb : neighbors)
    if (nb.size() < k) throw InvalidArgument(std::string(who) + ": neighbor lists shorter than k=" + std::to_string(k));
}

void require_k(std::size_t k, std::size_t lo, std::size_t n, const char* who) {
  if (k < lo || k >= n)
    throw InvalidArgument(std::string(who) + ": k=" + std::to_string(k) + " must lie in [" + std::to_string(lo) +
                          ", N-1] for N=" + std::to_string(n));
}

Eigen::Vector3d sym_eigenvalues(const Eigen::Matrix3d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();  // ascending
}

}  // namespace

Normal canonical_sign(const Normal& n) {
  Eigen::Index big = 0;
  n.cwiseAbs().maxCoeff(&big);
  return n(big) < 0.0 ? Normal(-n) : n;
}

std::vector<Normal> estimate_normals(const PointCloud& cloud, std::size_t kv) {
  require_k(kv, 2, cloud.size(), "estimate_normals");
  return estimate_normals(cloud, knn_indices(cloud, kv), kv);
}

std::vector<Normal> estimate_normals(const PointCloud& cloud, const NeighborLists& neighbors, std::size_t kv) {
  require_k(kv, 2, cloud.size(), "estimate_normals");
  require_neighbors(neighbors, cloud.size(), kv, "estimate_normals");

  std::vector<Normal> normals(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (std::size_t r = 0; r < kv; ++r) {
      const Eigen::Vector3d d = cloud.points[neighbors[i][r]] - cloud.points[i];
      scatter.noalias() += d * d.transpose();
    }
    if (scatter.isZero(0.0))
      throw DegenerateGeometry("estimate_normals: all neighbors of point " + std::to_string(i) + " coincide with it");

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
    const Eigen::Vector3d& lambda = es.eigenvalues();
    const Eigen::Matrix3d& v = es.eigenvectors();
    Normal n;
    if (lambda(1) <= 1e-12 * lambda(2)) {
      // Collinear neighborhood: the dominant pair is not a plane.
      n = v.col(0);
    } else {
      n = v.col(2).cross(v.col(1));
    }
    normals[i] = canonical_sign(n.normalized());
  }
  return normals;
}

std::vector<PrincipalCurvature> principal_curvatures(const PointCloud& cloud, const std::vector<Normal>& normals,
                                                     std::size_t kc) {
  require_k(kc, 2, cloud.size(), "principal_curvatures");
  return principal_curvatures(normals, knn_indices(cloud, kc), kc);
}

std::vector<PrincipalCurvature> principal_curvatures(const std::vector<Normal>& normals,
                                                     const NeighborLists& neighbors, std::size_t kc) {
  require_k(kc, 2, normals.size(), "principal_curvatures");
  require_neighbors(neighbors, normals.size(), kc, "principal_curvatures");

  std::vector<PrincipalCurvature> out(normals.size());
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - normals[i] * normals[i].transpose();
    Eigen::Matrix3d moment = Eigen::Matrix3d::Zero();
    for (std::size_t r = 0; r < kc; ++r) {
      const Eigen::Vector3d np = proj * normals[neighbors[i][r]];
      moment.noalias() += np * np.transpose();
    }
    // The eigenvalue along n_i is annihilated by the projection; the
    // principal pair is the two in-plane eigenvalues.
    const Eigen::Vector3d lambda = sym_eigenvalues(moment);
    out[i].c1 = std::max(lambda(2), 0.0);
    out[i].c2 = std::max(lambda(1), 0.0);
  }
  return out;
}

CurvatureFeatures curvature_features(double c1, double c2) {
  CurvatureFeatures f;
  f.gauss = c1 * c2;
  f.mean = 0.5 * (c1 + c2);
  const double hi = std::max(std::abs(c1), std::abs(c2));
  const double lo = std::min(std::abs(c1), std::abs(c2));
  f.ratio = hi < 1e-12 ? 0.0 : lo / hi;
  return f;
}

Eigen::MatrixX3d nvt_features(const PointCloud& cloud, const std::vector<Normal>& normals, std::size_t kn) {
  require_k(kn, 1, cloud.size(), "nvt_features");
  return nvt_features(normals, knn_indices(cloud, kn), kn);
}

// T_i = sum_j mu_ij n_j n_j^T over the kn spatial neighbors of p_i, with
// mu_ij = exp(-d_ij / (2 beta_i)) and beta_i the mean of d_ij over the
// neighborhood. d_ij is the squared distance between n_i and n_j after
// orienting n_j towards n_i, so the weights do not depend on the arbitrary
// per-point normal sign. beta_i ~ 0 (all normals parallel) gives mu = 1.
Eigen::MatrixX3d nvt_features(const std::vector<Normal>& normals, const NeighborLists& neighbors, std::size_t kn) {
  require_k(kn, 1, normals.size(), "nvt_features");
  require_neighbors(neighbors, normals.size(), kn, "nvt_features");

  Eigen::MatrixX3d out(static_cast<Eigen::Index>(normals.size()), 3);
  std::vector<double> dist(kn);
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const Normal& ni = normals[i];
    double beta = 0.0;
    for (std::size_t r = 0; r < kn; ++r) {
      const Normal& nj = normals[neighbors[i][r]];
      dist[r] = std::min((ni - nj).squaredNorm(), (ni + nj).squaredNorm());
      beta += dist[r];
    }
    beta /= static_cast<double>(kn);

    Eigen::Matrix3d tensor = Eigen::Matrix3d::Zero();
    for (std::size_t r = 0; r < kn; ++r) {
      const Normal& nj = normals[neighbors[i][r]];
      const double mu = beta < 1e-12 ? 1.0 : std::exp(-dist[r] / (2.0 * beta));
      tensor.noalias() += mu * (nj * nj.transpose());
    }
    const Eigen::Vector3d lambda = sym_eigenvalues(tensor);
    const auto row = static_cast<Eigen::Index>(i);
    out(row, 0) = lambda(2) - lambda(1);
    out(row, 1) = lambda(1) - lambda(0);
    out(row, 2) = std::max(lambda(0), 0.0);
  }
  return out;
}

GeometricFeatures extract_geometric(const PointCloud& cloud, const RgfParams& params) {
  validate(cloud);
  const std::size_t n = cloud.size();
  require_k(params.kv, 2, n, "extract_geometric (kv)");
  require_k(params.kc, 2, n, "extract_geometric (kc)");
  if (params.kn < 1 || 3 * params.kn >= n)
    throw InvalidArgument("extract_geometric: 3*kn=" + std::to_string(3 * params.kn) + " must be below N=" +
                          std::to_string(n));

  const std::size_t kmax = std::max({params.kv, params.kc, 3 * params.kn});
  const NeighborLists neighbors = knn_indices(cloud, kmax);

  GeometricFeatures f;
  f.normals = estimate_normals(cloud, neighbors, params.kv);
  const auto curv = principal_curvatures(f.normals, neighbors, params.kc);
  f.gauss_curv.resize(n);
  f.mean_curv.resize(n);
  f.curv_ratio.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CurvatureFeatures c = curvature_features(curv[i].c1, curv[i].c2);
    f.gauss_curv[i] = c.gauss;
    f.mean_curv[i] = c.mean;
    f.curv_ratio[i] = c.ratio;
  }
  for (std::size_t s = 0; s < 3; ++s) f.nvt[s] = nvt_features(f.normals, neighbors, (s + 1) * params.kn);
  return f;
}

}  // namespace vfd
