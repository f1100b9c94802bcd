#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "vfd/cloud.hpp"
#include "vfd/params.hpp"
#include "vfd/spectral.hpp"

namespace vfd {

using Normal = Eigen::Vector3d;

/// Per-point descriptors of one cloud.
struct GeometricFeatures {
  std::vector<Normal> normals;
  std::vector<double> gauss_curv;
  std::vector<double> mean_curv;
  std::vector<double> curv_ratio;
  /// Normal voting tensor saliencies at kn, 2kn and 3kn neighbors; each row
  /// holds (l1 - l2, l2 - l3, l3) for eigenvalues l1 >= l2 >= l3.
  std::array<Eigen::MatrixX3d, 3> nvt;

  std::size_t size() const noexcept { return normals.size(); }
};

/// Unit normals from the uncentered scatter of the kv nearest neighbors,
/// taken as the cross product of the two dominant eigenvectors. Each normal
/// is signed so that its largest-magnitude component is positive.
std::vector<Normal> estimate_normals(const PointCloud& cloud, std::size_t kv);
std::vector<Normal> estimate_normals(const PointCloud& cloud, const NeighborLists& neighbors, std::size_t kv);

/// Flips `n` so its largest-magnitude component is positive.
Normal canonical_sign(const Normal& n);

struct PrincipalCurvature {
  double c1 = 0.0;  ///< largest in-plane eigenvalue
  double c2 = 0.0;  ///< second in-plane eigenvalue
};

/// Eigenvalues of the second-moment matrix of neighbor normals projected
/// onto the tangent plane at each point.
std::vector<PrincipalCurvature> principal_curvatures(const PointCloud& cloud, const std::vector<Normal>& normals,
                                                     std::size_t kc);
std::vector<PrincipalCurvature> principal_curvatures(const std::vector<Normal>& normals,
                                                     const NeighborLists& neighbors, std::size_t kc);

struct CurvatureFeatures {
  double gauss = 0.0;
  double mean = 0.0;
  double ratio = 0.0;
};

CurvatureFeatures curvature_features(double c1, double c2);

/// Normal voting tensor saliency triples over the kn nearest spatial
/// neighbors of every point. See the source for the weighting details.
Eigen::MatrixX3d nvt_features(const PointCloud& cloud, const std::vector<Normal>& normals, std::size_t kn);
Eigen::MatrixX3d nvt_features(const std::vector<Normal>& normals, const NeighborLists& neighbors, std::size_t kn);

/// Normals (kv), curvature features (kc) and NVT saliencies at kn, 2kn, 3kn.
GeometricFeatures extract_geometric(const PointCloud& cloud, const RgfParams& params);

}  // namespace vfd
