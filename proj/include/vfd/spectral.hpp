#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vfd/cloud.hpp"

namespace vfd {

using NeighborLists = std::vector<std::vector<std::size_t>>;

/// The k nearest points of every point by Euclidean distance, excluding the
/// point itself. Each list is ordered by ascending distance, ties broken by
/// ascending index, so the lists for k are prefixes of the lists for k' > k.
NeighborLists knn_indices(const PointCloud& cloud, std::size_t k);

/// KNN graph with Gaussian edge weights.
struct NeighborGraph {
  /// Symmetrized support: j is listed for i iff j is among the kg nearest
  /// of i or i among the kg nearest of j. Ascending index order.
  NeighborLists neighbors;
  /// Symmetric N x N weights, zero diagonal.
  Eigen::SparseMatrix<double> weights;
  /// Bandwidth: mean squared edge length over the symmetrized support.
  double alpha = 0.0;
};

/// A + 1/2 abs(A - A^T - abs(A - A^T)), which is the elementwise max of A and
/// A^T. Evaluated in branch form so that the result is exact in floating point.
Eigen::MatrixXd symmetrize_adjacency(const Eigen::MatrixXd& a);

/// Unsymmetrized dense weights: A_ij = exp(-|p_i - p_j|^2 / (2 alpha)) for j
/// in the KNN list of i, 0 otherwise.
Eigen::MatrixXd directed_adjacency(const PointCloud& cloud, const NeighborLists& knn, double alpha);

NeighborGraph build_adjacency(const PointCloud& cloud, std::size_t kg);

/// I - D^-1/2 A D^-1/2 with D the row sums of A.
Eigen::MatrixXd normalized_laplacian(const NeighborGraph& graph);

/// Eigenpairs in ascending eigenvalue order; eigenvectors are the columns.
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  /// Index (0-based, ascending order) of the first pair held. Zero for a full basis.
  Eigen::Index first = 0;
};

/// Full eigendecomposition of a symmetric matrix.
SpectralBasis eig_sym(const Eigen::MatrixXd& m);

/// Eigenpairs `first .. first + count - 1` of the ascending spectrum.
SpectralBasis eig_sym_range(const Eigen::MatrixXd& m, Eigen::Index first, Eigen::Index count);

/// Projects each coordinate column onto the span of the first t eigenvectors
/// of a full basis: P' = Q_t Q_t^T P.
PointCloud gft_smooth(const PointCloud& cloud, const SpectralBasis& basis, std::size_t t);

/// Low-pass reference cloud from the KNN(kg) graph Laplacian, keeping the t
/// lowest graph frequencies. Only the smaller side of the spectrum split is
/// computed: for t > N/2 this evaluates P - Q_h Q_h^T P over the N - t highest
/// eigenvectors, which equals the full-basis projection.
PointCloud low_pass_reference(const PointCloud& cloud, std::size_t kg, std::size_t t);

/// Centers on the centroid, rotates onto the principal axes (descending
/// variance, each axis signed so its largest-magnitude component is positive),
/// scales the largest extent to 1 and centers the bounding box at 0.5.
PointCloud pca_unit_cube(const PointCloud& cloud);

}  // namespace vfd
