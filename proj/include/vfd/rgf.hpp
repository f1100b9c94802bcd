#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "vfd/cloud.hpp"
#include "vfd/geometry.hpp"
#include "vfd/params.hpp"

namespace vfd {

inline constexpr std::size_t kResidualColumns = 13;
inline constexpr std::size_t kStatsPerColumn = 6;
inline constexpr std::size_t kFeatureDim = kResidualColumns * kStatsPerColumn;  // 78

using FeatureVector = std::array<double, kFeatureDim>;

/// N x 13 residual matrix. Column order:
///   0 normal angle, 1 gaussian curvature, 2 mean curvature, 3 curvature ratio,
///   4-6 NVT at kn, 7-9 NVT at 2kn, 10-12 NVT at 3kn.
struct CalibratedFeatures {
  Eigen::Matrix<double, Eigen::Dynamic, static_cast<int>(kResidualColumns)> phi;
};

/// Residuals of `feat` against the reference `ref`: the folded angle
/// arccos(|n . n'|) for normals, absolute differences for everything else.
CalibratedFeatures calibrate(const GeometricFeatures& feat, const GeometricFeatures& ref);

/// ln(phi + log_epsilon), then per column [min, max, mean, variance, skewness,
/// kurtosis] into slots 6j..6j+5. Population moments, non-excess kurtosis;
/// skewness and kurtosis are 0 for columns whose standard deviation is below
/// moment_epsilon.
FeatureVector nonlinear_map(const CalibratedFeatures& calibrated, double log_epsilon = 1e-10,
                            double moment_epsilon = 1e-12);

struct RgfResult {
  FeatureVector features{};
  CalibratedFeatures calibrated;  ///< rows in input point order
};

/// Cloud -> 78-dimensional residual geometric feature vector.
FeatureVector rgf_pipeline(const PointCloud& cloud, const RgfParams& params);
RgfResult rgf_pipeline_detailed(const PointCloud& cloud, const RgfParams& params);

/// The pipeline after the smoothing stage, with a caller-supplied reference
/// cloud standing in for the low-pass counterpart. Both clouds must have the
/// same size and point order.
RgfResult rgf_against_reference(const PointCloud& cloud, const PointCloud& reference, const RgfParams& params);

// ---------------------------------------------------------------------------
// Feature CSV: header `f0,...,f77,label,source,pair_id`, one row per cloud.

struct FeatureRow {
  FeatureVector features{};
  Label label = Label::benign;
  std::string source;
  std::string pair_id;
  std::size_t point_count = 0;  ///< size of the cloud the row was extracted from; not persisted
};

std::string write_feature_csv(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> parse_feature_csv(std::string_view text);

}  // namespace vfd
