#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace vfd {

/// Hyperparameters of the residual-geometric-feature pipeline.
struct RgfParams {
  std::size_t t_offset = 20;  ///< low-pass size is t = N - t_offset
  std::size_t kg = 3;         ///< KNN size of the smoothing graph
  std::size_t kv = 3;         ///< KNN size for normal estimation
  std::size_t kc = 3;         ///< KNN size for curvature estimation
  std::size_t kn = 3;         ///< base KNN size of the normal voting tensor (also 2kn, 3kn)
  double log_epsilon = 1e-10;
  double moment_epsilon = 1e-12;

  bool operator==(const RgfParams&) const = default;
};

/// Tuned settings for the three attack families: (N-20,3,3,3,3) for point
/// perturbation, (N-20,6,3,3,3) for point adding, (N-20,5,5,5,4) for point removal.
RgfParams preset_params(std::string_view attack_family);

/// Throws InvalidArgument when a field is out of its domain regardless of N.
void validate(const RgfParams& params);

/// Throws InvalidArgument when the parameters cannot run on an N-point cloud.
void validate_for_size(const RgfParams& params, std::size_t n);

std::string describe(const RgfParams& params);

}  // namespace vfd
