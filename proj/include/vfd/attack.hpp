#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "vfd/cloud.hpp"
#include "vfd/geometry.hpp"
#include "vfd/params.hpp"

namespace vfd {

// Synthetic stand-ins for point perturbation, point adding and point removal
// attacks. They label data at desk scale; real adversarial clouds can be fed
// through manifests instead.

enum class AttackKind { perturb, add, remove };
enum class AttackMode { gaussian, cluster, uniform, random, highcurv };

struct AttackSpec {
  AttackKind kind = AttackKind::perturb;
  double magnitude = 0.02;  ///< sigma for perturb, point count for add/remove
  AttackMode mode = AttackMode::gaussian;
  std::uint64_t seed = 0;
};

std::string_view to_string(AttackKind kind) noexcept;
std::string_view to_string(AttackMode mode) noexcept;
AttackKind parse_attack_kind(std::string_view s);
AttackMode parse_attack_mode(std::string_view s);
AttackMode default_mode(AttackKind kind) noexcept;

/// Throws InvalidArgument for a non-positive magnitude, a fractional count or
/// a mode that does not belong to the kind.
void validate(const AttackSpec& spec);

/// iid N(0, sigma^2) added to every coordinate.
PointCloud perturb_attack(const PointCloud& cloud, double sigma, std::uint64_t seed);

/// Appends m points: uniform in the bounding box, or Gaussian with sigma = 5%
/// of the bounding-box diagonal around one uniformly chosen anchor point.
PointCloud add_points_attack(const PointCloud& cloud, std::size_t m, AttackMode mode, std::uint64_t seed);

/// Drops m points: a uniform random subset, or the m points of largest mean
/// curvature (ties by index) for highcurv, which requires `features`.
PointCloud remove_points_attack(const PointCloud& cloud, std::size_t m, AttackMode mode, std::uint64_t seed,
                                const GeometricFeatures* features = nullptr);

/// Dispatches on spec.kind. For highcurv removal the curvature is estimated
/// on the cloud itself with `params` (kv, kc).
PointCloud apply_attack(const PointCloud& cloud, const AttackSpec& spec, const RgfParams& params = {});

}  // namespace vfd
