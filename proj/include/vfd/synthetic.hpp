#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "vfd/cloud.hpp"

namespace vfd::synth {

/// nx * ny grid on the plane z = 0 with the given spacing.
PointCloud plane_grid(std::size_t nx, std::size_t ny, double spacing = 1.0);

/// n iid uniform points on the unit sphere.
PointCloud unit_sphere(std::size_t n, std::uint64_t seed);

/// n evenly spread points on the unit sphere (golden-angle spiral).
PointCloud fibonacci_sphere(std::size_t n);

/// Open cylinder wall of the given radius and height along z, area-uniform.
PointCloud cylinder_wall(std::size_t n, double radius, double height, std::uint64_t seed);

enum class Shape { sphere, cylinder, box, torus };

std::string_view to_string(Shape s) noexcept;

/// Area-uniform samples of a closed surface with randomized proportions and a
/// random orientation, scaled so the farthest point from the centroid is at
/// distance 1.
PointCloud sample_shape(Shape shape, std::size_t n, std::uint64_t seed);

/// `count` shapes cycling through sphere, cylinder, box, torus.
std::vector<PointCloud> shape_collection(std::size_t count, std::size_t n, std::uint64_t seed);

}  // namespace vfd::synth
