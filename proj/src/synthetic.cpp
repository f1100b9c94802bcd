#include "vfd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "vfd/errors.hpp"
#include "vfd/seed.hpp"

namespace vfd::synth {

namespace {

constexpr double kPi = std::numbers::pi;

Point random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Point p(g(rng), g(rng), g(rng));
    const double n = p.norm();
    if (n > 1e-12) return p / n;
  }
}

void normalize_unit_ball(PointCloud& cloud) {
  Point c = Point::Zero();
  for (const Point& p : cloud.points) c += p;
  c /= static_cast<double>(cloud.size());
  double r = 0.0;
  for (Point& p : cloud.points) {
    p -= c;
    r = std::max(r, p.norm());
  }
  for (Point& p : cloud.points) p /= r;
}

void closed_cylinder(PointCloud& out, std::size_t n, double radius, double height, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double side = 2.0 * kPi * radius * height;
  const double cap = kPi * radius * radius;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(rng) * (side + 2.0 * cap);
    const double theta = 2.0 * kPi * u(rng);
    if (a < side) {
      out.points.emplace_back(radius * std::cos(theta), radius * std::sin(theta), height * (u(rng) - 0.5));
    } else {
      const double r = radius * std::sqrt(u(rng));
      const double z = a < side + cap ? 0.5 * height : -0.5 * height;
      out.points.emplace_back(r * std::cos(theta), r * std::sin(theta), z);
    }
  }
}

void box_surface(PointCloud& out, std::size_t n, const Point& dims, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double areas[3] = {dims.y() * dims.z(), dims.x() * dims.z(), dims.x() * dims.y()};
  const double total = areas[0] + areas[1] + areas[2];
  for (std::size_t i = 0; i < n; ++i) {
    double a = u(rng) * total;
    int axis = 0;
    while (axis < 2 && a >= areas[axis]) a -= areas[axis++];
    Point p(dims.x() * (u(rng) - 0.5), dims.y() * (u(rng) - 0.5), dims.z() * (u(rng) - 0.5));
    p(axis) = (u(rng) < 0.5 ? -0.5 : 0.5) * dims(axis);
    out.points.push_back(p);
  }
}

void torus_surface(PointCloud& out, std::size_t n, double major, double minor, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Rejection on the tube angle gives area-uniform samples.
  while (out.points.size() < n) {
    const double theta = 2.0 * kPi * u(rng);
    const double phi = 2.0 * kPi * u(rng);
    const double w = (major + minor * std::cos(theta)) / (major + minor);
    if (u(rng) > w) continue;
    const double ring = major + minor * std::cos(theta);
    out.points.emplace_back(ring * std::cos(phi), ring * std::sin(phi), minor * std::sin(theta));
  }
}

}  // namespace

PointCloud plane_grid(std::size_t nx, std::size_t ny, double spacing) {
  PointCloud cloud;
  cloud.name = "plane";
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      cloud.points.emplace_back(spacing * static_cast<double>(i), spacing * static_cast<double>(j), 0.0);
  return cloud;
}

PointCloud unit_sphere(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PointCloud cloud;
  cloud.name = "sphere";
  for (std::size_t i = 0; i < n; ++i) cloud.points.push_back(random_direction(rng));
  return cloud;
}

PointCloud fibonacci_sphere(std::size_t n) {
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  PointCloud cloud;
  cloud.name = "fibonacci_sphere";
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    cloud.points.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return cloud;
}

PointCloud cylinder_wall(std::size_t n, double radius, double height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud cloud;
  cloud.name = "cylinder_wall";
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = 2.0 * kPi * u(rng);
    cloud.points.emplace_back(radius * std::cos(theta), radius * std::sin(theta), height * (u(rng) - 0.5));
  }
  return cloud;
}

std::string_view to_string(Shape s) noexcept {
  switch (s) {
    case Shape::sphere: return "sphere";
    case Shape::cylinder: return "cylinder";
    case Shape::box: return "box";
    case Shape::torus: return "torus";
  }
  return "?";
}

PointCloud sample_shape(Shape shape, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample_shape: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud cloud;
  cloud.points.reserve(n);
  switch (shape) {
    case Shape::sphere:
      for (std::size_t i = 0; i < n; ++i) cloud.points.push_back(random_direction(rng));
      break;
    case Shape::cylinder:
      closed_cylinder(cloud, n, 0.3 + 0.4 * u(rng), 0.8 + 1.2 * u(rng), rng);
      break;
    case Shape::box:
      box_surface(cloud, n, Point(0.4 + 0.8 * u(rng), 0.4 + 0.8 * u(rng), 0.4 + 0.8 * u(rng)), rng);
      break;
    case Shape::torus:
      torus_surface(cloud, n, 1.0, 0.2 + 0.3 * u(rng), rng);
      break;
  }

  // Normalized Gaussian quaternion: uniform over rotations.
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond rot(g(rng), g(rng), g(rng), g(rng));
  rot.normalize();
  const Eigen::Matrix3d r = rot.toRotationMatrix();
  for (Point& p : cloud.points) p = r * p;

  normalize_unit_ball(cloud);
  cloud.name = std::string(to_string(shape));
  return cloud;
}

std::vector<PointCloud> shape_collection(std::size_t count, std::size_t n, std::uint64_t seed) {
  static constexpr Shape kCycle[] = {Shape::sphere, Shape::cylinder, Shape::box, Shape::torus};
  std::vector<PointCloud> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    PointCloud c = sample_shape(kCycle[i % 4], n, derive_seed(seed, {i}));
    c.name += "_" + std::to_string(i);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace vfd::synth
