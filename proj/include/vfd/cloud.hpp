#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace vfd {

using Point = Eigen::Vector3d;

/// Ordered list of 3D points. Order is significant and preserved by all I/O.
struct PointCloud {
  std::vector<Point> points;
  std::string name;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// N x 3 copy of the coordinates, one point per row.
Eigen::MatrixX3d to_matrix(const PointCloud& cloud);
PointCloud from_matrix(const Eigen::MatrixX3d& m, std::string name = {});

/// Throws InvalidArgument unless N >= 1 and every coordinate is finite.
void validate(const PointCloud& cloud);

enum class CloudFormat { xyz, off, ply_ascii };

CloudFormat format_from_extension(const std::filesystem::path& path);

PointCloud parse_cloud(std::string_view text, CloudFormat format);

/// Writes `x y z\n` per point using the shortest decimal form that reads
/// back to the identical double.
std::string write_cloud(const PointCloud& cloud, CloudFormat format = CloudFormat::xyz);

PointCloud read_cloud_file(const std::filesystem::path& path);
void write_cloud_file(const std::filesystem::path& path, const PointCloud& cloud);

/// Resamples to exactly `m` points.
///   m == N: unchanged.
///   m <  N: uniform random m-subset without replacement, original order kept.
///   m >  N: all N points followed by (m - N) uniformly drawn duplicates.
PointCloud resample(const PointCloud& cloud, std::size_t m, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Dataset manifests

enum class Label { benign, adversarial };

std::string_view to_string(Label label) noexcept;
Label parse_label(std::string_view token);

struct ManifestEntry {
  std::filesystem::path path;  // relative to the manifest root
  Label label = Label::benign;
  std::string pair_id;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path root;

  std::filesystem::path resolve(const ManifestEntry& e) const { return root / e.path; }
};

/// Parses `<relative-path>,<label>,<pair-id>` records. Blank lines and lines
/// starting with '#' are skipped.
DatasetManifest parse_manifest(std::string_view text, std::filesystem::path root = {});
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string write_manifest(const DatasetManifest& manifest);

// ---------------------------------------------------------------------------
// Shared text helpers

/// Shortest round-trip decimal representation of `v`.
std::string format_double(double v);
/// Strict parse of a complete token; throws ParseError(line) on failure.
double parse_double(std::string_view token, std::size_t line = 0);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace vfd
