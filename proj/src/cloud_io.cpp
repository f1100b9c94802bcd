#include "vfd/cloud.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "vfd/errors.hpp"

namespace vfd {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Iterates lines, yielding (1-based line number, content without the newline).
class LineReader {
public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++number_;
    return true;
  }

  // Next line that is neither blank nor a '#' comment.
  bool next_content(std::string_view& line) {
    while (next(line)) {
      std::string_view t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      line = t;
      return true;
    }
    return false;
  }

  std::size_t number() const noexcept { return number_; }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

std::size_t parse_count(std::string_view token, std::size_t line) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError(line, "expected a non-negative integer, got '" + std::string(token) + "'");
  return value;
}

Point parse_xyz_tokens(const std::vector<std::string_view>& tok, std::size_t line) {
  Point p(parse_double(tok[0], line), parse_double(tok[1], line), parse_double(tok[2], line));
  if (!p.allFinite()) throw ParseError(line, "non-finite coordinate");
  return p;
}

PointCloud parse_xyz(std::string_view text) {
  PointCloud cloud;
  LineReader reader(text);
  std::string_view line;
  while (reader.next_content(line)) {
    auto tok = split_ws(line);
    if (tok.size() != 3)
      throw ParseError(reader.number(), "expected 3 coordinates, got " + std::to_string(tok.size()));
    cloud.points.push_back(parse_xyz_tokens(tok, reader.number()));
  }
  return cloud;
}

PointCloud parse_off(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next_content(line) || line.substr(0, 3) != "OFF")
    throw ParseError(reader.number(), "missing OFF header");

  // Some ModelNet files glue the counts onto the magic line ("OFF490 518 0").
  std::string_view rest = trim(line.substr(3));
  if (rest.empty()) {
    if (!reader.next_content(line)) throw ParseError(reader.number(), "missing OFF counts line");
    rest = line;
  }
  auto counts = split_ws(rest);
  if (counts.size() < 2 || counts.size() > 3)
    throw ParseError(reader.number(), "OFF counts line must hold 'vertices faces [edges]'");
  const std::size_t nv = parse_count(counts[0], reader.number());

  PointCloud cloud;
  cloud.points.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!reader.next_content(line))
      throw ParseError(reader.number(), "file ends after " + std::to_string(i) + " of " +
                                            std::to_string(nv) + " vertices");
    auto tok = split_ws(line);
    if (tok.size() != 3)
      throw ParseError(reader.number(), "expected 3 vertex coordinates, got " + std::to_string(tok.size()));
    cloud.points.push_back(parse_xyz_tokens(tok, reader.number()));
  }
  return cloud;
}

PointCloud parse_ply(std::string_view text) {
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
    bool has_list = false;
  };

  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line) || trim(line) != "ply") throw ParseError(reader.number(), "missing 'ply' magic line");

  std::vector<Element> elements;
  bool ascii = false;
  bool header_done = false;
  while (reader.next(line)) {
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") throw ParseError(reader.number(), "only ascii PLY is supported");
      ascii = true;
    } else if (tok[0] == "comment" || tok[0] == "obj_info") {
      continue;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError(reader.number(), "malformed element line");
      elements.push_back({std::string(tok[1]), parse_count(tok[2], reader.number()), {}, false});
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError(reader.number(), "property before any element");
      if (tok.size() >= 2 && tok[1] == "list") {
        elements.back().has_list = true;
      } else if (tok.size() != 3) {
        throw ParseError(reader.number(), "malformed property line");
      }
      elements.back().properties.emplace_back(tok.back());
    } else if (tok[0] == "end_header") {
      header_done = true;
      break;
    } else {
      throw ParseError(reader.number(), "unknown PLY header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!ascii) throw ParseError(reader.number(), "missing 'format ascii' line");
  if (!header_done) throw ParseError(reader.number(), "missing end_header");

  auto vertex = std::find_if(elements.begin(), elements.end(), [](const Element& e) { return e.name == "vertex"; });
  if (vertex == elements.end()) throw ParseError(0, "PLY header declares no vertex element");
  if (vertex->has_list) throw ParseError(0, "list properties on vertex element are not supported");

  auto index_of = [&](const char* axis) {
    auto it = std::find(vertex->properties.begin(), vertex->properties.end(), axis);
    if (it == vertex->properties.end())
      throw ParseError(0, std::string("vertex element lacks property '") + axis + "'");
    return static_cast<std::size_t>(it - vertex->properties.begin());
  };
  const std::size_t ix = index_of("x"), iy = index_of("y"), iz = index_of("z");

  PointCloud cloud;
  for (const Element& e : elements) {
    const bool is_vertex = (&e == &*vertex);
    if (is_vertex) cloud.points.reserve(e.count);
    for (std::size_t i = 0; i < e.count; ++i) {
      if (!reader.next(line)) throw ParseError(reader.number(), "file ends inside element '" + e.name + "'");
      if (!is_vertex) continue;
      auto tok = split_ws(line);
      if (tok.size() != e.properties.size())
        throw ParseError(reader.number(), "expected " + std::to_string(e.properties.size()) +
                                              " vertex values, got " + std::to_string(tok.size()));
      Point p(parse_double(tok[ix], reader.number()), parse_double(tok[iy], reader.number()),
              parse_double(tok[iz], reader.number()));
      if (!p.allFinite()) throw ParseError(reader.number(), "non-finite coordinate");
      cloud.points.push_back(p);
    }
    if (is_vertex) break;
  }
  return cloud;
}

}  // namespace

Eigen::MatrixX3d to_matrix(const PointCloud& cloud) {
  Eigen::MatrixX3d m(static_cast<Eigen::Index>(cloud.size()), 3);
  for (std::size_t i = 0; i < cloud.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = cloud.points[i].transpose();
  return m;
}

PointCloud from_matrix(const Eigen::MatrixX3d& m, std::string name) {
  PointCloud cloud;
  cloud.name = std::move(name);
  cloud.points.resize(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) cloud.points[static_cast<std::size_t>(i)] = m.row(i).transpose();
  return cloud;
}

void validate(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyCloud("point cloud has no points");
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (!cloud.points[i].allFinite()) throw InvalidArgument("point " + std::to_string(i) + " has a non-finite coordinate");
}

CloudFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return CloudFormat::off;
  if (ext == ".ply") return CloudFormat::ply_ascii;
  if (ext == ".xyz" || ext == ".txt" || ext == ".pts") return CloudFormat::xyz;
  throw InvalidArgument("unsupported point cloud extension '" + path.extension().string() + "' in " + path.string());
}

PointCloud parse_cloud(std::string_view text, CloudFormat format) {
  PointCloud cloud;
  switch (format) {
    case CloudFormat::xyz: cloud = parse_xyz(text); break;
    case CloudFormat::off: cloud = parse_off(text); break;
    case CloudFormat::ply_ascii: cloud = parse_ply(text); break;
  }
  if (cloud.empty()) throw EmptyCloud("point cloud has no points");
  return cloud;
}

std::string write_cloud(const PointCloud& cloud, CloudFormat format) {
  if (format != CloudFormat::xyz) throw InvalidArgument("only xyz output is supported");
  std::string out;
  out.reserve(cloud.size() * 48);
  for (const Point& p : cloud.points) {
    out += format_double(p.x());
    out += ' ';
    out += format_double(p.y());
    out += ' ';
    out += format_double(p.z());
    out += '\n';
  }
  return out;
}

PointCloud read_cloud_file(const std::filesystem::path& path) {
  PointCloud cloud;
  try {
    cloud = parse_cloud(read_text_file(path), format_from_extension(path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  } catch (const EmptyCloud&) {
    throw EmptyCloud(path.string() + ": point cloud has no points");
  }
  cloud.name = path.string();
  return cloud;
}

void write_cloud_file(const std::filesystem::path& path, const PointCloud& cloud) {
  write_text_file(path, write_cloud(cloud));
}

PointCloud resample(const PointCloud& cloud, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw InvalidArgument("resample: target count must be >= 1");
  validate(cloud);
  const std::size_t n = cloud.size();
  if (m == n) return cloud;

  std::mt19937_64 rng(seed);
  PointCloud out;
  out.name = cloud.name;
  if (m < n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    out.points.reserve(m);
    for (std::size_t i : idx) out.points.push_back(cloud.points[i]);
  } else {
    // Duplicates are drawn without replacement, one shuffled pass at a time,
    // so multiplicities differ by at most one and no point piles up copies.
    out.points = cloud.points;
    out.points.reserve(m);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (out.points.size() < m) {
      std::shuffle(idx.begin(), idx.end(), rng);
      const std::size_t take = std::min(n, m - out.points.size());
      for (std::size_t i = 0; i < take; ++i) out.points.push_back(cloud.points[idx[i]]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Label label) noexcept {
  return label == Label::benign ? "benign" : "adversarial";
}

Label parse_label(std::string_view token) {
  if (token == "benign") return Label::benign;
  if (token == "adversarial") return Label::adversarial;
  throw ParseError(0, "unknown label '" + std::string(token) + "' (expected benign or adversarial)");
}

DatasetManifest parse_manifest(std::string_view text, std::filesystem::path root) {
  DatasetManifest manifest;
  manifest.root = std::move(root);
  std::set<std::pair<Label, std::string>> seen;
  LineReader reader(text);
  std::string_view line;
  while (reader.next_content(line)) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 3)
      throw ParseError(reader.number(), "expected '<path>,<label>,<pair-id>', got " + std::to_string(fields.size()) + " fields");
    if (fields[0].empty()) throw ParseError(reader.number(), "empty path");
    if (fields[2].empty()) throw ParseError(reader.number(), "empty pair-id");

    ManifestEntry entry;
    entry.path = std::string(fields[0]);
    try {
      entry.label = parse_label(fields[1]);
    } catch (const ParseError& e) {
      throw ParseError(reader.number(), e.what());
    }
    entry.pair_id = std::string(fields[2]);
    if (!seen.emplace(entry.label, entry.pair_id).second)
      throw DuplicatePair("line " + std::to_string(reader.number()) + ": duplicate (" +
                          std::string(to_string(entry.label)) + ", " + entry.pair_id + ")");
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path());
}

std::string write_manifest(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    out += e.path.generic_string();
    out += ',';
    out += to_string(e.label);
    out += ',';
    out += e.pair_id;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view token, std::size_t line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
    throw ParseError(line, "invalid number '" + std::string(token) + "'");
  return v;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace vfd
