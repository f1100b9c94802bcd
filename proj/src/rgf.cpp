#include "vfd/rgf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Geometry>

#include "vfd/errors.hpp"
#include "vfd/spectral.hpp"

namespace vfd {

// ---------------------------------------------------------------------------
// Parameters

RgfParams preset_params(std::string_view attack_family) {
  RgfParams p;
  p.t_offset = 20;
  if (attack_family == "perturb") {
    p.kg = 3, p.kv = 3, p.kc = 3, p.kn = 3;
  } else if (attack_family == "add") {
    p.kg = 6, p.kv = 3, p.kc = 3, p.kn = 3;
  } else if (attack_family == "remove") {
    p.kg = 5, p.kv = 5, p.kc = 5, p.kn = 4;
  } else {
    throw InvalidArgument("unknown parameter preset '" + std::string(attack_family) +
                          "' (expected perturb, add or remove)");
  }
  return p;
}

void validate(const RgfParams& p) {
  if (p.t_offset < 1) throw InvalidArgument("t_offset must be >= 1 (t < N)");
  if (p.kg < 1) throw InvalidArgument("kg must be >= 1");
  if (p.kv < 2) throw InvalidArgument("kv must be >= 2");
  if (p.kc < 2) throw InvalidArgument("kc must be >= 2");
  if (p.kn < 1) throw InvalidArgument("kn must be >= 1");
  if (!(p.log_epsilon > 0.0) || !std::isfinite(p.log_epsilon)) throw InvalidArgument("log_epsilon must be positive");
  if (!(p.moment_epsilon > 0.0) || !std::isfinite(p.moment_epsilon))
    throw InvalidArgument("moment_epsilon must be positive");
}

void validate_for_size(const RgfParams& p, std::size_t n) {
  validate(p);
  const std::string ns = " for a cloud of N=" + std::to_string(n);
  if (p.t_offset >= n) throw InvalidArgument("t_offset=" + std::to_string(p.t_offset) + " leaves t < 1" + ns);
  if (p.kg >= n) throw InvalidArgument("kg=" + std::to_string(p.kg) + " must be <= N-1" + ns);
  if (p.kv >= n) throw InvalidArgument("kv=" + std::to_string(p.kv) + " must be <= N-1" + ns);
  if (p.kc >= n) throw InvalidArgument("kc=" + std::to_string(p.kc) + " must be <= N-1" + ns);
  if (3 * p.kn >= n) throw InvalidArgument("3*kn=" + std::to_string(3 * p.kn) + " must be <= N-1" + ns);
}

std::string describe(const RgfParams& p) {
  return "(N-" + std::to_string(p.t_offset) + ", " + std::to_string(p.kg) + ", " + std::to_string(p.kv) + ", " +
         std::to_string(p.kc) + ", " + std::to_string(p.kn) + ")";
}

// ---------------------------------------------------------------------------
// Calibration and statistics

CalibratedFeatures calibrate(const GeometricFeatures& feat, const GeometricFeatures& ref) {
  const std::size_t n = feat.size();
  if (ref.size() != n) throw InvalidArgument("calibrate: feature sets differ in size");
  for (const auto* f : {&feat, &ref}) {
    if (f->gauss_curv.size() != n || f->mean_curv.size() != n || f->curv_ratio.size() != n)
      throw InvalidArgument("calibrate: inconsistent curvature feature lengths");
    for (const auto& block : f->nvt)
      if (static_cast<std::size_t>(block.rows()) != n) throw InvalidArgument("calibrate: inconsistent NVT block size");
  }

  CalibratedFeatures out;
  out.phi.resize(static_cast<Eigen::Index>(n), kResidualColumns);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    // arccos(|cos|) evaluated as atan2(|sin|, |cos|): exact 0 for identical
    // normals and well conditioned for small angles.
    const Normal& a = feat.normals[i];
    const Normal& b = ref.normals[i];
    out.phi(r, 0) = std::atan2(a.cross(b).norm(), std::abs(a.dot(b)));
    out.phi(r, 1) = std::abs(feat.gauss_curv[i] - ref.gauss_curv[i]);
    out.phi(r, 2) = std::abs(feat.mean_curv[i] - ref.mean_curv[i]);
    out.phi(r, 3) = std::abs(feat.curv_ratio[i] - ref.curv_ratio[i]);
    for (int s = 0; s < 3; ++s)
      for (int c = 0; c < 3; ++c) out.phi(r, 4 + 3 * s + c) = std::abs(feat.nvt[s](r, c) - ref.nvt[s](r, c));
  }
  return out;
}

FeatureVector nonlinear_map(const CalibratedFeatures& calibrated, double log_epsilon, double moment_epsilon) {
  const auto& phi = calibrated.phi;
  if (phi.rows() < 1) throw InvalidArgument("nonlinear_map: empty residual matrix");
  const double n = static_cast<double>(phi.rows());

  FeatureVector out{};
  for (Eigen::Index j = 0; j < phi.cols(); ++j) {
    // Scalar std::log: Eigen's packet log and its scalar tail can differ by an ulp.
    const Eigen::ArrayXd x = phi.col(j).array().unaryExpr([&](double v) { return std::log(v + log_epsilon); });
    const auto base = static_cast<std::size_t>(j) * kStatsPerColumn;
    if (x.minCoeff() == x.maxCoeff()) {
      // Constant column: summation would leave rounding noise in mean and variance.
      out[base + 0] = out[base + 1] = out[base + 2] = x(0);
      continue;
    }
    const double mean = x.sum() / n;
    const Eigen::ArrayXd d = x - mean;
    const double m2 = d.square().sum() / n;
    const double m3 = d.cube().sum() / n;
    const double m4 = d.square().square().sum() / n;
    const double sd = std::sqrt(m2);

    out[base + 0] = x.minCoeff();
    out[base + 1] = x.maxCoeff();
    out[base + 2] = mean;
    out[base + 3] = m2;
    out[base + 4] = sd < moment_epsilon ? 0.0 : m3 / (sd * sd * sd);
    out[base + 5] = sd < moment_epsilon ? 0.0 : m4 / (m2 * m2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

// Lexicographic point order. Every stage downstream is order-covariant, so
// running on the sorted cloud makes the feature vector independent of the
// input order bit for bit.
std::vector<std::size_t> canonical_order(const PointCloud& cloud) {
  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Point& p = cloud.points[a];
    const Point& q = cloud.points[b];
    if (p.x() != q.x()) return p.x() < q.x();
    if (p.y() != q.y()) return p.y() < q.y();
    return p.z() < q.z();
  });
  return order;
}

PointCloud permuted(const PointCloud& cloud, const std::vector<std::size_t>& order) {
  PointCloud out;
  out.name = cloud.name;
  out.points.reserve(order.size());
  for (std::size_t i : order) out.points.push_back(cloud.points[i]);
  return out;
}

RgfResult map_pair(const PointCloud& cloud, const PointCloud& reference, const RgfParams& params) {
  const GeometricFeatures feat = extract_geometric(pca_unit_cube(cloud), params);
  const GeometricFeatures ref = extract_geometric(pca_unit_cube(reference), params);
  RgfResult result;
  result.calibrated = calibrate(feat, ref);
  result.features = nonlinear_map(result.calibrated, params.log_epsilon, params.moment_epsilon);
  return result;
}

}  // namespace

RgfResult rgf_pipeline_detailed(const PointCloud& cloud, const RgfParams& params) {
  validate(cloud);
  validate_for_size(params, cloud.size());

  const std::vector<std::size_t> order = canonical_order(cloud);
  const PointCloud sorted = permuted(cloud, order);
  const PointCloud reference = low_pass_reference(sorted, params.kg, sorted.size() - params.t_offset);
  RgfResult sorted_result = map_pair(sorted, reference, params);

  RgfResult result;
  result.features = sorted_result.features;
  result.calibrated.phi.resize(sorted_result.calibrated.phi.rows(), kResidualColumns);
  for (std::size_t r = 0; r < order.size(); ++r)
    result.calibrated.phi.row(static_cast<Eigen::Index>(order[r])) =
        sorted_result.calibrated.phi.row(static_cast<Eigen::Index>(r));
  return result;
}

FeatureVector rgf_pipeline(const PointCloud& cloud, const RgfParams& params) {
  return rgf_pipeline_detailed(cloud, params).features;
}

RgfResult rgf_against_reference(const PointCloud& cloud, const PointCloud& reference, const RgfParams& params) {
  validate(cloud);
  validate(reference);
  if (cloud.size() != reference.size()) throw InvalidArgument("rgf_against_reference: clouds differ in size");
  validate(params);
  return map_pair(cloud, reference, params);
}

// ---------------------------------------------------------------------------
// Feature CSV

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_fields(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_header() {
  std::string h;
  for (std::size_t i = 0; i < kFeatureDim; ++i) h += "f" + std::to_string(i) + ",";
  return h + "label,source,pair_id";
}

}  // namespace

std::string write_feature_csv(const std::vector<FeatureRow>& rows) {
  std::string out = csv_header() + "\n";
  for (const auto& row : rows) {
    for (double v : row.features) {
      out += format_double(v);
      out += ',';
    }
    out += to_string(row.label);
    out += ',';
    out += csv_quote(row.source);
    out += ',';
    out += csv_quote(row.pair_id);
    out += '\n';
  }
  return out;
}

std::vector<FeatureRow> parse_feature_csv(std::string_view text) {
  std::vector<FeatureRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line.substr(0, 3) != "f0,") throw ParseError(line_no, "missing feature CSV header");
      header_seen = true;
      continue;
    }
    auto fields = csv_fields(line, line_no);
    if (fields.size() != kFeatureDim + 3)
      throw ParseError(line_no, "expected " + std::to_string(kFeatureDim + 3) + " fields, got " +
                                    std::to_string(fields.size()));
    FeatureRow row;
    for (std::size_t i = 0; i < kFeatureDim; ++i) row.features[i] = parse_double(fields[i], line_no);
    try {
      row.label = parse_label(fields[kFeatureDim]);
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
    row.source = fields[kFeatureDim + 1];
    row.pair_id = fields[kFeatureDim + 2];
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError(0, "empty feature CSV");
  return rows;
}

}  // namespace vfd
