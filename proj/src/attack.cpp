#include "vfd/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vfd/errors.hpp"

namespace vfd {

std::string_view to_string(AttackKind kind) noexcept {
  switch (kind) {
    case AttackKind::perturb: return "perturb";
    case AttackKind::add: return "add";
    case AttackKind::remove: return "remove";
  }
  return "?";
}

std::string_view to_string(AttackMode mode) noexcept {
  switch (mode) {
    case AttackMode::gaussian: return "gaussian";
    case AttackMode::cluster: return "cluster";
    case AttackMode::uniform: return "uniform";
    case AttackMode::random: return "random";
    case AttackMode::highcurv: return "highcurv";
  }
  return "?";
}

AttackKind parse_attack_kind(std::string_view s) {
  if (s == "perturb") return AttackKind::perturb;
  if (s == "add") return AttackKind::add;
  if (s == "remove") return AttackKind::remove;
  throw InvalidArgument("unknown attack kind '" + std::string(s) + "' (expected perturb, add or remove)");
}

AttackMode parse_attack_mode(std::string_view s) {
  for (AttackMode m : {AttackMode::gaussian, AttackMode::cluster, AttackMode::uniform, AttackMode::random,
                       AttackMode::highcurv})
    if (s == to_string(m)) return m;
  throw InvalidArgument("unknown attack mode '" + std::string(s) + "'");
}

AttackMode default_mode(AttackKind kind) noexcept {
  switch (kind) {
    case AttackKind::perturb: return AttackMode::gaussian;
    case AttackKind::add: return AttackMode::uniform;
    case AttackKind::remove: return AttackMode::random;
  }
  return AttackMode::gaussian;
}

void validate(const AttackSpec& spec) {
  if (!(spec.magnitude > 0.0) || !std::isfinite(spec.magnitude)) throw InvalidArgument("attack magnitude must be > 0");
  switch (spec.kind) {
    case AttackKind::perturb:
      if (spec.mode != AttackMode::gaussian) throw InvalidArgument("perturb attack supports mode gaussian only");
      break;
    case AttackKind::add:
      if (spec.mode != AttackMode::cluster && spec.mode != AttackMode::uniform)
        throw InvalidArgument("add attack supports modes cluster and uniform");
      break;
    case AttackKind::remove:
      if (spec.mode != AttackMode::random && spec.mode != AttackMode::highcurv)
        throw InvalidArgument("remove attack supports modes random and highcurv");
      break;
  }
  if (spec.kind != AttackKind::perturb && spec.magnitude != std::floor(spec.magnitude))
    throw InvalidArgument("add/remove attack magnitude must be a whole point count");
}

PointCloud perturb_attack(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw InvalidArgument("perturb_attack: sigma must be > 0");
  validate(cloud);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  PointCloud out = cloud;
  for (Point& p : out.points)
    for (int c = 0; c < 3; ++c) p(c) += noise(rng);
  return out;
}

PointCloud add_points_attack(const PointCloud& cloud, std::size_t m, AttackMode mode, std::uint64_t seed) {
  if (m < 1) throw InvalidArgument("add_points_attack: m must be >= 1");
  if (mode != AttackMode::cluster && mode != AttackMode::uniform)
    throw InvalidArgument("add_points_attack: mode must be cluster or uniform");
  validate(cloud);

  Point lo = cloud.points.front(), hi = lo;
  for (const Point& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }

  std::mt19937_64 rng(seed);
  PointCloud out = cloud;
  out.points.reserve(cloud.size() + m);
  if (mode == AttackMode::uniform) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
      Point p;
      for (int c = 0; c < 3; ++c) p(c) = std::clamp(lo(c) + unit(rng) * (hi(c) - lo(c)), lo(c), hi(c));
      out.points.push_back(p);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
    const Point anchor = cloud.points[pick(rng)];
    std::normal_distribution<double> noise(0.0, 0.05 * (hi - lo).norm());
    for (std::size_t i = 0; i < m; ++i) out.points.emplace_back(anchor + Point(noise(rng), noise(rng), noise(rng)));
  }
  return out;
}

PointCloud remove_points_attack(const PointCloud& cloud, std::size_t m, AttackMode mode, std::uint64_t seed,
                                const GeometricFeatures* features) {
  validate(cloud);
  const std::size_t n = cloud.size();
  if (m < 1 || m >= n)
    throw InvalidArgument("remove_points_attack: m=" + std::to_string(m) + " must lie in [1, N-1] for N=" + std::to_string(n));

  std::vector<char> drop(n, 0);
  if (mode == AttackMode::random) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
      drop[idx[i]] = 1;
    }
  } else if (mode == AttackMode::highcurv) {
    if (!features || features->mean_curv.size() != n)
      throw InvalidArgument("remove_points_attack: highcurv mode needs per-point mean curvature for every point");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto& mc = features->mean_curv;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return mc[a] > mc[b]; });
    for (std::size_t i = 0; i < m; ++i) drop[idx[i]] = 1;
  } else {
    throw InvalidArgument("remove_points_attack: mode must be random or highcurv");
  }

  PointCloud out;
  out.name = cloud.name;
  out.points.reserve(n - m);
  for (std::size_t i = 0; i < n; ++i)
    if (!drop[i]) out.points.push_back(cloud.points[i]);
  return out;
}

PointCloud apply_attack(const PointCloud& cloud, const AttackSpec& spec, const RgfParams& params) {
  validate(spec);
  switch (spec.kind) {
    case AttackKind::perturb: return perturb_attack(cloud, spec.magnitude, spec.seed);
    case AttackKind::add:
      return add_points_attack(cloud, static_cast<std::size_t>(spec.magnitude), spec.mode, spec.seed);
    case AttackKind::remove: {
      const auto m = static_cast<std::size_t>(spec.magnitude);
      if (spec.mode != AttackMode::highcurv) return remove_points_attack(cloud, m, spec.mode, spec.seed);
      if (m >= cloud.size())
        throw InvalidArgument("remove_points_attack: m=" + std::to_string(m) + " must lie in [1, N-1] for N=" +
                              std::to_string(cloud.size()));
      GeometricFeatures f;
      f.normals = estimate_normals(cloud, params.kv);
      f.mean_curv.reserve(cloud.size());
      for (const auto& c : principal_curvatures(cloud, f.normals, params.kc))
        f.mean_curv.push_back(curvature_features(c.c1, c.c2).mean);
      return remove_points_attack(cloud, m, spec.mode, spec.seed, &f);
    }
  }
  throw InvalidArgument("unknown attack kind");
}

}  // namespace vfd
