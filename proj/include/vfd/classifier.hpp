#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "vfd/cloud.hpp"
#include "vfd/params.hpp"

namespace vfd {

/// One Fisher linear discriminant restricted to a feature subspace. The
/// positive class ("adversarial") lies on the side where
/// polarity * (w . x_sub - threshold) > 0.
struct FldBase {
  std::vector<std::size_t> subspace;
  std::vector<double> weights;
  double threshold = 0.0;
  int polarity = 1;

  double decision(std::span<const double> x) const;
  bool votes_positive(std::span<const double> x) const { return decision(x) > 0.0; }
};

/// Fisher discriminant on the columns listed in `subspace`. Samples are rows.
/// w = (S_w + gamma I)^-1 (mu_pos - mu_neg), threshold at the midpoint of the
/// projected class means, gamma = 1e-6 trace(S_w) / d_sub.
FldBase train_fld(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg, std::vector<std::size_t> subspace);

/// Single discriminant over every feature (the LD baseline).
FldBase train_ld(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg);

struct FldeConfig {
  /// Candidate subspace sizes; empty means 5, 10, ..., plus the full dimension.
  std::vector<std::size_t> d_sub_grid;
  std::size_t l_max = 500;
  std::uint64_t seed = 1;
  std::size_t min_learners = 51;
  std::size_t stall_window = 25;
  double stall_tolerance = 0.005;
};

std::vector<std::size_t> default_d_sub_grid(std::size_t feature_dim);

struct FldeModel {
  std::vector<FldBase> learners;
  std::size_t d_sub = 0;
  std::size_t feature_dim = 0;
  std::uint64_t seed = 0;
  double oob_error = 0.0;
  std::optional<RgfParams> params;  ///< extraction settings the model was trained for
};

/// Random-subspace ensemble of bootstrap-trained discriminants. For each
/// candidate d_sub, learners are added until l_max or until the out-of-bag
/// error moved by less than stall_tolerance over the last stall_window
/// learners (after min_learners). The candidate with the lowest OOB error wins.
FldeModel train_flde(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg, const FldeConfig& config);

struct Prediction {
  double score = 0.0;  ///< fraction of learners voting adversarial
  Label label = Label::benign;
};

/// Majority vote; ties go to benign.
Prediction predict(const FldeModel& model, std::span<const double> x);

inline constexpr int kModelVersion = 1;

std::string save_model(const FldeModel& model);
FldeModel load_model(std::string_view text);

}  // namespace vfd
