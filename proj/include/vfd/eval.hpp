#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vfd/attack.hpp"
#include "vfd/classifier.hpp"
#include "vfd/cloud.hpp"
#include "vfd/params.hpp"
#include "vfd/rgf.hpp"

namespace vfd {

/// Labeled feature rows; benign/adversarial counterparts share a pair_id.
using LabeledSet = std::vector<FeatureRow>;

struct PairFailure {
  std::size_t index = 0;
  std::string source;
  std::string message;
};

struct PairSet {
  LabeledSet rows;
  std::vector<PairFailure> failures;  ///< pairs skipped because extraction failed
};

/// For each benign cloud: attack it, resample the benign cloud to the
/// adversarial point count when they differ, extract features from both and
/// emit two rows sharing a pair id. Failed pairs are skipped and reported;
/// more than 10% failures raise an Error.
PairSet make_pairs(const std::vector<PointCloud>& benign, const AttackSpec& attack, const RgfParams& params,
                   std::uint64_t seed, std::size_t threads = 1);

/// Row indices of each side. Pairs are never split across sides.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Shuffles the distinct pair ids with `seed` and sends round(f * pairs)
/// (at least one, at most pairs - 1) of them to the test side.
SplitIndices split(const LabeledSet& set, double test_fraction, std::uint64_t seed);

double accuracy(const std::vector<Label>& predictions, const std::vector<Label>& labels);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  ///< (fpr, tpr), from (0,0) to (1,1)
  double auc = 0.0;
};

/// Threshold sweep over distinct scores in descending order, tied scores in
/// a single step; adversarial is the positive class. Trapezoidal AUC.
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<Label>& labels);

enum class ClassifierKind { flde, ld };

struct ExperimentConfig {
  double test_fraction = 0.1;
  std::uint64_t split_seed = 1;
  ClassifierKind classifier = ClassifierKind::flde;
  FldeConfig flde;
};

struct EvalReport {
  double accuracy = 0.0;
  RocCurve roc;
  double train_seconds = 0.0;
  double extract_seconds_per_cloud = 0.0;
  RgfParams params;
  nlohmann::json classifier_meta;
  SplitIndices split;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

/// Splits by pair, trains on the training rows only and scores the test rows.
EvalReport evaluate(const LabeledSet& set, const ExperimentConfig& config);

/// Class matrices (adversarial rows, benign rows) over the given row indices.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> class_matrices(const LabeledSet& set,
                                                           const std::vector<std::size_t>& rows);

nlohmann::json to_json(const EvalReport& report);
std::string roc_csv(const RocCurve& roc);

// ---------------------------------------------------------------------------
// Greedy parameter search

struct ParamGrids {
  std::vector<std::size_t> t_offset, kg, kv, kc, kn;
};

struct SearchStep {
  std::size_t sweep = 0;  ///< 0..4 for t, kg, kv, kc, kn
  RgfParams params;
  double accuracy = 0.0;
};

struct SearchResult {
  RgfParams best;
  std::vector<SearchStep> trace;
};

inline constexpr const char* kSweepOrder[5] = {"t_offset", "kg", "kv", "kc", "kn"};

/// Sweeps t -> kg -> kv -> kc -> kn. Each sweep holds earlier winners fixed
/// and later parameters at `init`, scores every candidate with `score`, and
/// keeps the best (ties go to the smaller value).
SearchResult greedy_search(const RgfParams& init, const ParamGrids& grids,
                           const std::function<double(const RgfParams&)>& score);

/// greedy_search scored by test accuracy of make_pairs + evaluate with fixed seeds.
SearchResult greedy_param_search(const std::vector<PointCloud>& benign, const AttackSpec& attack,
                                 const RgfParams& init, const ParamGrids& grids, std::uint64_t seed,
                                 const ExperimentConfig& config, std::size_t threads = 1);

nlohmann::json to_json(const SearchResult& result);

// ---------------------------------------------------------------------------
// Timing

struct TimingReport {
  double mean_seconds = 0.0;
  std::vector<double> per_cloud;
};

/// Wall-clock time of rgf_pipeline per cloud, run sequentially on the calling thread.
TimingReport bench_timing(const std::vector<PointCloud>& clouds, const RgfParams& params);

}  // namespace vfd
