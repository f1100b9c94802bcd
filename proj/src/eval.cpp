#include "vfd/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>

#include "vfd/errors.hpp"
#include "vfd/parallel.hpp"
#include "vfd/params_json.hpp"
#include "vfd/seed.hpp"

namespace vfd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct PairOutcome {
  std::optional<std::pair<FeatureRow, FeatureRow>> rows;
  std::string error;
};

}  // namespace

PairSet make_pairs(const std::vector<PointCloud>& benign, const AttackSpec& attack, const RgfParams& params,
                   std::uint64_t seed, std::size_t threads) {
  if (benign.empty()) throw InvalidArgument("make_pairs: no benign clouds");
  validate(attack);
  validate(params);

  std::vector<PairOutcome> outcomes(benign.size());
  parallel_for(benign.size(), threads, [&](std::size_t i) {
    try {
      AttackSpec spec = attack;
      spec.seed = derive_seed(attack.seed, {i});
      const PointCloud adv = apply_attack(benign[i], spec, params);
      const PointCloud ben = adv.size() == benign[i].size() ? benign[i] : resample(benign[i], adv.size(), derive_seed(seed, {i}));

      const std::string pair_id = std::to_string(i);
      const std::string source = benign[i].name.empty() ? "cloud_" + pair_id : benign[i].name;
      FeatureRow b{rgf_pipeline(ben, params), Label::benign, source, pair_id, ben.size()};
      FeatureRow a{rgf_pipeline(adv, params), Label::adversarial, source + "#" + std::string(to_string(attack.kind)),
                   pair_id, adv.size()};
      outcomes[i].rows.emplace(std::move(b), std::move(a));
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });

  PairSet out;
  for (std::size_t i = 0; i < benign.size(); ++i) {
    if (outcomes[i].rows) {
      out.rows.push_back(std::move(outcomes[i].rows->first));
      out.rows.push_back(std::move(outcomes[i].rows->second));
    } else {
      out.failures.push_back({i, benign[i].name, outcomes[i].error});
    }
  }
  if (10 * out.failures.size() > benign.size())
    throw Error("make_pairs: " + std::to_string(out.failures.size()) + " of " + std::to_string(benign.size()) +
                " pairs failed (first: " + out.failures.front().message + ")");
  return out;
}

SplitIndices split(const LabeledSet& set, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("split: test_fraction must lie in (0, 1)");

  std::vector<std::string> pairs;
  std::map<std::string, std::size_t> pair_index;
  for (const auto& row : set)
    if (pair_index.emplace(row.pair_id, pairs.size()).second) pairs.push_back(row.pair_id);
  if (pairs.size() < 2) throw InvalidArgument("split: need at least 2 pairs, got " + std::to_string(pairs.size()));

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto target = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(pairs.size())));
  const std::size_t n_test = std::clamp<std::size_t>(target, 1, pairs.size() - 1);
  std::vector<char> is_test(pairs.size(), 0);
  for (std::size_t k = 0; k < n_test; ++k) is_test[order[k]] = 1;

  SplitIndices s;
  for (std::size_t r = 0; r < set.size(); ++r)
    (is_test[pair_index.at(set[r].pair_id)] ? s.test : s.train).push_back(r);
  return s;
}

double accuracy(const std::vector<Label>& predictions, const std::vector<Label>& labels) {
  if (predictions.size() != labels.size()) throw InvalidArgument("accuracy: length mismatch");
  if (predictions.empty()) throw InvalidArgument("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<Label>& labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("roc_auc: length mismatch");
  const auto positives = static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), Label::adversarial));
  const std::uint64_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) throw InvalidArgument("roc_auc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  std::uint64_t tp = 0, fp = 0;
  // Twice the area in units of 1/(P*N); integer so the perfect cases are exact.
  std::uint64_t area2 = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    const std::uint64_t tp_prev = tp, fp_prev = fp;
    for (; k < order.size() && scores[order[k]] == s; ++k) (labels[order[k]] == Label::adversarial ? tp : fp) += 1;
    area2 += (fp - fp_prev) * (tp + tp_prev);
    roc.points.emplace_back(static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives));
  }
  if (roc.points.back() != std::pair<double, double>{1.0, 1.0}) roc.points.emplace_back(1.0, 1.0);
  roc.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
  return roc;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> class_matrices(const LabeledSet& set,
                                                           const std::vector<std::size_t>& rows) {
  std::vector<std::size_t> adv, ben;
  for (std::size_t r : rows) (set.at(r).label == Label::adversarial ? adv : ben).push_back(r);
  auto gather = [&](const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(kFeatureDim));
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < kFeatureDim; ++c)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = set[idx[i]].features[c];
    return m;
  };
  return {gather(adv), gather(ben)};
}

EvalReport evaluate(const LabeledSet& set, const ExperimentConfig& config) {
  EvalReport report;
  report.split = split(set, config.test_fraction, config.split_seed);
  report.train_rows = report.split.train.size();
  report.test_rows = report.split.test.size();

  const auto [adv, ben] = class_matrices(set, report.split.train);
  std::vector<double> scores;
  std::vector<Label> predicted, truth;
  const auto t0 = Clock::now();
  if (config.classifier == ClassifierKind::flde) {
    const FldeModel model = train_flde(adv, ben, config.flde);
    report.train_seconds = seconds_since(t0);
    for (std::size_t r : report.split.test) {
      const Prediction p = predict(model, set[r].features);
      scores.push_back(p.score);
      predicted.push_back(p.label);
      truth.push_back(set[r].label);
    }
    report.classifier_meta = {{"kind", "flde"},
                              {"d_sub", model.d_sub},
                              {"learners", model.learners.size()},
                              {"oob_error", model.oob_error},
                              {"seed", model.seed}};
  } else {
    const FldBase ld = train_ld(adv, ben);
    report.train_seconds = seconds_since(t0);
    for (std::size_t r : report.split.test) {
      const double d = ld.decision(set[r].features);
      scores.push_back(d);
      predicted.push_back(d > 0.0 ? Label::adversarial : Label::benign);
      truth.push_back(set[r].label);
    }
    report.classifier_meta = {{"kind", "ld"}};
  }
  report.accuracy = accuracy(predicted, truth);
  report.roc = roc_auc(scores, truth);
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json roc = nlohmann::json::array();
  for (const auto& [fpr, tpr] : report.roc.points) roc.push_back({fpr, tpr});
  return {{"accuracy", report.accuracy},
          {"auc", report.roc.auc},
          {"roc", std::move(roc)},
          {"train_seconds", report.train_seconds},
          {"extract_seconds_per_cloud", report.extract_seconds_per_cloud},
          {"train_rows", report.train_rows},
          {"test_rows", report.test_rows},
          {"params", report.params},
          {"classifier_meta", report.classifier_meta}};
}

std::string roc_csv(const RocCurve& roc) {
  std::string out = "fpr,tpr\n";
  for (const auto& [fpr, tpr] : roc.points) out += format_double(fpr) + "," + format_double(tpr) + "\n";
  return out;
}

// ---------------------------------------------------------------------------

SearchResult greedy_search(const RgfParams& init, const ParamGrids& grids,
                           const std::function<double(const RgfParams&)>& score) {
  const std::vector<std::size_t>* sweeps[5] = {&grids.t_offset, &grids.kg, &grids.kv, &grids.kc, &grids.kn};
  std::size_t RgfParams::*fields[5] = {&RgfParams::t_offset, &RgfParams::kg, &RgfParams::kv, &RgfParams::kc,
                                       &RgfParams::kn};
  for (std::size_t k = 0; k < 5; ++k) {
    if (sweeps[k]->empty()) throw InvalidArgument(std::string("greedy_search: empty grid for ") + kSweepOrder[k]);
    if (k > 0)
      for (std::size_t v : *sweeps[k])
        if (v < 3) throw InvalidArgument(std::string("greedy_search: neighborhood sizes must be >= 3 (") + kSweepOrder[k] + ")");
  }

  SearchResult result;
  result.best = init;
  for (std::size_t k = 0; k < 5; ++k) {
    std::optional<std::pair<double, std::size_t>> winner;
    for (std::size_t v : *sweeps[k]) {
      RgfParams p = result.best;
      p.*fields[k] = v;
      const double acc = score(p);
      result.trace.push_back({k, p, acc});
      if (!winner || acc > winner->first || (acc == winner->first && v < winner->second)) winner.emplace(acc, v);
    }
    result.best.*fields[k] = winner->second;
  }
  return result;
}

SearchResult greedy_param_search(const std::vector<PointCloud>& benign, const AttackSpec& attack,
                                 const RgfParams& init, const ParamGrids& grids, std::uint64_t seed,
                                 const ExperimentConfig& config, std::size_t threads) {
  return greedy_search(init, grids, [&](const RgfParams& p) {
    return evaluate(make_pairs(benign, attack, p, seed, threads).rows, config).accuracy;
  });
}

nlohmann::json to_json(const SearchResult& result) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& s : result.trace)
    trace.push_back({{"sweep", kSweepOrder[s.sweep]}, {"params", s.params}, {"accuracy", s.accuracy}});
  return {{"best", result.best}, {"trace", std::move(trace)}};
}

// ---------------------------------------------------------------------------

TimingReport bench_timing(const std::vector<PointCloud>& clouds, const RgfParams& params) {
  if (clouds.empty()) throw InvalidArgument("bench_timing: no clouds");
  TimingReport report;
  report.per_cloud.reserve(clouds.size());
  for (const auto& c : clouds) {
    const auto t0 = Clock::now();
    const FeatureVector v = rgf_pipeline(c, params);
    report.per_cloud.push_back(seconds_since(t0));
    if (!std::isfinite(v[0])) throw Error("bench_timing: non-finite feature");
  }
  report.mean_seconds =
      std::accumulate(report.per_cloud.begin(), report.per_cloud.end(), 0.0) / static_cast<double>(clouds.size());
  return report;
}

}  // namespace vfd
