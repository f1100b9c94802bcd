#include "vfd/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "vfd/errors.hpp"
#include "vfd/params_json.hpp"
#include "vfd/seed.hpp"

namespace vfd {

namespace {

using Index = Eigen::Index;

// Fisher discriminant on matrices already restricted to the subspace columns.
FldBase fit_fld(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg, std::vector<std::size_t> subspace) {
  const Index d = pos.cols();
  const Eigen::RowVectorXd mu_pos = pos.colwise().mean();
  const Eigen::RowVectorXd mu_neg = neg.colwise().mean();
  const Eigen::MatrixXd cp = pos.rowwise() - mu_pos;
  const Eigen::MatrixXd cn = neg.rowwise() - mu_neg;

  Eigen::MatrixXd scatter(d, d);
  scatter.setZero();
  scatter.selfadjointView<Eigen::Lower>().rankUpdate(cp.transpose());
  scatter.selfadjointView<Eigen::Lower>().rankUpdate(cn.transpose());
  scatter = scatter.selfadjointView<Eigen::Lower>();

  const double trace = scatter.trace();
  const double gamma = trace > 0.0 ? 1e-6 * trace / static_cast<double>(d) : 1e-6;
  scatter.diagonal().array() += gamma;

  const Eigen::VectorXd delta = (mu_pos - mu_neg).transpose();
  Eigen::VectorXd w;
  Eigen::LLT<Eigen::MatrixXd> llt(scatter);
  if (llt.info() == Eigen::Success) {
    w = llt.solve(delta);
  } else {
    w = scatter.ldlt().solve(delta);
  }
  if (!w.allFinite()) throw Error("train_fld: discriminant solve produced non-finite weights");
  if ((w.array() == 0.0).all()) {
    // No mean difference at all: any fixed direction is as good as another.
    w.setZero();
    w(0) = 1.0;
  }

  const double proj_pos = mu_pos.dot(w);
  const double proj_neg = mu_neg.dot(w);

  FldBase base;
  base.subspace = std::move(subspace);
  base.weights.assign(w.data(), w.data() + w.size());
  base.threshold = 0.5 * (proj_pos + proj_neg);
  base.polarity = proj_pos >= proj_neg ? 1 : -1;
  return base;
}

void require_training_sets(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg, Index min_rows, const char* who) {
  if (pos.rows() < min_rows || neg.rows() < min_rows)
    throw InvalidArgument(std::string(who) + ": need at least " + std::to_string(min_rows) +
                          " samples per class (got " + std::to_string(pos.rows()) + " and " +
                          std::to_string(neg.rows()) + ")");
  if (pos.cols() != neg.cols() || pos.cols() < 1) throw InvalidArgument(std::string(who) + ": class dimensions differ");
  if (!pos.allFinite() || !neg.allFinite()) throw InvalidArgument(std::string(who) + ": non-finite training sample");
}

std::vector<std::size_t> random_subspace(std::size_t dim, std::size_t d_sub, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(dim);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < d_sub; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, dim - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(d_sub);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct GrownEnsemble {
  std::vector<FldBase> learners;
  double oob_error = 1.0;
};

GrownEnsemble grow_ensemble(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg, std::size_t d_sub,
                            const FldeConfig& cfg) {
  const Index np = pos.rows(), nn = neg.rows();
  const auto dim = static_cast<std::size_t>(pos.cols());
  const Index total = np + nn;

  std::vector<int> votes_pos(static_cast<std::size_t>(total), 0), votes_all(static_cast<std::size_t>(total), 0);
  std::vector<char> in_bag(static_cast<std::size_t>(total));
  std::vector<double> history;
  GrownEnsemble out;

  std::vector<Index> boot_pos(static_cast<std::size_t>(np)), boot_neg(static_cast<std::size_t>(nn));
  for (std::size_t l = 1; l <= cfg.l_max; ++l) {
    std::mt19937_64 rng(derive_seed(cfg.seed, {d_sub, l}));
    std::vector<std::size_t> subspace = random_subspace(dim, d_sub, rng);
    std::fill(in_bag.begin(), in_bag.end(), 0);
    std::uniform_int_distribution<Index> pick_pos(0, np - 1), pick_neg(0, nn - 1);
    for (auto& i : boot_pos) in_bag[static_cast<std::size_t>(i = pick_pos(rng))] = 1;
    for (auto& i : boot_neg) in_bag[static_cast<std::size_t>(np + (i = pick_neg(rng)))] = 1;

    const std::vector<Index> cols(subspace.begin(), subspace.end());
    const Eigen::MatrixXd bp = pos(boot_pos, cols);
    const Eigen::MatrixXd bn = neg(boot_neg, cols);
    FldBase learner = fit_fld(bp, bn, std::move(subspace));

    for (Index s = 0; s < total; ++s) {
      const auto su = static_cast<std::size_t>(s);
      if (in_bag[su]) continue;
      const bool is_pos = s < np;
      const auto row = is_pos ? pos.row(s) : neg.row(s - np);
      const Eigen::VectorXd x = row.transpose();
      votes_pos[su] += learner.votes_positive(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
      votes_all[su] += 1;
    }
    out.learners.push_back(std::move(learner));

    std::size_t counted = 0, wrong = 0;
    for (Index s = 0; s < total; ++s) {
      const auto su = static_cast<std::size_t>(s);
      if (votes_all[su] == 0) continue;
      ++counted;
      const bool says_pos = 2 * votes_pos[su] > votes_all[su];
      if (says_pos != (s < np)) ++wrong;
    }
    const double err = counted ? static_cast<double>(wrong) / static_cast<double>(counted) : 1.0;
    history.push_back(err);
    out.oob_error = err;

    if (l >= cfg.min_learners && l > cfg.stall_window &&
        std::abs(err - history[l - 1 - cfg.stall_window]) < cfg.stall_tolerance)
      break;
  }
  return out;
}

}  // namespace

double FldBase::decision(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < subspace.size(); ++k) s += weights[k] * x[subspace[k]];
  return polarity * (s - threshold);
}

FldBase train_fld(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg, std::vector<std::size_t> subspace) {
  require_training_sets(pos, neg, 2, "train_fld");
  if (subspace.empty()) throw InvalidArgument("train_fld: empty subspace");
  std::set<std::size_t> uniq(subspace.begin(), subspace.end());
  if (uniq.size() != subspace.size()) throw InvalidArgument("train_fld: duplicate subspace index");
  if (*uniq.rbegin() >= static_cast<std::size_t>(pos.cols())) throw InvalidArgument("train_fld: subspace index out of range");

  const std::vector<Index> cols(subspace.begin(), subspace.end());
  const Eigen::MatrixXd p = pos(Eigen::all, cols);
  const Eigen::MatrixXd n = neg(Eigen::all, cols);
  return fit_fld(p, n, std::move(subspace));
}

FldBase train_ld(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg) {
  require_training_sets(pos, neg, 2, "train_ld");
  std::vector<std::size_t> all(static_cast<std::size_t>(pos.cols()));
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit_fld(pos, neg, std::move(all));
}

std::vector<std::size_t> default_d_sub_grid(std::size_t feature_dim) {
  std::vector<std::size_t> grid;
  for (std::size_t d = 5; d < feature_dim; d += 5) grid.push_back(d);
  grid.push_back(feature_dim);
  return grid;
}

FldeModel train_flde(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg, const FldeConfig& config) {
  require_training_sets(pos, neg, 10, "train_flde");
  if (config.l_max < 1) throw InvalidArgument("train_flde: l_max must be >= 1");
  const auto dim = static_cast<std::size_t>(pos.cols());

  std::vector<std::size_t> grid = config.d_sub_grid.empty() ? default_d_sub_grid(dim) : config.d_sub_grid;
  for (auto& d : grid) d = std::clamp<std::size_t>(d, 1, dim);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  FldeModel best;
  bool have = false;
  for (std::size_t d_sub : grid) {
    GrownEnsemble e = grow_ensemble(pos, neg, d_sub, config);
    if (!have || e.oob_error < best.oob_error) {
      best.learners = std::move(e.learners);
      best.oob_error = e.oob_error;
      best.d_sub = d_sub;
      have = true;
    }
  }
  best.feature_dim = dim;
  best.seed = config.seed;
  return best;
}

Prediction predict(const FldeModel& model, std::span<const double> x) {
  if (x.size() != model.feature_dim)
    throw InvalidArgument("predict: feature vector has length " + std::to_string(x.size()) + ", model expects " +
                          std::to_string(model.feature_dim));
  if (model.learners.empty()) throw InvalidArgument("predict: model has no learners");
  std::size_t votes = 0;
  for (const auto& l : model.learners) votes += l.votes_positive(x);
  Prediction p;
  p.score = static_cast<double>(votes) / static_cast<double>(model.learners.size());
  p.label = 2 * votes > model.learners.size() ? Label::adversarial : Label::benign;
  return p;
}

// ---------------------------------------------------------------------------
// Persistence

std::string save_model(const FldeModel& model) {
  nlohmann::json learners = nlohmann::json::array();
  for (const auto& l : model.learners)
    learners.push_back({{"subspace", l.subspace}, {"weights", l.weights}, {"threshold", l.threshold}, {"polarity", l.polarity}});
  nlohmann::json j = {
      {"version", kModelVersion},
      {"kind", "flde"},
      {"feature_dim", model.feature_dim},
      {"d_sub", model.d_sub},
      {"seed", model.seed},
      {"oob_error", model.oob_error},
      {"learners", std::move(learners)},
      {"params_snapshot", model.params ? nlohmann::json(*model.params) : nlohmann::json(nullptr)},
  };
  return j.dump(1) + "\n";
}

FldeModel load_model(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("version")) throw ParseError(0, "model file lacks a version field");
  const auto& v = j.at("version");
  if (!v.is_number_integer() || v.get<long long>() != kModelVersion)
    throw UnsupportedVersion("unsupported model version " + v.dump() + " (this build reads version " +
                             std::to_string(kModelVersion) + ")");

  FldeModel m;
  try {
    m.feature_dim = j.at("feature_dim").get<std::size_t>();
    m.d_sub = j.at("d_sub").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.oob_error = j.at("oob_error").get<double>();
    for (const auto& l : j.at("learners")) {
      FldBase b;
      b.subspace = l.at("subspace").get<std::vector<std::size_t>>();
      b.weights = l.at("weights").get<std::vector<double>>();
      b.threshold = l.at("threshold").get<double>();
      b.polarity = l.at("polarity").get<int>();
      m.learners.push_back(std::move(b));
    }
    if (j.contains("params_snapshot") && !j.at("params_snapshot").is_null()) m.params = j.at("params_snapshot").get<RgfParams>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("malformed model file: ") + e.what());
  }

  if (m.learners.empty()) throw InvalidArgument("model has no learners");
  if (m.d_sub < 1 || m.d_sub > m.feature_dim) throw InvalidArgument("model d_sub out of range");
  for (const auto& b : m.learners) {
    if (b.subspace.size() != m.d_sub || b.weights.size() != m.d_sub)
      throw InvalidArgument("model learner size does not match d_sub");
    std::set<std::size_t> uniq(b.subspace.begin(), b.subspace.end());
    if (uniq.size() != b.subspace.size() || *uniq.rbegin() >= m.feature_dim)
      throw InvalidArgument("model learner subspace indices invalid");
    if (std::all_of(b.weights.begin(), b.weights.end(), [](double w) { return w == 0.0; }))
      throw InvalidArgument("model learner has all-zero weights");
    if (b.polarity != 1 && b.polarity != -1) throw InvalidArgument("model learner polarity must be +1 or -1");
  }
  return m;
}

}  // namespace vfd
