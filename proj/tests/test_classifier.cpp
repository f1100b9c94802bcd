#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "oracles.hpp"
#include "vfd/classifier.hpp"
#include "vfd/errors.hpp"

using namespace vfd;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index d, double mean, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = mean + g(rng);
  return m;
}

std::span<const double> row_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
}

double held_out_accuracy(const FldeModel& m, const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg) {
  std::size_t hits = 0;
  for (Eigen::Index r = 0; r < pos.rows(); ++r) hits += predict(m, row_span(pos.row(r).transpose())).label == Label::adversarial;
  for (Eigen::Index r = 0; r < neg.rows(); ++r) hits += predict(m, row_span(neg.row(r).transpose())).label == Label::benign;
  return static_cast<double>(hits) / static_cast<double>(pos.rows() + neg.rows());
}

FldeModel tiny_model(int learners_for, int learners_against) {
  FldeModel m;
  m.feature_dim = 2;
  m.d_sub = 1;
  for (int i = 0; i < learners_for + learners_against; ++i)
    m.learners.push_back({{0}, {1.0}, 0.0, i < learners_for ? 1 : -1});
  return m;
}

}  // namespace

TEST_SUITE("classifier") {

TEST_CASE("one-dimensional FLD") {
  Eigen::MatrixXd pos(2, 1), neg(2, 1);
  pos << 2, 3;
  neg << -3, -2;
  const FldBase f = train_fld(pos, neg, {0});
  const double zero = 0.0, two = 2.0, minus = -2.5;
  CHECK(f.decision({&zero, 1}) == doctest::Approx(0.0).scale(1.0));
  CHECK(f.votes_positive({&two, 1}));
  CHECK_FALSE(f.votes_positive({&minus, 1}));
  // Reversed classes flip the side but keep the boundary.
  const FldBase g = train_fld(neg, pos, {0});
  CHECK(g.votes_positive({&minus, 1}));
}

TEST_CASE("FLD direction matches the closed form") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd pos = gaussian(400, 78, 0.5, rng), neg = gaussian(400, 78, -0.5, rng);
  std::vector<std::size_t> all(78);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const FldBase f = train_fld(pos, neg, all);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(f.weights.data(), 78) * f.polarity;
  const double a = angle(w, oracle::fld_direction(pos, neg));
  MESSAGE("angle to closed form: " << a);
  CHECK(a < 1e-6);

  // Isotropic scatter: w is parallel to the mean difference.
  Eigen::MatrixXd p(4, 2), n(4, 2);
  p << 1, 1, -1, 1, 1, -1, -1, -1;
  n = p;
  p.rowwise() += Eigen::RowVector2d(3, 1);
  const FldBase iso = train_fld(p, n, {0, 1});
  CHECK(angle(Eigen::Vector2d(iso.weights[0], iso.weights[1]) * iso.polarity, Eigen::Vector2d(3, 1)) < 1e-6);

  // Subspace restriction picks columns in the given order.
  const FldBase sub = train_fld(pos, neg, {7, 3});
  const Eigen::MatrixXd ps = pos(Eigen::all, std::vector<Eigen::Index>{7, 3});
  const Eigen::MatrixXd ns = neg(Eigen::all, std::vector<Eigen::Index>{7, 3});
  CHECK(angle(Eigen::Vector2d(sub.weights[0], sub.weights[1]) * sub.polarity, oracle::fld_direction(ps, ns)) < 1e-6);
}

TEST_CASE("FLD on identical classes trains and guesses") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = gaussian(200, 5, 0.0, rng);
  const FldBase f = train_fld(x, x, {0, 1, 2, 3, 4});
  std::size_t hits = 0;
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const Eigen::VectorXd v = x.row(r).transpose();
      hits += f.votes_positive(row_span(v)) == (pass == 0);
    }
  CHECK(std::abs(static_cast<double>(hits) / 400.0 - 0.5) <= 0.1);
  CHECK(std::any_of(f.weights.begin(), f.weights.end(), [](double w) { return w != 0.0; }));
}

TEST_CASE("FLD decision is invariant to positive rescaling") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd pos = gaussian(50, 6, 0.3, rng), neg = gaussian(50, 6, -0.3, rng);
  const FldBase f = train_fld(pos, neg, {0, 2, 4, 5});
  FldBase g = f;
  for (double& w : g.weights) w *= 17.0;
  g.threshold *= 17.0;
  for (Eigen::Index r = 0; r < 50; ++r) {
    const Eigen::VectorXd v = pos.row(r).transpose();
    CHECK(f.votes_positive(row_span(v)) == g.votes_positive(row_span(v)));
  }
}

TEST_CASE("FLD argument checks") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd a = gaussian(5, 4, 0, rng), one = gaussian(1, 4, 0, rng);
  CHECK_THROWS_AS(train_fld(a, one, {0}), InvalidArgument);
  CHECK_THROWS_AS(train_fld(a, a, {0, 0}), InvalidArgument);
  CHECK_THROWS_AS(train_fld(a, a, {4}), InvalidArgument);
  CHECK_THROWS_AS(train_fld(a, a, {}), InvalidArgument);
  CHECK_THROWS_AS(train_flde(a, a, FldeConfig{}), InvalidArgument);
}

TEST_CASE("FLDE separates shifted Gaussians") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd pos = gaussian(400, 78, 0.5, rng), neg = gaussian(400, 78, -0.5, rng);
  const Eigen::MatrixXd tp = gaussian(400, 78, 0.5, rng), tn = gaussian(400, 78, -0.5, rng);
  const FldeModel m = train_flde(pos, neg, FldeConfig{});
  CHECK(m.learners.size() >= 51);
  CHECK(m.feature_dim == 78);
  for (const auto& l : m.learners) CHECK(l.subspace.size() == m.d_sub);
  CHECK(held_out_accuracy(m, tp, tn) >= 0.95);
}

TEST_CASE("FLDE on shuffled labels is at chance") {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(100 + seed);
    Eigen::MatrixXd x(800, 78);
    x << gaussian(400, 78, 0.5, rng), gaussian(400, 78, -0.5, rng);
    std::vector<Eigen::Index> idx(800);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    const Eigen::MatrixXd pos = x(std::vector<Eigen::Index>(idx.begin(), idx.begin() + 400), Eigen::all);
    const Eigen::MatrixXd neg = x(std::vector<Eigen::Index>(idx.begin() + 400, idx.end()), Eigen::all);
    // Held-out rows come from the same shuffled labelling, so labels carry no signal anywhere.
    FldeConfig cfg;
    cfg.seed = seed;
    const FldeModel m = train_flde(pos.topRows(300), neg.topRows(300), cfg);
    total += held_out_accuracy(m, pos.bottomRows(100), neg.bottomRows(100));
  }
  const double mean = total / 5.0;
  MESSAGE("mean shuffled-label accuracy: " << mean);
  CHECK(mean >= 0.45);
  CHECK(mean <= 0.55);
}

TEST_CASE("single learner over all features fits separable data") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd pos = gaussian(60, 78, 2.0, rng), neg = gaussian(60, 78, -2.0, rng);
  FldeConfig cfg;
  cfg.d_sub_grid = {78};
  cfg.l_max = 1;
  const FldeModel m = train_flde(pos, neg, cfg);
  REQUIRE(m.learners.size() == 1);
  CHECK(held_out_accuracy(m, pos, neg) == 1.0);
}

TEST_CASE("FLDE is deterministic per seed") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd pos = gaussian(60, 20, 0.2, rng), neg = gaussian(60, 20, -0.2, rng);
  FldeConfig cfg;
  cfg.seed = 99;
  CHECK(save_model(train_flde(pos, neg, cfg)) == save_model(train_flde(pos, neg, cfg)));
  cfg.seed = 100;
  FldeConfig other = cfg;
  other.seed = 101;
  CHECK(save_model(train_flde(pos, neg, cfg)) != save_model(train_flde(pos, neg, other)));
}

TEST_CASE("prediction votes and ties") {
  const double x[2] = {1.0, 0.0};
  const Prediction all = predict(tiny_model(3, 0), x);
  CHECK(all.score == 1.0);
  CHECK(all.label == Label::adversarial);
  const Prediction tie = predict(tiny_model(1, 1), x);
  CHECK(tie.score == 0.5);
  CHECK(tie.label == Label::benign);

  FldeModel m = tiny_model(2, 3);
  const double before = predict(m, x).score;
  std::reverse(m.learners.begin(), m.learners.end());
  CHECK(predict(m, x).score == before);

  const double short_x[1] = {1.0};
  CHECK_THROWS_AS(predict(m, short_x), InvalidArgument);
}

TEST_CASE("model persistence") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd pos = gaussian(80, 78, 0.1, rng), neg = gaussian(80, 78, -0.1, rng);
  FldeConfig cfg;
  cfg.d_sub_grid = {10, 30};
  FldeModel m = train_flde(pos, neg, cfg);
  m.params = RgfParams{20, 5, 5, 5, 4};
  const std::string text = save_model(m);
  const FldeModel back = load_model(text);
  CHECK(save_model(back) == text);
  CHECK(back.d_sub == m.d_sub);
  CHECK(back.seed == m.seed);
  CHECK(back.oob_error == m.oob_error);
  REQUIRE(back.params);
  CHECK(*back.params == *m.params);
  REQUIRE(back.learners.size() == m.learners.size());
  for (std::size_t i = 0; i < m.learners.size(); ++i) {
    CHECK(back.learners[i].subspace == m.learners[i].subspace);
    CHECK(back.learners[i].weights == m.learners[i].weights);
    CHECK(back.learners[i].threshold == m.learners[i].threshold);
    CHECK(back.learners[i].polarity == m.learners[i].polarity);
  }
  const Eigen::MatrixXd probe = gaussian(100, 78, 0.0, rng);
  for (Eigen::Index r = 0; r < 100; ++r) {
    const Eigen::VectorXd v = probe.row(r).transpose();
    const Prediction a = predict(m, row_span(v)), b = predict(back, row_span(v));
    CHECK(a.score == b.score);
    CHECK(a.label == b.label);
  }

  CHECK_THROWS_AS(load_model(text.substr(0, text.size() / 2)), ParseError);
  nlohmann::json j = nlohmann::json::parse(text);
  j["version"] = 999;
  CHECK_THROWS_AS(load_model(j.dump()), UnsupportedVersion);
  j["version"] = "999";
  CHECK_THROWS_AS(load_model(j.dump()), UnsupportedVersion);
  j = nlohmann::json::parse(text);
  j["learners"][0]["subspace"][0] = 500;
  CHECK_THROWS_AS(load_model(j.dump()), Error);
  j = nlohmann::json::parse(text);
  j["learners"] = nlohmann::json::array();
  CHECK_THROWS_AS(load_model(j.dump()), Error);
}

}
