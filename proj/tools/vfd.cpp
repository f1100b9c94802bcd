// vfd: command-line front end for residual-geometric-feature extraction,
// proxy attack simulation, detector training and evaluation.
//
// Every subcommand accepts --config <file.json>; flags given on the command
// line override the matching config keys. Exit codes: 0 success, 1 runtime
// failure, 2 configuration or usage failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vfd/attack.hpp"
#include "vfd/classifier.hpp"
#include "vfd/cloud.hpp"
#include "vfd/errors.hpp"
#include "vfd/eval.hpp"
#include "vfd/parallel.hpp"
#include "vfd/params.hpp"
#include "vfd/params_json.hpp"
#include "vfd/rgf.hpp"
#include "vfd/seed.hpp"
#include "vfd/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kArtifactVersion = 1;

/// Bad configuration, flags or input files: exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Work that ran but did not fully succeed: exit code 1.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::optional<std::string> preset;
  vfd::RgfParams params;
  std::optional<vfd::AttackSpec> attack;
  vfd::ExperimentConfig experiment;
  std::uint64_t seed = 1;  // benign resampling
  std::optional<std::string> manifest;
  std::vector<std::string> inputs;
  std::optional<std::string> out;
  std::optional<std::string> model;
  std::optional<std::string> features;
  std::optional<std::string> roc_csv;
  std::optional<vfd::ParamGrids> grids;
  std::size_t threads = 1;
  std::size_t count = 200;
  std::size_t points = 1024;
};

const std::vector<std::string> kTopLevelKeys = {"preset",  "params",   "attack", "classifier", "split",
                                                "seed",    "manifest", "inputs", "out",        "model",
                                                "features", "roc_csv", "grids",  "threads",    "count",
                                                "points"};

template <typename T>
void read_if(const json& j, const char* key, T& dst) {
  if (j.contains(key)) j.at(key).get_to(dst);
}

template <typename T>
void read_if(const json& j, const char* key, std::optional<T>& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

double default_magnitude(vfd::AttackKind kind) {
  switch (kind) {
    case vfd::AttackKind::perturb: return 0.02;
    case vfd::AttackKind::add: return 32;
    case vfd::AttackKind::remove: return 50;
  }
  return 0.0;
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(kTopLevelKeys.begin(), kTopLevelKeys.end(), key) == kTopLevelKeys.end())
      throw UsageError("unknown config key '" + key + "'");

  RunConfig c;
  try {
    read_if(j, "preset", c.preset);
    if (c.preset) c.params = vfd::preset_params(*c.preset);
    if (j.contains("params")) vfd::from_json(j.at("params"), c.params);
    vfd::validate(c.params);

    if (j.contains("attack")) {
      const json& a = j.at("attack");
      vfd::AttackSpec spec;
      spec.kind = vfd::parse_attack_kind(a.value("kind", std::string("perturb")));
      spec.mode = a.contains("mode") ? vfd::parse_attack_mode(a.at("mode").get<std::string>())
                                     : vfd::default_mode(spec.kind);
      spec.magnitude = a.value("magnitude", default_magnitude(spec.kind));
      spec.seed = a.value("seed", std::uint64_t{1});
      vfd::validate(spec);
      c.attack = spec;
    }

    if (j.contains("classifier")) {
      const json& k = j.at("classifier");
      const std::string kind = k.value("kind", std::string("flde"));
      if (kind == "flde") c.experiment.classifier = vfd::ClassifierKind::flde;
      else if (kind == "ld") c.experiment.classifier = vfd::ClassifierKind::ld;
      else throw UsageError("classifier.kind must be 'flde' or 'ld', got '" + kind + "'");
      read_if(k, "d_sub_grid", c.experiment.flde.d_sub_grid);
      read_if(k, "l_max", c.experiment.flde.l_max);
      read_if(k, "seed", c.experiment.flde.seed);
    }
    if (j.contains("split")) {
      read_if(j.at("split"), "test_fraction", c.experiment.test_fraction);
      read_if(j.at("split"), "seed", c.experiment.split_seed);
      if (!(c.experiment.test_fraction > 0.0 && c.experiment.test_fraction < 1.0))
        throw UsageError("split.test_fraction must lie in (0, 1)");
    }
    read_if(j, "seed", c.seed);
    read_if(j, "manifest", c.manifest);
    read_if(j, "inputs", c.inputs);
    read_if(j, "out", c.out);
    read_if(j, "model", c.model);
    read_if(j, "features", c.features);
    read_if(j, "roc_csv", c.roc_csv);
    read_if(j, "threads", c.threads);
    read_if(j, "count", c.count);
    read_if(j, "points", c.points);
    if (c.threads < 1) throw UsageError("threads must be >= 1");

    if (j.contains("grids")) {
      const json& g = j.at("grids");
      vfd::ParamGrids grids{{c.params.t_offset}, {c.params.kg}, {c.params.kv}, {c.params.kc}, {c.params.kn}};
      read_if(g, "t_offset", grids.t_offset);
      read_if(g, "kg", grids.kg);
      read_if(g, "kv", grids.kv);
      read_if(g, "kc", grids.kc);
      read_if(g, "kn", grids.kn);
      c.grids = grids;
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const vfd::InvalidArgument& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const vfd::ParseError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

json resolved_json(const RunConfig& c) {
  json j;
  if (c.preset) j["preset"] = *c.preset;
  j["params"] = c.params;
  if (c.attack)
    j["attack"] = {{"kind", vfd::to_string(c.attack->kind)},
                   {"mode", vfd::to_string(c.attack->mode)},
                   {"magnitude", c.attack->magnitude},
                   {"seed", c.attack->seed}};
  j["classifier"] = {{"kind", c.experiment.classifier == vfd::ClassifierKind::flde ? "flde" : "ld"},
                     {"d_sub_grid", c.experiment.flde.d_sub_grid},
                     {"l_max", c.experiment.flde.l_max},
                     {"seed", c.experiment.flde.seed}};
  j["split"] = {{"test_fraction", c.experiment.test_fraction}, {"seed", c.experiment.split_seed}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  if (c.manifest) j["manifest"] = *c.manifest;
  if (!c.inputs.empty()) j["inputs"] = c.inputs;
  if (c.features) j["features"] = *c.features;
  if (c.model) j["model"] = *c.model;
  if (c.grids)
    j["grids"] = {{"t_offset", c.grids->t_offset}, {"kg", c.grids->kg}, {"kv", c.grids->kv},
                  {"kc", c.grids->kc},             {"kn", c.grids->kn}};
  return j;
}

// ---------------------------------------------------------------------------
// Flags. Each one writes into a JSON patch that is merged over the config
// file, so a flag and its config key always mean the same thing.

struct Cli {
  std::string config_path;
  json overrides = json::object();

  template <typename T>
  void flag(CLI::App* app, const std::string& name, json::json_pointer where, const std::string& help) {
    app->add_option_function<T>(name, [this, where](const T& v) { overrides[where] = v; }, help);
  }

  void common(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file; flags override its keys")->check(CLI::ExistingFile);
    flag<std::size_t>(app, "--threads", "/threads"_json_pointer, "worker threads for per-cloud work");
  }
  void params(CLI::App* app) {
    flag<std::string>(app, "--preset", "/preset"_json_pointer, "parameter preset: perturb, add or remove");
    flag<std::size_t>(app, "--t-offset", "/params/t_offset"_json_pointer, "low-pass size is N - t_offset");
    flag<std::size_t>(app, "--kg", "/params/kg"_json_pointer, "KNN size of the smoothing graph");
    flag<std::size_t>(app, "--kv", "/params/kv"_json_pointer, "KNN size for normals");
    flag<std::size_t>(app, "--kc", "/params/kc"_json_pointer, "KNN size for curvature");
    flag<std::size_t>(app, "--kn", "/params/kn"_json_pointer, "base KNN size of the normal voting tensor");
  }
  void attack(CLI::App* app) {
    flag<std::string>(app, "--attack", "/attack/kind"_json_pointer, "attack kind: perturb, add or remove");
    flag<double>(app, "--magnitude", "/attack/magnitude"_json_pointer, "sigma (perturb) or point count (add/remove)");
    flag<std::string>(app, "--mode", "/attack/mode"_json_pointer,
                      "gaussian (perturb), uniform|cluster (add), random|highcurv (remove)");
    flag<std::uint64_t>(app, "--attack-seed", "/attack/seed"_json_pointer, "attack RNG seed");
    flag<std::uint64_t>(app, "--seed", "/seed"_json_pointer, "benign resampling seed");
  }
  void classifier(CLI::App* app) {
    flag<std::string>(app, "--classifier", "/classifier/kind"_json_pointer, "flde or ld");
    flag<std::size_t>(app, "--l-max", "/classifier/l_max"_json_pointer, "maximum ensemble size");
    flag<std::uint64_t>(app, "--flde-seed", "/classifier/seed"_json_pointer, "ensemble RNG seed");
    flag<std::vector<std::size_t>>(app, "--d-sub", "/classifier/d_sub_grid"_json_pointer, "candidate subspace sizes");
  }
  void split(CLI::App* app) {
    flag<double>(app, "--test-fraction", "/split/test_fraction"_json_pointer, "fraction of pairs held out");
    flag<std::uint64_t>(app, "--split-seed", "/split/seed"_json_pointer, "train/test split seed");
  }
  void clouds(CLI::App* app) {
    flag<std::string>(app, "--manifest", "/manifest"_json_pointer, "dataset manifest (path,label,pair_id)");
    flag<std::vector<std::string>>(app, "inputs", "/inputs"_json_pointer, "cloud files (.xyz, .off, .ply)");
  }
  void out(CLI::App* app, const std::string& help) { flag<std::string>(app, "--out,-o", "/out"_json_pointer, help); }

  RunConfig resolve() const {
    json base = json::object();
    if (!config_path.empty()) {
      try {
        base = json::parse(vfd::read_text_file(config_path));
      } catch (const json::exception& e) {
        throw UsageError(config_path + ": " + e.what());
      } catch (const vfd::Error& e) {
        throw UsageError(e.what());
      }
    }
    base.merge_patch(overrides);
    return parse_config(base);
  }
};

// ---------------------------------------------------------------------------
// Input helpers

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw UsageError("no such file: " + p.string());
}

vfd::PointCloud load_cloud(const fs::path& path) {
  require_file(path);
  try {
    vfd::PointCloud c = vfd::read_cloud_file(path);
    c.name = path.string();
    return c;
  } catch (const vfd::Error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

vfd::DatasetManifest load_manifest_checked(const std::string& path) {
  require_file(path);
  vfd::DatasetManifest m;
  try {
    m = vfd::load_manifest(path);
  } catch (const vfd::Error& e) {
    throw UsageError(path + ": " + e.what());
  }
  for (const auto& e : m.entries) require_file(m.resolve(e));
  return m;
}

struct Source {
  vfd::PointCloud cloud;
  std::string display;  // as written in the manifest or on the command line
  vfd::Label label = vfd::Label::benign;
  std::string pair_id;
};

/// Clouds named by the manifest and the positional inputs. With
/// benign_only, adversarial manifest entries are skipped.
std::vector<Source> load_sources(const RunConfig& c, bool benign_only) {
  std::vector<Source> out;
  if (c.manifest) {
    const vfd::DatasetManifest m = load_manifest_checked(*c.manifest);
    for (const auto& e : m.entries) {
      if (benign_only && e.label != vfd::Label::benign) continue;
      out.push_back({load_cloud(m.resolve(e)), e.path.generic_string(), e.label, e.pair_id});
    }
  }
  for (const auto& p : c.inputs) out.push_back({load_cloud(p), p, vfd::Label::benign, std::to_string(out.size())});
  if (out.empty()) throw UsageError("no input clouds (give --manifest or cloud files)");
  return out;
}

std::vector<vfd::PointCloud> benign_clouds(const RunConfig& c) {
  std::vector<vfd::PointCloud> clouds;
  for (auto& s : load_sources(c, true)) clouds.push_back(std::move(s.cloud));
  return clouds;
}

const vfd::AttackSpec& require_attack(const RunConfig& c) {
  if (!c.attack) throw UsageError("an attack is required (config 'attack' or --attack)");
  return *c.attack;
}

const std::string& require_out(const RunConfig& c) {
  if (!c.out) throw UsageError("--out is required");
  return *c.out;
}

void emit(const RunConfig& c, const std::string& text) {
  if (c.out) vfd::write_text_file(*c.out, text);
  else std::cout << text;
}

json artifact(const RunConfig& c) { return {{"version", kArtifactVersion}, {"config", resolved_json(c)}}; }

void report_failures(const std::vector<vfd::PairFailure>& failures) {
  for (const auto& f : failures) std::cerr << "warning: skipped pair " << f.index << " (" << f.source << "): " << f.message << "\n";
}

// ---------------------------------------------------------------------------
// Commands

int cmd_extract(const RunConfig& c) {
  if (!c.manifest) throw UsageError("extract needs --manifest");
  const std::string& out = require_out(c);
  const std::vector<Source> sources = load_sources(c, false);

  std::vector<std::optional<vfd::FeatureRow>> rows(sources.size());
  std::vector<std::string> errors(sources.size());
  vfd::parallel_for(sources.size(), c.threads, [&](std::size_t i) {
    try {
      const Source& s = sources[i];
      rows[i] = vfd::FeatureRow{vfd::rgf_pipeline(s.cloud, c.params), s.label, s.display, s.pair_id, s.cloud.size()};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<vfd::FeatureRow> ok;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (rows[i]) {
      ok.push_back(std::move(*rows[i]));
    } else {
      ++failed;
      std::cerr << "error: " << sources[i].display << ": " << errors[i] << "\n";
    }
  }
  vfd::write_text_file(out, vfd::write_feature_csv(ok));
  if (failed) throw RuntimeFailure(std::to_string(failed) + " of " + std::to_string(sources.size()) + " clouds failed");
  return 0;
}

int cmd_simulate(const RunConfig& c) {
  const vfd::AttackSpec& attack = require_attack(c);
  const fs::path dir = require_out(c);
  const std::vector<Source> sources = load_sources(c, true);
  fs::create_directories(dir);

  vfd::DatasetManifest manifest;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const Source& s = sources[i];
    try {
      vfd::AttackSpec spec = attack;
      spec.seed = vfd::derive_seed(attack.seed, {i});
      const vfd::PointCloud adv = vfd::apply_attack(s.cloud, spec, c.params);
      const vfd::PointCloud ben =
          adv.size() == s.cloud.size() ? s.cloud : vfd::resample(s.cloud, adv.size(), vfd::derive_seed(c.seed, {i}));
      char stem[32];
      std::snprintf(stem, sizeof stem, "%05zu", i);
      const std::string ben_name = std::string(stem) + "_benign.xyz";
      const std::string adv_name = std::string(stem) + "_adv.xyz";
      vfd::write_cloud_file(dir / ben_name, ben);
      vfd::write_cloud_file(dir / adv_name, adv);
      manifest.entries.push_back({ben_name, vfd::Label::benign, s.pair_id});
      manifest.entries.push_back({adv_name, vfd::Label::adversarial, s.pair_id});
    } catch (const vfd::Error& e) {
      ++failed;
      std::cerr << "error: " << s.display << ": " << e.what() << "\n";
    }
  }
  vfd::write_text_file(dir / "manifest.csv", vfd::write_manifest(manifest));
  if (failed) throw RuntimeFailure(std::to_string(failed) + " of " + std::to_string(sources.size()) + " clouds failed");
  return 0;
}

int cmd_pair(const RunConfig& c) {
  const vfd::AttackSpec& attack = require_attack(c);
  const std::string& out = require_out(c);
  const vfd::PairSet set = vfd::make_pairs(benign_clouds(c), attack, c.params, c.seed, c.threads);
  report_failures(set.failures);
  vfd::write_text_file(out, vfd::write_feature_csv(set.rows));
  return 0;
}

std::vector<vfd::FeatureRow> load_features(const std::string& path) {
  require_file(path);
  try {
    return vfd::parse_feature_csv(vfd::read_text_file(path));
  } catch (const vfd::Error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

int cmd_train(const RunConfig& c) {
  if (!c.features) throw UsageError("train needs --features");
  if (c.experiment.classifier != vfd::ClassifierKind::flde) throw UsageError("train only writes FLDE models");
  const std::string& out = require_out(c);
  const std::vector<vfd::FeatureRow> rows = load_features(*c.features);
  std::vector<std::size_t> all(rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto [adv, ben] = vfd::class_matrices(rows, all);

  vfd::FldeModel model = vfd::train_flde(adv, ben, c.experiment.flde);
  model.params = c.params;
  json j = json::parse(vfd::save_model(model));
  j["config"] = resolved_json(c);
  vfd::write_text_file(out, j.dump(1) + "\n");
  std::cerr << "trained " << model.learners.size() << " learners, d_sub " << model.d_sub << ", OOB error "
            << model.oob_error << "\n";
  return 0;
}

int cmd_detect(const RunConfig& c) {
  if (!c.model) throw UsageError("detect needs --model");
  require_file(*c.model);
  vfd::FldeModel model;
  try {
    model = vfd::load_model(vfd::read_text_file(*c.model));
  } catch (const vfd::Error& e) {
    throw UsageError(*c.model + ": " + e.what());
  }
  const vfd::RgfParams params = model.params.value_or(c.params);
  const std::vector<Source> sources = load_sources(c, false);

  std::vector<std::string> lines(sources.size());
  std::vector<char> failed(sources.size(), 0);
  vfd::parallel_for(sources.size(), c.threads, [&](std::size_t i) {
    try {
      const vfd::Prediction p = vfd::predict(model, vfd::rgf_pipeline(sources[i].cloud, params));
      lines[i] = sources[i].display + "\t" + vfd::format_double(p.score) + "\t" + std::string(vfd::to_string(p.label));
    } catch (const std::exception& e) {
      failed[i] = 1;
      lines[i] = e.what();
    }
  });
  std::size_t n_failed = 0;
  std::string text;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (failed[i]) {
      ++n_failed;
      std::cerr << "error: " << sources[i].display << ": " << lines[i] << "\n";
    } else {
      text += lines[i] + "\n";
    }
  }
  emit(c, text);
  if (n_failed) throw RuntimeFailure(std::to_string(n_failed) + " clouds failed");
  return 0;
}

int cmd_eval(const RunConfig& c) {
  std::vector<vfd::FeatureRow> rows;
  double extract_per_cloud = 0.0;
  if (c.features) {
    rows = load_features(*c.features);
  } else {
    const vfd::AttackSpec& attack = require_attack(c);
    const auto clouds = benign_clouds(c);
    const auto t0 = std::chrono::steady_clock::now();
    vfd::PairSet set = vfd::make_pairs(clouds, attack, c.params, c.seed, c.threads);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report_failures(set.failures);
    rows = std::move(set.rows);
    // Wall time spread over clouds; with several threads this understates single-cloud latency.
    extract_per_cloud = wall * static_cast<double>(c.threads) / static_cast<double>(rows.size());
  }
  vfd::EvalReport report = vfd::evaluate(rows, c.experiment);
  report.params = c.params;
  report.extract_seconds_per_cloud = extract_per_cloud;

  json j = artifact(c);
  j.update(vfd::to_json(report));
  emit(c, j.dump(1) + "\n");
  if (c.roc_csv) vfd::write_text_file(*c.roc_csv, vfd::roc_csv(report.roc));
  return 0;
}

int cmd_search(const RunConfig& c) {
  const vfd::AttackSpec& attack = require_attack(c);
  const vfd::ParamGrids grids =
      c.grids.value_or(vfd::ParamGrids{{c.params.t_offset}, {c.params.kg}, {c.params.kv}, {c.params.kc}, {c.params.kn}});
  const vfd::SearchResult result =
      vfd::greedy_param_search(benign_clouds(c), attack, c.params, grids, c.seed, c.experiment, c.threads);
  json j = artifact(c);
  j.update(vfd::to_json(result));
  emit(c, j.dump(1) + "\n");
  return 0;
}

int cmd_bench(const RunConfig& c) {
  if (c.threads != 1) throw UsageError("bench runs single-threaded; use --threads 1");
  const vfd::TimingReport t = vfd::bench_timing(benign_clouds(c), c.params);
  json j = artifact(c);
  j["mean_seconds"] = t.mean_seconds;
  j["per_cloud"] = t.per_cloud;
  emit(c, j.dump(1) + "\n");
  return 0;
}

int cmd_synth(const RunConfig& c) {
  const fs::path dir = require_out(c);
  if (c.count < 1 || c.points < 1) throw UsageError("count and points must be >= 1");
  fs::create_directories(dir);
  vfd::DatasetManifest manifest;
  const auto clouds = vfd::synth::shape_collection(c.count, c.points, c.seed);
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const std::string name = clouds[i].name + ".xyz";
    vfd::write_cloud_file(dir / name, clouds[i]);
    manifest.entries.push_back({name, vfd::Label::benign, std::to_string(i)});
  }
  vfd::write_text_file(dir / "manifest.csv", vfd::write_manifest(manifest));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Victim-free detection of adversarial point clouds from residual geometric features", "vfd"};
  app.set_version_flag("--version", "vfd 1.0");
  app.require_subcommand(1);

  Cli cli;
  int (*handler)(const RunConfig&) = nullptr;
  auto sub = [&](const char* name, const char* help, int (*fn)(const RunConfig&)) {
    CLI::App* s = app.add_subcommand(name, help);
    s->callback([&handler, fn] { handler = fn; });
    cli.common(s);
    return s;
  };

  CLI::App* extract = sub("extract", "Extract 78-d feature vectors for every cloud in a manifest", cmd_extract);
  cli.params(extract);
  cli.clouds(extract);
  cli.out(extract, "feature CSV to write");

  CLI::App* simulate = sub("simulate", "Attack benign clouds and write a paired dataset", cmd_simulate);
  cli.params(simulate);
  cli.attack(simulate);
  cli.clouds(simulate);
  cli.out(simulate, "output directory (clouds and manifest.csv)");

  CLI::App* pair = sub("pair", "Attack, resample and extract benign/adversarial feature pairs", cmd_pair);
  cli.params(pair);
  cli.attack(pair);
  cli.clouds(pair);
  cli.out(pair, "feature CSV to write");

  CLI::App* train = sub("train", "Train an FLDE detector on a feature CSV", cmd_train);
  cli.params(train);
  cli.classifier(train);
  cli.flag<std::string>(train, "--features", "/features"_json_pointer, "feature CSV");
  cli.out(train, "model JSON to write");

  CLI::App* detect = sub("detect", "Score clouds with a trained model: <path>\\t<score>\\t<verdict>", cmd_detect);
  cli.params(detect);
  cli.clouds(detect);
  cli.flag<std::string>(detect, "--model", "/model"_json_pointer, "model JSON");
  cli.out(detect, "verdict TSV (stdout when omitted)");

  CLI::App* eval = sub("eval", "Pair-split train/test evaluation with accuracy and ROC", cmd_eval);
  cli.params(eval);
  cli.attack(eval);
  cli.classifier(eval);
  cli.split(eval);
  cli.clouds(eval);
  cli.flag<std::string>(eval, "--features", "/features"_json_pointer, "evaluate a feature CSV instead of clouds");
  cli.flag<std::string>(eval, "--roc-csv", "/roc_csv"_json_pointer, "also write ROC points as fpr,tpr CSV");
  cli.out(eval, "report JSON (stdout when omitted)");

  CLI::App* search = sub("search", "Greedy parameter search in the order t, kg, kv, kc, kn", cmd_search);
  cli.params(search);
  cli.attack(search);
  cli.classifier(search);
  cli.split(search);
  cli.clouds(search);
  for (const char* k : vfd::kSweepOrder) {
    std::string flag = std::string("--grid-") + k;
    std::replace(flag.begin(), flag.end(), '_', '-');
    cli.flag<std::vector<std::size_t>>(search, flag, json::json_pointer(std::string("/grids/") + k),
                                       std::string("candidates for ") + k);
  }
  cli.out(search, "search trace JSON (stdout when omitted)");

  CLI::App* bench = sub("bench", "Time feature extraction per cloud (single-threaded)", cmd_bench);
  cli.params(bench);
  cli.clouds(bench);
  cli.out(bench, "timing JSON (stdout when omitted)");

  CLI::App* synth = sub("synth", "Write synthetic shape clouds and a benign manifest", cmd_synth);
  cli.flag<std::size_t>(synth, "--count", "/count"_json_pointer, "number of shapes");
  cli.flag<std::size_t>(synth, "--points", "/points"_json_pointer, "points per shape");
  cli.flag<std::uint64_t>(synth, "--seed", "/seed"_json_pointer, "generator seed");
  cli.out(synth, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    return handler(cli.resolve());
  } catch (const UsageError& e) {
    std::cerr << "vfd: " << e.what() << "\n";
    return 2;
  } catch (const RuntimeFailure& e) {
    std::cerr << "vfd: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "vfd: " << e.what() << "\n";
    return 1;
  }
}
