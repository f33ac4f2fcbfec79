#include <algorithm>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alrank/cluster.hpp"
#include "alrank/error.hpp"
#include "alrank/harness.hpp"
#include "alrank/jsonl.hpp"
#include "alrank/manifest.hpp"
#include "alrank/rng.hpp"
#include "alrank/scorers.hpp"
#include "alrank/select.hpp"
#include "alrank/synthetic.hpp"
#include "alrank/toy_learner.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace alrank;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

int parse_k(const std::string& text, std::size_t n) {
  if (text == "auto") return default_k(n);
  std::size_t pos = 0;
  int k = 0;
  try {
    k = std::stoi(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || k < 1) throw Error("--k must be a positive integer or \"auto\"");
  return k;
}

std::int32_t vocab_from(const std::vector<const ItemRecord*>& items) {
  std::int32_t v = 2;
  for (const auto* it : items)
    for (const auto& ref : it->references)
      for (Token t : ref) v = std::max(v, t + 1);
  return v;
}

// Writes each output atomically, then the manifest covering all of them.
class Outputs {
 public:
  Outputs(std::string command, const Common& common, ojson config)
      : command_(std::move(command)), dir_(common.out_dir), seed_(common.seed), config_(std::move(config)) {}

  void input(const std::string& path) {
    if (path.empty()) return;
    inputs_.push_back(path);
    config_["inputs"][path] = file_digest(path);
  }

  void add(const std::string& name, const std::string& content) { files_.emplace_back(name, content); }

  void commit(const std::string& settings) {
    fs::create_directories(dir_);
    RunManifest m;
    m.command = command_;
    m.seed = seed_;
    m.input_paths = inputs_;
    m.settings = settings;
    m.config_json = config_.dump();
    m.config_hash = sha256_hex(m.config_json);
    for (const auto& [name, content] : files_) {
      const auto path = (fs::path(dir_) / name).string();
      write_file_atomic(path, content);
      m.output_paths.push_back(path);
    }
    write_manifest(fs::path(dir_) / (command_ + ".manifest.json"), m);
  }

 private:
  std::string command_;
  std::string dir_;
  std::uint64_t seed_;
  ojson config_;
  std::vector<std::string> inputs_;
  std::vector<std::pair<std::string, std::string>> files_;
};

// ---- rank -----------------------------------------------------------------

struct RankArgs {
  std::string features, ensemble_scores, strategy, pool_state;
  std::optional<std::int32_t> vocab_size;
  int model = 0;
  std::string eos = "0";
};

void run_rank(const RankArgs& a, const Common& c) {
  auto strategy = parse_strategy(a.strategy);
  if (!strategy) throw Error("unknown scoring strategy: " + a.strategy);
  if (*strategy != Strategy::random && a.ensemble_scores.empty())
    throw Error("--ensemble-scores is required for --strategy " + a.strategy);

  auto fin = open_input(a.features);
  const auto features = jsonl::read_features(fin, a.features);
  std::set<std::string> ids;
  for (const auto& [id, f] : features)
    if (!ids.insert(id).second) throw Error(a.features + ": duplicate feature record for id: " + id);
  if (!a.pool_state.empty()) {
    auto sin = open_input(a.pool_state);
    std::set<std::string> stated;
    for (const auto& [id, round] : jsonl::read_pool_state_records(sin, a.pool_state)) {
      if (!ids.count(id)) throw Error(a.pool_state + ": unknown id " + id);
      stated.insert(id);
      if (round) ids.erase(id);
    }
    for (const auto& [id, f] : features)
      if (!stated.count(id)) throw Error(a.pool_state + ": missing state for id " + id);
  }

  std::map<std::string, EnsembleCaptionSet> sets;
  if (*strategy != Strategy::random) {
    auto ein = open_input(a.ensemble_scores);
    sets = jsonl::read_ensemble_scores(ein, a.vocab_size, a.ensemble_scores);
    std::optional<Token> eos;
    if (a.eos != "none") {
      std::size_t pos = 0;
      try {
        eos = static_cast<Token>(std::stoi(a.eos, &pos));
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != a.eos.size() || *eos < 0) throw Error("--eos must be a token id or \"none\"");
    }
    for (auto& [id, set] : sets) set.eos = eos;
  }
  auto reports = score_items({ids.begin(), ids.end()}, sets, *strategy, c.seed, a.model);
  sort_best_first(reports);

  ojson config;
  config["command"] = "rank";
  config["strategy"] = std::string(to_string(*strategy));
  config["seed"] = c.seed;
  config["model"] = a.model;
  config["eos"] = a.eos;
  config["vocab_size"] = a.vocab_size ? ojson(*a.vocab_size) : ojson(nullptr);
  Outputs out("rank", c, config);
  out.input(a.features);
  out.input(a.ensemble_scores);
  out.input(a.pool_state);
  std::ostringstream s;
  jsonl::write_scores(s, reports);
  out.add("scores.jsonl", s.str());
  out.commit("strategy=" + std::string(to_string(*strategy)) + ", items=" + std::to_string(reports.size()));
}

// ---- select ---------------------------------------------------------------

struct SelectArgs {
  std::string scores, clustering, features, pool_state, k = "auto";
  int phi = 3;
  std::optional<std::size_t> batch_size;
  double batch_fraction = 0.05;
  int max_iters = 100;
};

void run_select(const SelectArgs& a, const Common& c) {
  if (a.phi < 1) throw Error("--phi must be >= 1");
  if (a.clustering.empty() == a.features.empty())
    throw Error("exactly one of --clustering or --features is required");

  auto sin = open_input(a.scores);
  auto reports = jsonl::read_scores(sin, a.scores);

  Clustering clustering;
  std::string k_setting;
  if (!a.clustering.empty()) {
    auto cin = open_input(a.clustering);
    clustering = jsonl::read_clustering(cin, a.clustering);
    k_setting = "K=" + std::to_string(clustering.k);
  } else {
    auto fin = open_input(a.features);
    auto features = jsonl::read_features(fin, a.features);
    std::vector<FeatureVec> points;
    std::vector<std::string> ids;
    for (auto& [id, f] : features) {
      ids.push_back(id);
      points.push_back(std::move(f));
    }
    const int k = parse_k(a.k, points.size());
    clustering = kmeans_points(points, ids, k, c.seed, a.max_iters);
    k_setting = a.k == "auto" ? "K=ceil(N/20)=" + std::to_string(k) : "K=" + std::to_string(k);
  }

  int round = 1;
  if (!a.pool_state.empty()) {
    auto pin = open_input(a.pool_state);
    std::set<std::string> labeled;
    int max_round = -1;
    for (const auto& [id, r] : jsonl::read_pool_state_records(pin, a.pool_state)) {
      if (r) {
        labeled.insert(id);
        max_round = std::max(max_round, *r);
      }
    }
    round = max_round + 1;
    std::erase_if(reports, [&](const ScoreReport& r) { return labeled.count(r.item_id) > 0; });
  }

  const std::size_t n = clustering.assignment.size();
  const std::size_t batch = a.batch_size ? *a.batch_size : batch_size_for(n, a.batch_fraction);
  if (batch == 0) throw Error("batch size must be >= 1");
  if (batch > reports.size())
    throw Error("infeasible batch size " + std::to_string(batch) + ": only " + std::to_string(reports.size()) +
                " scored unlabeled items");
  auto selected = select_capped(reports, clustering, batch, a.phi);
  selected.round = round;

  ojson config;
  config["command"] = "select";
  config["phi"] = a.phi;
  config["k"] = a.k;
  config["batch_size"] = batch;
  config["seed"] = c.seed;
  config["max_iters"] = a.max_iters;
  Outputs out("select", c, config);
  out.input(a.scores);
  out.input(a.clustering);
  out.input(a.features);
  out.input(a.pool_state);
  std::ostringstream s;
  jsonl::write_batch(s, selected);
  out.add("batch.jsonl", s.str());
  if (a.clustering.empty()) {
    std::ostringstream cs;
    jsonl::write_clustering(cs, clustering);
    out.add("clustering.jsonl", cs.str());
  }
  out.commit("phi=" + std::to_string(a.phi) + ", " + k_setting + ", batch_size=" + std::to_string(batch) +
             ", relaxation_level=" + std::to_string(selected.relaxation_level));
}

// ---- kmeans ---------------------------------------------------------------

struct KmeansArgs {
  std::string features, k = "auto";
  int max_iters = 100;
};

void run_kmeans(const KmeansArgs& a, const Common& c) {
  auto fin = open_input(a.features);
  auto features = jsonl::read_features(fin, a.features);
  std::vector<FeatureVec> points;
  std::vector<std::string> ids;
  for (auto& [id, f] : features) {
    ids.push_back(id);
    points.push_back(std::move(f));
  }
  const int k = parse_k(a.k, points.size());
  auto clustering = kmeans_points(points, ids, k, c.seed, a.max_iters);

  ojson config;
  config["command"] = "kmeans";
  config["k"] = a.k;
  config["seed"] = c.seed;
  config["max_iters"] = a.max_iters;
  Outputs out("kmeans", c, config);
  out.input(a.features);
  std::ostringstream s;
  jsonl::write_clustering(s, clustering);
  out.add("clustering.jsonl", s.str());
  out.commit((a.k == "auto" ? "K=ceil(N/20)=" : "K=") + std::to_string(k) +
             ", iterations=" + std::to_string(clustering.inertia_trace.size()));
}

// ---- eval -----------------------------------------------------------------

struct LearnerArgs {
  int ensemble_size = 4;
  int samples_k = 8;
  double temperature = 0.8;
  int order = 2;
  double smoothing = 0.1;
  int buckets = 40;
  bool no_bootstrap = false;
  int max_len = 16;
  std::optional<std::int32_t> vocab_size;
};

void add_learner_flags(CLI::App* app, LearnerArgs& l) {
  app->add_option("--ensemble-size", l.ensemble_size, "ensemble members L")->envname("ALRANK_ENSEMBLE_SIZE");
  app->add_option("--samples-k", l.samples_k, "captions sampled per model K")->envname("ALRANK_SAMPLES_K");
  app->add_option("--temperature", l.temperature, "sampling temperature")->envname("ALRANK_TEMPERATURE");
  app->add_option("--order", l.order, "n-gram context length");
  app->add_option("--smoothing", l.smoothing, "add-alpha smoothing");
  app->add_option("--buckets", l.buckets, "feature-space condition buckets");
  app->add_flag("--no-bootstrap", l.no_bootstrap, "train every member on the full labeled set");
  app->add_option("--max-len", l.max_len, "maximum sampled caption length");
  app->add_option("--vocab-size", l.vocab_size, "vocabulary size (default: max token + 1)");
}

struct EvalArgs {
  std::string features, references, pool_state, val_features, val_references;
  int bleu_max_n = 4;
  LearnerArgs learner;
};

Pool read_pool(const std::string& features, const std::string& references) {
  auto fin = open_input(features);
  auto rin = open_input(references);
  return load_pool(jsonl::read_features(fin, features), jsonl::read_references(rin, references));
}

void run_eval(const EvalArgs& a, const Common& c) {
  if (a.val_features.empty() != a.val_references.empty())
    throw Error("--val-features and --val-references go together");
  Pool pool = read_pool(a.features, a.references);
  if (!a.pool_state.empty()) {
    auto sin = open_input(a.pool_state);
    jsonl::read_pool_state(sin, pool, a.pool_state);
  }
  std::vector<const ItemRecord*> train;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (a.pool_state.empty() || pool.is_labeled(i)) train.push_back(&pool.item(i));
  if (train.empty()) throw Error("no labeled items to train on");

  std::vector<ItemRecord> val;
  if (a.val_features.empty()) {
    val = pool.items();
  } else {
    val = read_pool(a.val_features, a.val_references).items();
  }
  std::vector<const ItemRecord*> all = train;
  for (const auto& it : val) all.push_back(&it);

  ToyLearnerConfig lc;
  lc.order = a.learner.order;
  lc.vocab_size = a.learner.vocab_size ? *a.learner.vocab_size : vocab_from(all);
  lc.smoothing = a.learner.smoothing;
  lc.condition_buckets = a.learner.buckets;
  lc.ensemble_size = a.learner.ensemble_size;
  lc.bootstrap = !a.learner.no_bootstrap;
  lc.seed = substream_seed(c.seed, "learner");
  SamplingConfig sc;
  sc.samples = a.learner.samples_k;
  sc.temperature = a.learner.temperature;
  sc.max_len = a.learner.max_len;
  if (sc.samples < 1 || !(sc.temperature > 0.0) || sc.max_len < 1) throw Error("invalid sampling settings");

  const auto ensemble = train_toy_ensemble(train, lc);
  const auto result = evaluate(ensemble, val, sc, substream_seed(c.seed, "eval"), a.bleu_max_n);

  ojson config;
  config["command"] = "eval";
  config["seed"] = c.seed;
  config["ensemble_size"] = lc.ensemble_size;
  config["samples_k"] = sc.samples;
  config["temperature"] = sc.temperature;
  config["max_len"] = sc.max_len;
  config["order"] = lc.order;
  config["smoothing"] = lc.smoothing;
  config["buckets"] = lc.condition_buckets;
  config["bootstrap"] = lc.bootstrap;
  config["vocab_size"] = lc.vocab_size;
  config["bleu_max_n"] = a.bleu_max_n;
  Outputs out("eval", c, config);
  for (const auto* p : {&a.features, &a.references, &a.pool_state, &a.val_features, &a.val_references})
    out.input(*p);

  ojson report;
  report["bleu"] = result.bleu;
  report["mean_loglik"] = result.mean_loglik;
  report["member_bleu"] = result.member_bleu;
  report["member_loglik"] = result.member_loglik;
  report["train_items"] = train.size();
  report["eval_items"] = val.size();
  out.add("eval.json", report.dump(2) + "\n");
  out.commit("L=" + std::to_string(lc.ensemble_size) + ", K=" + std::to_string(sc.samples) +
             ", temperature=" + ojson(sc.temperature).dump() + ", vocab_size=" + std::to_string(lc.vocab_size));
}

// ---- synth / export ---------------------------------------------------------

struct SynthArgs {
  SyntheticConfig config;
};

void write_pool_files(Outputs& out, const std::string& prefix, const Pool& pool) {
  std::ostringstream f, r;
  jsonl::write_features(f, pool);
  jsonl::write_references(r, pool);
  out.add(prefix + "features.jsonl", f.str());
  out.add(prefix + "references.jsonl", r.str());
}

void run_synth(SynthArgs a, const Common& c) {
  a.config.seed = c.seed;
  const auto data = make_synthetic(a.config);
  const auto& g = a.config;
  ojson config;
  config["command"] = "synth";
  config["synthetic"] = {{"n_items", g.n_items},           {"n_val", g.n_val},
                         {"n_components", g.n_components}, {"dim", g.dim},
                         {"vocab_size", g.vocab_size},     {"seed", g.seed}};
  Outputs out("synth", c, config);
  write_pool_files(out, "", data.pool);
  write_pool_files(out, "val_", Pool(data.validation));
  out.commit("N=" + std::to_string(g.n_items) + ", components=" + std::to_string(g.n_components));
}

struct ExportArgs {
  std::string features, references, pool_state;
  LearnerArgs learner;
};

void run_export(const ExportArgs& a, const Common& c) {
  Pool pool = read_pool(a.features, a.references);
  if (!a.pool_state.empty()) {
    auto sin = open_input(a.pool_state);
    jsonl::read_pool_state(sin, pool, a.pool_state);
  }
  std::vector<const ItemRecord*> train, targets;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (a.pool_state.empty() || pool.is_labeled(i)) train.push_back(&pool.item(i));
    if (a.pool_state.empty() || !pool.is_labeled(i)) targets.push_back(&pool.item(i));
  }
  if (train.empty()) throw Error("no labeled items to train on");

  ToyLearnerConfig lc;
  lc.order = a.learner.order;
  lc.vocab_size = a.learner.vocab_size ? *a.learner.vocab_size : vocab_from(train);
  lc.smoothing = a.learner.smoothing;
  lc.condition_buckets = a.learner.buckets;
  lc.ensemble_size = a.learner.ensemble_size;
  lc.bootstrap = !a.learner.no_bootstrap;
  lc.seed = substream_seed(c.seed, "learner");
  SamplingConfig sc;
  sc.samples = a.learner.samples_k;
  sc.temperature = a.learner.temperature;
  sc.max_len = a.learner.max_len;
  const auto ensemble = train_toy_ensemble(train, lc);

  std::map<std::string, EnsembleCaptionSet> sets;
  const auto sampling_seed = substream_seed(c.seed, "sampling");
  for (std::size_t i = 0; i < targets.size(); ++i)
    sets.emplace(targets[i]->id, sample_captions(ensemble, *targets[i], sc, substream_seed(sampling_seed, "item", i)));

  ojson config;
  config["command"] = "export";
  config["seed"] = c.seed;
  config["ensemble_size"] = lc.ensemble_size;
  config["samples_k"] = sc.samples;
  config["temperature"] = sc.temperature;
  config["max_len"] = sc.max_len;
  config["order"] = lc.order;
  config["smoothing"] = lc.smoothing;
  config["buckets"] = lc.condition_buckets;
  config["bootstrap"] = lc.bootstrap;
  config["vocab_size"] = lc.vocab_size;
  Outputs out("export", c, config);
  out.input(a.features);
  out.input(a.references);
  out.input(a.pool_state);
  std::ostringstream s;
  jsonl::write_ensemble_scores(s, sets);
  out.add("ensemble_scores.jsonl", s.str());
  out.commit("L=" + std::to_string(lc.ensemble_size) + ", K=" + std::to_string(sc.samples) +
             ", vocab_size=" + std::to_string(lc.vocab_size) + ", items=" + std::to_string(sets.size()));
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string config, strategy;
  std::optional<int> phi, samples_k, ensemble_size;
  std::optional<double> temperature;
  std::optional<std::uint64_t> seed;
};

void check_keys(const nlohmann::json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error("config: " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw Error("config: unknown key \"" + where + (where.empty() ? "" : ".") + key + "\"");
  }
}

template <class T>
void read_key(const nlohmann::json& obj, const char* key, T& target, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error("config: \"" + where + key + "\" has the wrong type");
  }
}

struct SimulationPlan {
  std::vector<StrategySpec> strategies;
  RunConfig run;
  SyntheticConfig synthetic;
  std::vector<std::uint64_t> seeds{1, 2};
  std::vector<int> ensemble_sizes;
  std::string features, references, val_features, val_references;
};

SimulationPlan load_plan(const SimulateArgs& a) {
  SimulationPlan plan;
  nlohmann::json cfg = nlohmann::json::object();
  if (!a.config.empty()) {
    auto in = open_input(a.config);
    try {
      cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(a.config + ": " + e.what());
    }
  }
  check_keys(cfg, "", {"strategy", "phi", "K_samples", "temperature", "ensemble_size", "seeds", "rounds_fraction",
                       "seed_fraction", "clusters", "kmeans_max_iters", "bleu_max_n", "max_len", "learner",
                       "synthetic", "data", "ensemble_sizes"});
  std::vector<std::string> names{"random", "cluster-divergence"};
  if (cfg.contains("strategy")) {
    if (cfg["strategy"].is_string())
      names = {cfg["strategy"].get<std::string>()};
    else
      read_key(cfg, "strategy", names, "");
  }
  if (!a.strategy.empty()) names = {a.strategy};
  for (const auto& n : names) {
    auto spec = parse_strategy_spec(n);
    if (!spec) throw Error("config: unknown strategy \"" + n + "\" (try --strategy list)");
    plan.strategies.push_back(*spec);
  }

  auto& r = plan.run;
  read_key(cfg, "phi", r.phi, "");
  read_key(cfg, "K_samples", r.sampling.samples, "");
  read_key(cfg, "temperature", r.sampling.temperature, "");
  read_key(cfg, "max_len", r.sampling.max_len, "");
  read_key(cfg, "ensemble_size", r.learner.ensemble_size, "");
  read_key(cfg, "rounds_fraction", r.rounds_fraction, "");
  read_key(cfg, "seed_fraction", r.seed_fraction, "");
  read_key(cfg, "clusters", r.clusters, "");
  read_key(cfg, "kmeans_max_iters", r.kmeans_max_iters, "");
  read_key(cfg, "bleu_max_n", r.bleu_max_n, "");
  read_key(cfg, "seeds", plan.seeds, "");
  read_key(cfg, "ensemble_sizes", plan.ensemble_sizes, "");
  if (a.phi) r.phi = *a.phi;
  if (a.samples_k) r.sampling.samples = *a.samples_k;
  if (a.temperature) r.sampling.temperature = *a.temperature;
  if (a.ensemble_size) r.learner.ensemble_size = *a.ensemble_size;
  if (a.seed) plan.seeds = {*a.seed};

  if (cfg.contains("learner")) {
    const auto& l = cfg["learner"];
    check_keys(l, "learner", {"order", "smoothing", "condition_buckets", "bootstrap", "vocab_size"});
    read_key(l, "order", r.learner.order, "learner.");
    read_key(l, "smoothing", r.learner.smoothing, "learner.");
    read_key(l, "condition_buckets", r.learner.condition_buckets, "learner.");
    read_key(l, "bootstrap", r.learner.bootstrap, "learner.");
    read_key(l, "vocab_size", r.learner.vocab_size, "learner.");
  }
  auto& s = plan.synthetic;
  if (cfg.contains("synthetic")) {
    const auto& g = cfg["synthetic"];
    check_keys(g, "synthetic", {"n_items", "n_val", "n_components", "dim", "center_scale", "feature_noise",
                                "weight_exponent", "template_min", "template_max", "n_refs", "noise_min",
                                "noise_max", "blend_max", "vocab_size", "seed"});
    read_key(g, "n_items", s.n_items, "synthetic.");
    read_key(g, "n_val", s.n_val, "synthetic.");
    read_key(g, "n_components", s.n_components, "synthetic.");
    read_key(g, "dim", s.dim, "synthetic.");
    read_key(g, "center_scale", s.center_scale, "synthetic.");
    read_key(g, "feature_noise", s.feature_noise, "synthetic.");
    read_key(g, "weight_exponent", s.weight_exponent, "synthetic.");
    read_key(g, "template_min", s.template_min, "synthetic.");
    read_key(g, "template_max", s.template_max, "synthetic.");
    read_key(g, "n_refs", s.n_refs, "synthetic.");
    read_key(g, "noise_min", s.noise_min, "synthetic.");
    read_key(g, "noise_max", s.noise_max, "synthetic.");
    read_key(g, "blend_max", s.blend_max, "synthetic.");
    read_key(g, "vocab_size", s.vocab_size, "synthetic.");
    read_key(g, "seed", s.seed, "synthetic.");
  }
  if (cfg.contains("data")) {
    const auto& d = cfg["data"];
    check_keys(d, "data", {"features", "references", "val_features", "val_references"});
    read_key(d, "features", plan.features, "data.");
    read_key(d, "references", plan.references, "data.");
    read_key(d, "val_features", plan.val_features, "data.");
    read_key(d, "val_references", plan.val_references, "data.");
    if (plan.features.empty() || plan.references.empty() || plan.val_features.empty() ||
        plan.val_references.empty())
      throw Error("config: \"data\" needs features, references, val_features and val_references");
  }

  if (plan.seeds.empty()) throw Error("config: \"seeds\" must be non-empty");
  if (r.phi < 1) throw Error("config: \"phi\" must be >= 1");
  if (r.sampling.samples < 1) throw Error("config: \"K_samples\" must be >= 1");
  if (!(r.sampling.temperature > 0.0)) throw Error("config: \"temperature\" must be > 0");
  if (r.sampling.max_len < 1) throw Error("config: \"max_len\" must be >= 1");
  if (!(r.rounds_fraction > 0.0 && r.rounds_fraction <= 1.0))
    throw Error("config: \"rounds_fraction\" must lie in (0, 1]");
  if (!(r.seed_fraction > 0.0 && r.seed_fraction <= 1.0)) throw Error("config: \"seed_fraction\" must lie in (0, 1]");
  if (r.clusters < 0) throw Error("config: \"clusters\" must be >= 0 (0 means ceil(N/20))");
  for (int l : plan.ensemble_sizes)
    if (l < 2) throw Error("config: \"ensemble_sizes\" entries must be >= 2");
  return plan;
}

ojson plan_json(const SimulationPlan& p) {
  ojson j;
  j["command"] = "simulate";
  std::vector<std::string> names;
  for (const auto& s : p.strategies) names.push_back(s.name());
  j["strategy"] = names;
  j["phi"] = p.run.phi;
  j["K_samples"] = p.run.sampling.samples;
  j["temperature"] = p.run.sampling.temperature;
  j["max_len"] = p.run.sampling.max_len;
  j["ensemble_size"] = p.run.learner.ensemble_size;
  j["seeds"] = p.seeds;
  j["rounds_fraction"] = p.run.rounds_fraction;
  j["seed_fraction"] = p.run.seed_fraction;
  j["clusters"] = p.run.clusters;
  j["kmeans_max_iters"] = p.run.kmeans_max_iters;
  j["bleu_max_n"] = p.run.bleu_max_n;
  j["ensemble_sizes"] = p.ensemble_sizes;
  const auto& l = p.run.learner;
  j["learner"] = {{"order", l.order},
                  {"smoothing", l.smoothing},
                  {"condition_buckets", l.condition_buckets},
                  {"bootstrap", l.bootstrap},
                  {"vocab_size", l.vocab_size}};
  if (p.features.empty()) {
    const auto& s = p.synthetic;
    j["synthetic"] = {{"n_items", s.n_items},           {"n_val", s.n_val},
                      {"n_components", s.n_components}, {"dim", s.dim},
                      {"center_scale", s.center_scale}, {"feature_noise", s.feature_noise},
                      {"weight_exponent", s.weight_exponent}, {"template_min", s.template_min},
                      {"template_max", s.template_max}, {"n_refs", s.n_refs},
                      {"noise_min", s.noise_min},       {"noise_max", s.noise_max},
                      {"blend_max", s.blend_max},       {"vocab_size", s.vocab_size},
                      {"seed", s.seed}};
  }
  return j;
}

void run_simulate(const SimulateArgs& a, Common c) {
  if (a.strategy == "list") {
    for (const auto& n : strategy_names()) std::cout << n << '\n';
    return;
  }
  auto plan = load_plan(a);
  Pool pool;
  std::vector<ItemRecord> val;
  if (plan.features.empty()) {
    auto data = make_synthetic(plan.synthetic);
    pool = std::move(data.pool);
    val = std::move(data.validation);
    plan.run.learner.vocab_size = plan.synthetic.vocab_size;
  } else {
    pool = read_pool(plan.features, plan.references);
    val = read_pool(plan.val_features, plan.val_references).items();
    std::vector<const ItemRecord*> all;
    for (const auto& it : pool.items()) all.push_back(&it);
    for (const auto& it : val) all.push_back(&it);
    const auto inferred = vocab_from(all);
    if (plan.run.learner.vocab_size < inferred) plan.run.learner.vocab_size = inferred;
  }
  plan.run.learner.validate();

  std::vector<LearningCurve> curves;
  for (const auto& spec : plan.strategies) {
    plan.run.strategy = spec;
    if (plan.ensemble_sizes.empty()) {
      curves.push_back(run_active_learning(pool, val, plan.run, plan.seeds));
    } else {
      for (auto& curve : ensemble_size_sweep(pool, val, plan.ensemble_sizes, plan.run, plan.seeds))
        curves.push_back(std::move(curve));
    }
  }

  c.seed = plan.seeds.front();
  Outputs out("simulate", c, plan_json(plan));
  out.input(a.config);
  for (const auto* p : {&plan.features, &plan.references, &plan.val_features, &plan.val_references})
    out.input(*p);
  std::ostringstream curve_csv, summary_csv;
  write_curve_csv(curve_csv, curves);
  write_summary_csv(summary_csv, curves);
  out.add("curves.csv", curve_csv.str());
  out.add("summary.csv", summary_csv.str());

  std::string settings = "phi=" + std::to_string(plan.run.phi) + ", K=" +
                         (plan.run.clusters == 0 ? std::string("ceil(N/20)") : std::to_string(plan.run.clusters)) +
                         ", seeds=" + std::to_string(plan.seeds.size()) + ", N=" + std::to_string(pool.size());
  out.commit(settings);
  for (const auto& curve : curves)
    std::printf("%-24s fraction_to_95%%=%.3f bleu_auc=%.4f clusters/round=%.2f\n", curve.strategy.c_str(),
                fraction_to_reach(curve), bleu_auc(curve), mean_clusters_selected(curve));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alrank: batch active-learning selection for sequence labeling"};
  app.set_version_flag("--version", ALRANK_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "root seed for every random stream")->envname("ALRANK_SEED");
  app.add_option("--out-dir", common.out_dir, "output directory")->envname("ALRANK_OUT_DIR");

  RankArgs rank;
  auto* rank_cmd = app.add_subcommand("rank", "score unlabeled items, best first");
  rank_cmd->add_option("--features", rank.features, "feature JSONL")->required()->envname("ALRANK_FEATURES");
  rank_cmd->add_option("--ensemble-scores", rank.ensemble_scores, "ensemble-scores JSONL")
      ->envname("ALRANK_ENSEMBLE_SCORES");
  rank_cmd->add_option("--strategy", rank.strategy, "random|entropy-mc|entropy|likelihood|agreement|divergence")
      ->required()
      ->envname("ALRANK_STRATEGY");
  rank_cmd->add_option("--pool-state", rank.pool_state, "pool-state JSONL; labeled items are skipped");
  rank_cmd->add_option("--vocab-size", rank.vocab_size, "vocabulary size (default: max token + 1)")
      ->envname("ALRANK_VOCAB_SIZE");
  rank_cmd->add_option("--model", rank.model, "model index for single-model strategies");
  rank_cmd->add_option("--eos", rank.eos, "end-of-sequence token excluded from caption length, or none");

  SelectArgs sel;
  auto* sel_cmd = app.add_subcommand("select", "cluster-capped batch selection from a score file");
  sel_cmd->add_option("--scores", sel.scores, "score JSONL")->required()->envname("ALRANK_SCORES");
  sel_cmd->add_option("--clustering", sel.clustering, "clustering JSONL")->envname("ALRANK_CLUSTERING");
  sel_cmd->add_option("--features", sel.features, "feature JSONL to cluster when no --clustering is given");
  sel_cmd->add_option("--k", sel.k, "cluster count or auto")->envname("ALRANK_K");
  sel_cmd->add_option("--max-iters", sel.max_iters, "Lloyd iteration limit");
  sel_cmd->add_option("--phi", sel.phi, "per-cluster cap")->envname("ALRANK_PHI");
  auto* bs = sel_cmd->add_option("--batch-size", sel.batch_size, "items to select")->envname("ALRANK_BATCH_SIZE");
  sel_cmd->add_option("--batch-fraction", sel.batch_fraction, "batch size as a fraction of the pool")
      ->envname("ALRANK_BATCH_FRACTION")
      ->excludes(bs);
  sel_cmd->add_option("--pool-state", sel.pool_state, "pool-state JSONL; labeled items are skipped");

  KmeansArgs km;
  auto* km_cmd = app.add_subcommand("kmeans", "cluster pooled features");
  km_cmd->add_option("--features", km.features, "feature JSONL")->required()->envname("ALRANK_FEATURES");
  km_cmd->add_option("--k", km.k, "cluster count or auto")->envname("ALRANK_K");
  km_cmd->add_option("--max-iters", km.max_iters, "Lloyd iteration limit");

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "train the toy ensemble and report BLEU and log-likelihood");
  ev_cmd->add_option("--features", ev.features, "training feature JSONL")->required();
  ev_cmd->add_option("--references", ev.references, "training reference JSONL")->required();
  ev_cmd->add_option("--pool-state", ev.pool_state, "train only on the labeled items of this state");
  ev_cmd->add_option("--val-features", ev.val_features, "evaluation feature JSONL (default: training set)");
  ev_cmd->add_option("--val-references", ev.val_references, "evaluation reference JSONL");
  ev_cmd->add_option("--bleu-max-n", ev.bleu_max_n, "largest BLEU n-gram order");
  add_learner_flags(ev_cmd, ev.learner);

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "write a synthetic pool and validation set as JSONL");
  syn_cmd->add_option("--n-items", syn.config.n_items, "pool size");
  syn_cmd->add_option("--n-val", syn.config.n_val, "validation size");
  syn_cmd->add_option("--components", syn.config.n_components, "mixture components");
  syn_cmd->add_option("--dim", syn.config.dim, "feature dimension");
  syn_cmd->add_option("--vocab-size", syn.config.vocab_size, "vocabulary size");
  syn_cmd->add_option("--refs", syn.config.n_refs, "references per item");

  ExportArgs ex;
  auto* ex_cmd = app.add_subcommand("export", "write toy-ensemble ensemble-scores for unlabeled items");
  ex_cmd->add_option("--features", ex.features, "feature JSONL")->required();
  ex_cmd->add_option("--references", ex.references, "reference JSONL")->required();
  ex_cmd->add_option("--pool-state", ex.pool_state, "train on labeled items, export unlabeled ones");
  add_learner_flags(ex_cmd, ex.learner);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run the active-learning loop and write learning curves");
  sim_cmd->add_option("--config", sim.config, "run config JSON")->envname("ALRANK_CONFIG");
  sim_cmd->add_option("--strategy", sim.strategy, "strategy name, or \"list\"")->envname("ALRANK_STRATEGY");
  sim_cmd->add_option("--phi", sim.phi, "per-cluster cap")->envname("ALRANK_PHI");
  sim_cmd->add_option("--samples-k", sim.samples_k, "captions sampled per model K")->envname("ALRANK_SAMPLES_K");
  sim_cmd->add_option("--temperature", sim.temperature, "sampling temperature")->envname("ALRANK_TEMPERATURE");
  sim_cmd->add_option("--ensemble-size", sim.ensemble_size, "ensemble members L")
      ->envname("ALRANK_ENSEMBLE_SIZE");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*rank_cmd) run_rank(rank, common);
    if (*sel_cmd) run_select(sel, common);
    if (*km_cmd) run_kmeans(km, common);
    if (*ev_cmd) run_eval(ev, common);
    if (*syn_cmd) run_synth(syn, common);
    if (*ex_cmd) run_export(ex, common);
    if (*sim_cmd) {
      // A seed given on the command line replaces the config's seed list.
      if (app.get_option("--seed")->count() > 0 || std::getenv("ALRANK_SEED")) sim.seed = common.seed;
      run_simulate(sim, common);
    }
  } catch (const std::exception& e) {
    std::cerr << "alrank: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
