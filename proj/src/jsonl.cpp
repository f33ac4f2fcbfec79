#include "alrank/jsonl.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <set>

#include "alrank/error.hpp"
#include "json.hpp"

namespace alrank::jsonl {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

class LineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& why) { throw LineError(why); }

// Calls fn(object) for every non-blank line, decorating errors with the line number.
void for_each_line(std::istream& in, const std::string& source, const std::function<void(const json&, std::size_t)>& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json obj = json::parse(line);
      if (!obj.is_object()) fail("expected a JSON object");
      fn(obj, lineno);
    } catch (const json::exception& e) {
      throw Error(source + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const LineError& e) {
      throw Error(source + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(std::string("missing field \"") + key + "\"");
  return *it;
}

std::string string_field(const json& obj, const char* key) {
  const auto& v = field(obj, key);
  if (!v.is_string()) fail(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::int64_t int_value(const json& v, const char* what) {
  if (!v.is_number_integer()) fail(std::string(what) + " must be an integer");
  return v.get<std::int64_t>();
}

double real_value(const json& v, const char* what) {
  if (!v.is_number()) fail(std::string(what) + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(std::string(what) + " must be finite");
  return x;
}

TokenSeq token_seq(const json& v, const char* what) {
  if (!v.is_array()) fail(std::string(what) + " must be an array of integers");
  TokenSeq out;
  out.reserve(v.size());
  for (const auto& t : v) {
    const auto tok = int_value(t, what);
    if (tok < 0 || tok > std::numeric_limits<Token>::max()) fail(std::string(what) + " token out of range");
    out.push_back(static_cast<Token>(tok));
  }
  return out;
}

void emit(std::ostream& out, const ojson& obj) { out << obj.dump() << '\n'; }

}  // namespace

FeatureRecords read_features(std::istream& in, const std::string& source) {
  FeatureRecords out;
  for_each_line(in, source, [&](const json& obj, [[maybe_unused]] std::size_t lineno) {
    auto id = string_field(obj, "id");
    const auto& f = field(obj, "features");
    if (!f.is_array() || f.empty()) fail("\"features\" must be a non-empty array");
    FeatureVec v;
    v.reserve(f.size());
    for (const auto& x : f) v.push_back(real_value(x, "feature"));
    out.emplace_back(std::move(id), std::move(v));
  });
  return out;
}

ReferenceRecords read_references(std::istream& in, const std::string& source) {
  ReferenceRecords out;
  for_each_line(in, source, [&](const json& obj, [[maybe_unused]] std::size_t lineno) {
    auto id = string_field(obj, "id");
    const auto& r = field(obj, "references");
    if (!r.is_array()) fail("\"references\" must be an array of token arrays");
    std::vector<TokenSeq> refs;
    for (const auto& seq : r) refs.push_back(token_seq(seq, "reference"));
    out.emplace_back(std::move(id), std::move(refs));
  });
  return out;
}

void write_features(std::ostream& out, const Pool& pool) {
  for (const auto& it : pool.items()) {
    ojson obj;
    obj["id"] = it.id;
    obj["features"] = it.features;
    emit(out, obj);
  }
}

void write_references(std::ostream& out, const Pool& pool) {
  for (const auto& it : pool.items()) {
    ojson obj;
    obj["id"] = it.id;
    obj["references"] = it.references;
    emit(out, obj);
  }
}

std::map<std::string, EnsembleCaptionSet> read_ensemble_scores(std::istream& in,
                                                               std::optional<std::int32_t> vocab_size,
                                                               const std::string& source,
                                                               double tolerance) {
  struct RawRow {
    std::vector<std::pair<Token, double>> entries;
    double rem;
  };
  struct RawSample {
    std::string id;
    int producer;
    TokenSeq tokens;
    std::vector<std::vector<RawRow>> cond;
    std::size_t line;
  };
  std::vector<RawSample> raw;
  Token max_token = 0;

  for_each_line(in, source, [&](const json& obj, [[maybe_unused]] std::size_t lineno) {
    RawSample s;
    s.line = lineno;
    s.id = string_field(obj, "id");
    const auto producer = int_value(field(obj, "producer"), "\"producer\"");
    if (producer < 0) fail("\"producer\" must be >= 0");
    s.producer = static_cast<int>(producer);
    s.tokens = token_seq(field(obj, "tokens"), "\"tokens\"");
    if (s.tokens.empty()) fail("\"tokens\" must be non-empty");
    for (Token t : s.tokens) max_token = std::max(max_token, t);
    const auto& cond = field(obj, "cond");
    if (!cond.is_array() || cond.empty()) fail("\"cond\" must be a non-empty array (one row per model)");
    for (const auto& model_row : cond) {
      if (!model_row.is_array() || model_row.size() != s.tokens.size())
        fail("each \"cond\" row must hold one distribution per token");
      std::vector<RawRow> row;
      for (const auto& d : model_row) {
        if (!d.is_object()) fail("distribution must be an object {t, p, rem}");
        const auto toks = token_seq(field(d, "t"), "\"t\"");
        const auto& probs = field(d, "p");
        if (!probs.is_array() || probs.size() != toks.size()) fail("\"t\" and \"p\" must have equal length");
        RawRow r;
        r.rem = real_value(field(d, "rem"), "\"rem\"");
        for (std::size_t i = 0; i < toks.size(); ++i) {
          r.entries.emplace_back(toks[i], real_value(probs[i], "probability"));
          max_token = std::max(max_token, toks[i]);
        }
        row.push_back(std::move(r));
      }
      s.cond.push_back(std::move(row));
    }
    raw.push_back(std::move(s));
  });

  const std::int32_t vocab = vocab_size.value_or(max_token + 1);
  std::map<std::string, EnsembleCaptionSet> sets;
  std::map<std::string, std::size_t> first_line;
  for (auto& s : raw) {
    const std::size_t line = s.line;
    auto& set = sets[s.id];
    if (set.item_id.empty()) {
      set.item_id = s.id;
      set.L = static_cast<int>(s.cond.size());
      first_line[s.id] = line;
    }
    try {
      if (static_cast<int>(s.cond.size()) != set.L)
        throw Error("item " + s.id + ": inconsistent number of cond rows");
      CaptionSample cs;
      cs.producer = s.producer;
      cs.tokens = std::move(s.tokens);
      for (auto& model_row : s.cond) {
        std::vector<TokenDistribution> row;
        for (auto& r : model_row)
          row.push_back(TokenDistribution::from_entries(std::move(r.entries), r.rem, vocab, tolerance));
        cs.cond.push_back(std::move(row));
      }
      for (Token t : cs.tokens)
        if (t >= vocab) throw Error("token " + std::to_string(t) + " outside vocabulary");
      set.samples.push_back(std::move(cs));
    } catch (const Error& e) {
      throw Error(source + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  for (auto& [id, set] : sets) {
    set.K = static_cast<int>(set.samples.size()) / std::max(set.L, 1);
    std::stable_sort(set.samples.begin(), set.samples.end(),
                     [](const CaptionSample& a, const CaptionSample& b) { return a.producer < b.producer; });
    try {
      set.validate();
    } catch (const Error& e) {
      throw Error(source + ":" + std::to_string(first_line[id]) + ": " + e.what());
    }
  }
  return sets;
}

void write_ensemble_scores(std::ostream& out, const std::map<std::string, EnsembleCaptionSet>& sets) {
  for (const auto& [id, set] : sets) {
    for (const auto& s : set.samples) {
      ojson obj;
      obj["id"] = id;
      obj["producer"] = s.producer;
      obj["tokens"] = s.tokens;
      ojson cond = ojson::array();
      for (const auto& row : s.cond) {
        ojson r = ojson::array();
        for (const auto& d : row) {
          ojson dist;
          std::vector<Token> t;
          std::vector<double> p;
          for (const auto& [tok, prob] : d.entries) {
            t.push_back(tok);
            p.push_back(prob);
          }
          dist["t"] = t;
          dist["p"] = p;
          dist["rem"] = d.remainder;
          r.push_back(std::move(dist));
        }
        cond.push_back(std::move(r));
      }
      obj["cond"] = std::move(cond);
      emit(out, obj);
    }
  }
}

void write_pool_state(std::ostream& out, const Pool& pool) {
  for (std::size_t i = 0; i < pool.size(); ++i) {
    ojson obj;
    obj["id"] = pool.item(i).id;
    obj["labeled"] = pool.is_labeled(i);
    if (auto r = pool.round_labeled(i))
      obj["round_labeled"] = *r;
    else
      obj["round_labeled"] = nullptr;
    emit(out, obj);
  }
}

PoolStateRecords read_pool_state_records(std::istream& in, const std::string& source) {
  PoolStateRecords out;
  std::set<std::string> seen;
  for_each_line(in, source, [&](const json& obj, [[maybe_unused]] std::size_t lineno) {
    auto id = string_field(obj, "id");
    if (!seen.insert(id).second) fail("duplicate id " + id);
    const auto& labeled = field(obj, "labeled");
    if (!labeled.is_boolean()) fail("\"labeled\" must be a boolean");
    const auto& rl = field(obj, "round_labeled");
    std::optional<int> round;
    if (labeled.get<bool>()) {
      const auto r = int_value(rl, "\"round_labeled\"");
      if (r < 0) fail("\"round_labeled\" must be >= 0");
      round = static_cast<int>(r);
    } else if (!rl.is_null()) {
      fail("unlabeled item must have \"round_labeled\": null");
    }
    out.emplace_back(std::move(id), round);
  });
  return out;
}

void read_pool_state(std::istream& in, Pool& pool, const std::string& source) {
  std::vector<std::optional<int>> state(pool.size());
  std::vector<bool> seen(pool.size(), false);
  int round = 0;
  for (auto& [id, r] : read_pool_state_records(in, source)) {
    auto idx = pool.index_of(id);
    if (!idx) throw Error(source + ": unknown id " + id);
    seen[*idx] = true;
    state[*idx] = r;
    if (r) round = std::max(round, *r);
  }
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (!seen[i]) throw Error(source + ": missing state for id " + pool.item(i).id);
  pool.restore_state(state, round);
}

void write_clustering(std::ostream& out, const Clustering& clustering) {
  ojson header;
  header["K"] = clustering.k;
  header["inertia"] = clustering.inertia;
  header["seed"] = clustering.seed;
  emit(out, header);
  for (const auto& [id, c] : clustering.assignment) {
    ojson obj;
    obj["id"] = id;
    obj["cluster"] = c;
    emit(out, obj);
  }
}

Clustering read_clustering(std::istream& in, const std::string& source) {
  Clustering c;
  bool have_header = false;
  for_each_line(in, source, [&](const json& obj, [[maybe_unused]] std::size_t lineno) {
    if (obj.contains("K")) {
      if (have_header) fail("second clustering header");
      have_header = true;
      const auto k = int_value(obj["K"], "\"K\"");
      if (k < 1) fail("\"K\" must be >= 1");
      c.k = static_cast<int>(k);
      c.inertia = real_value(field(obj, "inertia"), "\"inertia\"");
      c.seed = static_cast<std::uint64_t>(int_value(field(obj, "seed"), "\"seed\""));
      return;
    }
    if (!have_header) fail("clustering header {K, inertia, seed} must come first");
    const auto id = string_field(obj, "id");
    const auto cl = int_value(field(obj, "cluster"), "\"cluster\"");
    if (cl < 0 || cl >= c.k) fail("cluster index out of range for " + id);
    if (!c.assignment.emplace(id, static_cast<int>(cl)).second) fail("duplicate id " + id);
  });
  if (!have_header) throw Error(source + ": missing clustering header");
  return c;
}

void write_batch(std::ostream& out, const SelectionBatch& batch) {
  ojson obj;
  obj["round"] = batch.round;
  obj["strategy"] = batch.strategy;
  obj["ids"] = batch.ids;
  obj["relaxation_level"] = batch.relaxation_level;
  emit(out, obj);
}

std::vector<SelectionBatch> read_batches(std::istream& in, const std::string& source) {
  std::vector<SelectionBatch> out;
  for_each_line(in, source, [&](const json& obj, [[maybe_unused]] std::size_t lineno) {
    SelectionBatch b;
    b.round = static_cast<int>(int_value(field(obj, "round"), "\"round\""));
    b.strategy = string_field(obj, "strategy");
    const auto& ids = field(obj, "ids");
    if (!ids.is_array()) fail("\"ids\" must be an array of strings");
    for (const auto& id : ids) {
      if (!id.is_string()) fail("\"ids\" must be an array of strings");
      b.ids.push_back(id.get<std::string>());
    }
    b.relaxation_level = static_cast<int>(int_value(field(obj, "relaxation_level"), "\"relaxation_level\""));
    out.push_back(std::move(b));
  });
  return out;
}

void write_scores(std::ostream& out, const std::vector<ScoreReport>& reports) {
  for (const auto& r : reports) {
    ojson obj;
    obj["id"] = r.item_id;
    obj["strategy"] = std::string(to_string(r.strategy));
    obj["value"] = r.value;
    obj["direction"] = std::string(to_string(r.direction));
    emit(out, obj);
  }
}

std::vector<ScoreReport> read_scores(std::istream& in, const std::string& source) {
  std::vector<ScoreReport> out;
  for_each_line(in, source, [&](const json& obj, [[maybe_unused]] std::size_t lineno) {
    ScoreReport r;
    r.item_id = string_field(obj, "id");
    auto s = parse_strategy(string_field(obj, "strategy"));
    if (!s) fail("unknown strategy");
    r.strategy = *s;
    r.value = real_value(field(obj, "value"), "\"value\"");
    const auto dir = string_field(obj, "direction");
    if (dir != "maximize" && dir != "minimize") fail("\"direction\" must be maximize or minimize");
    r.direction = dir == "maximize" ? Direction::maximize : Direction::minimize;
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace alrank::jsonl
