#include "tablefill/config.hpp"

#include <fstream>

#include "tablefill/error.hpp"
#include "tablefill/path_search.hpp"

namespace tablefill {

using nlohmann::json;

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"graph", "", "knowledge graph triples (TSV: subject, predicate, object)"},
      {"entity_meta", "", "entity metadata (JSONL: mid, name, description, notable_types, rdf_types)"},
      {"predicate_meta", "", "predicate metadata (JSONL: name, expected_target_types)"},
      {"embeddings", "", "pre-trained word vectors (token v1 ... vD per line)"},
      {"corpus", "", "web tables (JSONL)"},
      {"url_to_mid", "", "cell url to entity id map (TSV)"},
      {"entity_types", "", "entity types (TSV: mid, type...)"},
      {"fine_types", "", "type to fine-grained type map (TSV)"},
      {"dataset_dir", "dataset", "annotated dataset directory"},
      {"selector_model", "", "trained selector model file"},
      {"ranker_model", "", "trained ranker model file; empty ranks candidates by seeded shuffle"},
      {"query", "", "tabular query file for complete (JSON)"},
      {"output", "", "output file or directory of the subcommand"},
      {"split", "test", "dataset split to evaluate: train, validation or test"},
      {"selector", "linear", "chain selector: oracle, random, jacsim, linear or embedding"},
      {"max_path_length", 3, "maximum meta-path length"},
      {"degree_cap", 500, "nodes with more edges are not expanded during path search"},
      {"banned_prefixes", default_banned_prefixes(), "predicate prefixes that may not start a path"},
      {"max_rows", 10000, "query budget: maximum result rows"},
      {"max_steps", 2000000, "query budget: maximum node expansions"},
      {"negatives_k", 10, "k; training tables are padded to k-1 negatives"},
      {"min_rows", 3, "minimum linked rows per table"},
      {"linear_epochs", 300, "linear selector: gradient steps"},
      {"linear_learning_rate", 0.0, "linear selector: step size (0 = automatic)"},
      {"linear_l2", 1e-4, "linear selector: L2 weight"},
      {"embedding_margin", 0.25, "embedding selector: hinge margin"},
      {"embedding_l2", 5e-6, "embedding selector: L2 weight"},
      {"embedding_learning_rate", 1e-5, "embedding selector: learning rate"},
      {"embedding_batch_size", 250, "embedding selector: tables per mini-batch"},
      {"embedding_epochs", 2000, "embedding selector: epochs"},
      {"embedding_negatives", 9, "embedding selector: negatives per positive"},
      {"embedding_optimizer", "sgd", "embedding selector: sgd or adam"},
      {"embedding_input_dim", 100, "embedding selector: token embedding width"},
      {"embedding_dim_qis", 100, "embedding selector: query intent encoder width"},
      {"embedding_dim_cn", 25, "embedding selector: column name encoder width"},
      {"embedding_dim_set", 100, "embedding selector: subject type encoder width"},
      {"embedding_dim_chain", 250, "embedding selector: chain encoder width"},
      {"embedding_init_scale", 0.1, "embedding selector: embedding init range"},
      {"ranker_trees", 100, "ranker: boosted trees"},
      {"ranker_max_depth", 4, "ranker: tree depth"},
      {"ranker_learning_rate", 0.1, "ranker: shrinkage"},
      {"ranker_sigma", 1.0, "ranker: pairwise sigmoid sharpness"},
      {"ranker_min_leaf", 1, "ranker: minimum samples per leaf"},
      {"synthetic_tables", 100, "generate-synthetic: number of tables"},
      {"seed", 42, "random seed"},
      {"threads", 1, "worker threads"},
  };
  return schema;
}

namespace {

const ConfigKey& find_key(const std::string& key) {
  for (const auto& k : config_schema()) {
    if (k.name == key) return k;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

bool same_kind(const json& def, const json& value) {
  if (def.is_string()) return value.is_string();
  if (def.is_array()) {
    if (!value.is_array()) return false;
    for (const auto& v : value) {
      if (!v.is_string()) return false;
    }
    return true;
  }
  if (def.is_number_unsigned() || def.is_number_integer()) return value.is_number_unsigned();
  if (def.is_number_float()) return value.is_number();
  if (def.is_boolean()) return value.is_boolean();
  return false;
}

}  // namespace

RunConfig::RunConfig() : values_(json::object()) {
  for (const auto& k : config_schema()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const json& value) {
  const auto& k = find_key(key);
  if (!same_kind(k.default_value, value)) {
    throw ConfigError("config key '" + key + "' expects a value like " + k.default_value.dump() + ", got " + value.dump());
  }
  values_[key] = k.default_value.is_number_float() ? json(value.get<double>()) : value;
}

void RunConfig::merge(const json& object) {
  if (!object.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : object.items()) set(key, value);
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  merge(j);
}

void RunConfig::set_from_string(const std::string& key, const std::string& text) {
  const auto& k = find_key(key);
  const json& def = k.default_value;
  if (def.is_string()) {
    set(key, text);
  } else if (def.is_array()) {
    json list = json::array();
    for (const auto& part : split(text, ',')) {
      const auto t = trim(part);
      if (!t.empty()) list.push_back(std::string(t));
    }
    set(key, list);
  } else {
    json parsed;
    try {
      parsed = json::parse(text);
    } catch (const json::exception&) {
      throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
    }
    set(key, parsed);
  }
}

const json& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return *it;
}

QueryBudget RunConfig::budget() const {
  QueryBudget b{size("max_rows"), size("max_steps")};
  b.validate();
  return b;
}

PathSearchOptions RunConfig::search_options() const {
  PathSearchOptions o;
  o.max_len = size("max_path_length");
  o.degree_cap = size("degree_cap");
  o.banned_prefixes = strings("banned_prefixes");
  return o;
}

BuildOptions RunConfig::build_options() const {
  BuildOptions o;
  o.search = search_options();
  o.budget = budget();
  o.negatives_k = size("negatives_k");
  o.min_rows = size("min_rows");
  o.seed = u64("seed");
  o.threads = size("threads");
  return o;
}

LinearConfig RunConfig::linear_config() const {
  return LinearConfig{size("linear_epochs"), real("linear_learning_rate"), real("linear_l2")};
}

EmbeddingConfig RunConfig::embedding_config() const {
  EmbeddingConfig c;
  c.dims = EmbeddingDims{size("embedding_input_dim"), size("embedding_dim_qis"), size("embedding_dim_cn"),
                         size("embedding_dim_set"), size("embedding_dim_chain")};
  c.margin = real("embedding_margin");
  c.l2 = real("embedding_l2");
  c.learning_rate = real("embedding_learning_rate");
  c.batch_size = size("embedding_batch_size");
  c.epochs = size("embedding_epochs");
  c.negatives = size("embedding_negatives");
  const auto opt = str("embedding_optimizer");
  if (opt == "sgd") {
    c.optimizer = OptimizerKind::kSgd;
  } else if (opt == "adam") {
    c.optimizer = OptimizerKind::kAdam;
  } else {
    throw ConfigError("embedding_optimizer must be sgd or adam, got '" + opt + "'");
  }
  c.init_scale = real("embedding_init_scale");
  c.seed = u64("seed");
  return c;
}

RankerConfig RunConfig::ranker_config() const {
  RankerConfig c{size("ranker_trees"), size("ranker_max_depth"), real("ranker_learning_rate"), real("ranker_sigma"),
                 size("ranker_min_leaf")};
  c.validate();
  return c;
}

}  // namespace tablefill
