#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tablefill/chain_query.hpp"
#include "tablefill/dataset.hpp"
#include "tablefill/embedding_scorer.hpp"
#include "tablefill/ranker.hpp"
#include "tablefill/selector.hpp"

namespace tablefill {

struct ConfigKey {
  std::string name;
  nlohmann::json default_value;
  std::string help;
};

// Every recognised key, in documentation order.
const std::vector<ConfigKey>& config_schema();

// Flat key/value run configuration. Values start at their defaults; a JSON
// file and then command-line flags override them. Unknown keys and values of
// the wrong type raise ConfigError.
class RunConfig {
 public:
  RunConfig();

  void merge_file(const std::filesystem::path& path);
  void merge(const nlohmann::json& object);
  void set(const std::string& key, const nlohmann::json& value);
  // Parses text according to the key's type (numbers, booleans, strings;
  // lists are comma-separated).
  void set_from_string(const std::string& key, const std::string& text);

  const nlohmann::json& get(const std::string& key) const;
  std::string str(const std::string& key) const { return get(key).get<std::string>(); }
  double real(const std::string& key) const { return get(key).get<double>(); }
  std::uint64_t u64(const std::string& key) const { return get(key).get<std::uint64_t>(); }
  std::size_t size(const std::string& key) const { return get(key).get<std::size_t>(); }
  std::vector<std::string> strings(const std::string& key) const { return get(key).get<std::vector<std::string>>(); }

  const nlohmann::json& values() const noexcept { return values_; }

  QueryBudget budget() const;
  PathSearchOptions search_options() const;
  BuildOptions build_options() const;
  LinearConfig linear_config() const;
  EmbeddingConfig embedding_config() const;
  RankerConfig ranker_config() const;

 private:
  nlohmann::json values_;
};

}  // namespace tablefill
