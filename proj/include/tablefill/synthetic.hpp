#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tablefill/dataset.hpp"
#include "tablefill/kg_store.hpp"

namespace tablefill {

// Generator for a small, fully controlled corpus. Every table belongs to a
// topic family whose keyword appears in its title and in the predicates of
// its positive chain. Distractor chains come from noise families that are
// never positive. Some tables carry an orphan row that no chain reaches, and
// a few extra tables violate one filter each.
struct SyntheticOptions {
  std::size_t tables = 100;
  std::size_t min_rows = 4;
  std::size_t max_rows = 8;
  // Rows reached by the positive chain that are not in the table.
  std::size_t max_extra_rows = 2;
  double orphan_rate = 0.15;
  // Probability that a table has no distractor family.
  double clean_rate = 0.1;
  bool include_rejects = true;
  std::size_t hub_degree = 520;
  std::size_t embedding_dim = 8;
  std::uint64_t seed = 7;
};

struct SyntheticCorpus {
  std::vector<Triple> triples;
  std::vector<RawTable> tables;
  std::vector<std::pair<std::string, std::string>> url_to_mid;
  EntityTypes entity_types;
  FineTypeMap fine_types;
  std::vector<nlohmann::json> entity_meta;
  std::vector<nlohmann::json> predicate_meta;
  std::vector<std::pair<std::string, std::vector<double>>> embeddings;
};

SyntheticCorpus generate_synthetic(const SyntheticOptions& options);

// File names written by write_synthetic.
struct SyntheticLayout {
  static constexpr const char* kGraph = "graph.tsv";
  static constexpr const char* kCorpus = "corpus.jsonl";
  static constexpr const char* kUrlToMid = "url_to_mid.tsv";
  static constexpr const char* kEntityTypes = "entity_types.tsv";
  static constexpr const char* kFineTypes = "fine_types.tsv";
  static constexpr const char* kEntityMeta = "entity_meta.jsonl";
  static constexpr const char* kPredicateMeta = "predicate_meta.jsonl";
  static constexpr const char* kEmbeddings = "embeddings.txt";
};

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace tablefill
