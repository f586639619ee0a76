#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "tablefill/chain_query.hpp"
#include "tablefill/kg_store.hpp"
#include "tablefill/metapath.hpp"
#include "tablefill/path_search.hpp"
#include "tablefill/text.hpp"
#include "tablefill/vocabulary.hpp"

namespace tablefill {

struct Cell {
  std::string text;
  std::vector<std::string> urls;
};

// One web table as found in the corpus. se_mid/se_name carry the pre-linked
// subject entity of the page title.
struct RawTable {
  std::string table_id;
  std::string page_title;
  std::string caption;
  std::vector<std::string> headers;
  std::vector<std::vector<Cell>> rows;
  std::string se_mid;
  std::string se_name;
};

using MidPair = std::pair<std::string, std::string>;
using UrlToMid = std::unordered_map<std::string, std::string>;
// mid -> knowledge-base types (e.g. "tv.tv_program").
using EntityTypes = std::map<std::string, std::vector<std::string>>;
// knowledge-base type -> fine-grained type (e.g. "f.broadcast_program").
using FineTypeMap = std::map<std::string, std::string>;

// Raised by per-table operations when the table must be dropped. reason()
// is a stable snake_case key used in build reports.
class TableRejected : public std::runtime_error {
 public:
  explicit TableRejected(std::string reason) : std::runtime_error("table rejected: " + reason), reason_(std::move(reason)) {}
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

inline constexpr std::string_view kNumberToken = "numtkn";
inline constexpr std::string_view kEmptyStringToken = "emptstr";

// Rows whose first two cells both link through their first url.
std::vector<MidPair> link_cells(const RawTable& raw, const UrlToMid& url_to_mid);

// Title + caption with the first case-insensitive occurrence of the entity
// name removed, tokenized, numbers mapped to "numtkn", empty result ["emptstr"].
TokenList build_qis(std::string_view page_title, std::string_view caption, std::string_view entity_name);

// Lowercase, tokenize, strip a trailing "es"/"s" from tokens of length >= 4.
TokenList normalize_header(std::string_view header);
std::pair<TokenList, TokenList> normalize_column_names(const std::vector<std::string>& headers);

// True for types whose first segment is base, common or type.
bool is_generic_type(std::string_view type);

// Least corpus-frequent non-generic type (ties: lexicographic), tokenized,
// followed by the tokens of its fine-grained type when mapped.
TokenList build_set(const std::vector<std::string>& types, const std::map<std::string, std::size_t>& type_frequency,
                    const FineTypeMap& fine_types);

struct ChainMetrics {
  std::size_t hits = 0;
  std::size_t retrieved = 0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

ChainMetrics chain_metrics_from_counts(std::size_t hits, std::size_t retrieved, std::size_t ground_truth);

std::variant<ChainMetrics, BudgetExceeded> compute_chain_metrics(const ChainPair& chain, const TupleSet& rr,
                                                                 const KnowledgeGraph& g, EntityId se,
                                                                 const QueryBudget& budget);

enum class ChainLabel { kPositive, kNegative };

struct LabeledChain {
  ChainPair chain;
  ChainLabel label = ChainLabel::kNegative;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  // Sampled from the global negative pool for training.
  bool padded = false;
};

// Sorts by (recall desc, total length asc, f1 desc, canonical asc) and labels
// every chain tying the leader on (recall, length, f1) positive.
// Throws TableRejected on an empty set.
std::vector<LabeledChain> annotate_chains(std::vector<LabeledChain> chains);

struct AnnotatedTable {
  std::string table_id;
  TokenList qis;
  TokenList cn1;
  TokenList cn2;
  std::string se;
  std::string se_name;
  TokenList set_tokens;
  std::vector<MidPair> rr;
  std::vector<LabeledChain> chains;

  std::size_t positive_count() const;
  std::size_t negative_count(bool include_padded = true) const;
  // First positive in annotation order.
  const LabeledChain& first_positive() const;
  bool is_positive(const ChainPair& chain) const;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

// Seeded 80/10/10 partition of the ids; each part is sorted.
DatasetSplit split_dataset(std::vector<std::string> table_ids, std::uint64_t seed);

TokenList chain_tokens(const ChainPair& chain);

// TB vocabulary from QIS and column-name tokens, KB vocabulary from SET and
// chain tokens, both counted over training and validation tables only.
std::pair<Vocabulary, Vocabulary> build_vocab(const std::vector<AnnotatedTable>& tables, const DatasetSplit& split);

// Brings every training table up to k-1 negatives by sampling negatives of
// other training tables. Validation and test tables are untouched.
// Throws ConfigError when padding is needed but the pool is empty.
void pad_negatives(std::vector<AnnotatedTable>& tables, const DatasetSplit& split, std::size_t k, std::uint64_t seed);

struct BuildOptions {
  PathSearchOptions search;
  QueryBudget budget;
  std::size_t negatives_k = 10;
  std::size_t min_rows = 3;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
};

struct BuildReport {
  std::size_t input_tables = 0;
  std::size_t accepted_tables = 0;
  std::map<std::string, std::size_t> rejected;
};

struct Dataset {
  std::vector<AnnotatedTable> tables;  // sorted by table_id
  DatasetSplit split;
  Vocabulary tb_vocab;
  Vocabulary kb_vocab;
  BuildReport report;

  const AnnotatedTable& table(std::string_view id) const;
  std::vector<const AnnotatedTable*> tables_in(const std::vector<std::string>& ids) const;
};

struct CorpusInputs {
  std::vector<RawTable> tables;
  UrlToMid url_to_mid;
  EntityTypes entity_types;
  FineTypeMap fine_types;
};

Dataset build_dataset(const CorpusInputs& inputs, const KnowledgeGraph& g, const EntityMetaStore& entity_meta,
                      const BuildOptions& options);

// Writes tables.jsonl, split.json, tb_vocab.txt, kb_vocab.txt, report.json.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

std::vector<RawTable> load_corpus(const std::filesystem::path& path);
std::vector<RawTable> load_corpus(std::istream& in, const std::string& source_name = "<stream>");
UrlToMid load_url_to_mid(const std::filesystem::path& path);
EntityTypes load_entity_types(const std::filesystem::path& path);
FineTypeMap load_fine_types(const std::filesystem::path& path);

std::string annotated_table_to_json_line(const AnnotatedTable& table);
AnnotatedTable annotated_table_from_json_line(const std::string& line);

// rr as entity ids; rows with entities unknown to g are dropped.
TupleSet ground_truth_ids(const AnnotatedTable& table, const KnowledgeGraph& g);

}  // namespace tablefill
