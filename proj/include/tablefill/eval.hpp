#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tablefill/chain_query.hpp"
#include "tablefill/dataset.hpp"
#include "tablefill/features.hpp"
#include "tablefill/ranker.hpp"
#include "tablefill/selector.hpp"

namespace tablefill {

// Picks one chain for a table from its example-row candidates.
class ChainSelector {
 public:
  virtual ~ChainSelector() = default;
  virtual std::string name() const = 0;
  // candidates is never empty.
  virtual ChainPair select(const AnnotatedTable& table, std::span<const ChainPair> candidates) const = 0;
};

// Always the table's first annotated positive, whatever the candidates.
class OracleSelector final : public ChainSelector {
 public:
  std::string name() const override { return "oracle"; }
  ChainPair select(const AnnotatedTable& table, std::span<const ChainPair> candidates) const override;
};

// Top-1 of a ChainScorer over the candidates.
class ScorerSelector final : public ChainSelector {
 public:
  ScorerSelector(const ChainScorer& scorer, const QueryEncoder& encoder) : scorer_(scorer), encoder_(encoder) {}
  std::string name() const override { return std::string(scorer_.name()); }
  ChainPair select(const AnnotatedTable& table, std::span<const ChainPair> candidates) const override;

 private:
  const ChainScorer& scorer_;
  const QueryEncoder& encoder_;
};

// Chains of the table whose p1 connects (SE, ER1) and whose p2 connects
// (ER1, ER2).
CandidateChainSet filter_cc_er(const AnnotatedTable& table, const MidPair& er, const KnowledgeGraph& g);

// |ct & err| / |err|; 0 for an empty err.
double tuple_recall(const TupleSet& ct, const TupleSet& err);
double tuple_recall(std::span<const MidPair> ct, std::span<const MidPair> err);

enum class RunStatus { kOk, kSkippedEmptyCc, kBudgetExceeded, kError };
std::string_view run_status_name(RunStatus s);

struct QueryRun {
  std::string table_id;
  MidPair er;
  std::vector<std::string> cc_er;  // canonical chains
  std::optional<ChainPair> selected;
  std::size_t ct_size = 0;
  std::size_t err_size = 0;
  double tuple_recall = 0.0;
  double ndcg = 0.0;
  double p_at_1 = 0.0;
  RunStatus status = RunStatus::kOk;
  std::string error;
};

nlohmann::json query_run_to_json(const QueryRun& run);

struct Percentiles {
  double p25 = 0.0;
  double p50 = 0.0;
  double mean = 0.0;
  double p75 = 0.0;
};

// Linear-interpolation percentiles; all zero for an empty sample.
Percentiles summarize_values(std::vector<double> values);

struct MetricSummary {
  std::size_t executed = 0;
  std::size_t skipped_empty_cc = 0;
  std::size_t budget_exceeded = 0;
  std::size_t errors = 0;
  std::map<std::string, Percentiles> metrics;
};

// Percentiles over executed runs only.
MetricSummary summarize_runs(std::span<const QueryRun> runs);
nlohmann::json summary_to_json(const MetricSummary& s);

struct E2eOptions {
  QueryBudget budget;
  std::size_t threads = 1;
  // Seed of the shuffle ranking used when no ranker model is given.
  std::uint64_t seed = 42;
};

// One run per (table, row as example row). Failures are recorded on the run;
// the sweep never aborts. Output order follows tables, then rows.
std::vector<QueryRun> run_e2e(std::span<const AnnotatedTable* const> tables, const ChainSelector& selector,
                              const RankerModel* ranker, const Featurizer& featurizer, const KnowledgeGraph& g,
                              const E2eOptions& options);

// Fraction of tables whose selected chain is positive, over tables with at
// least one unpadded negative; every unpadded chain is a candidate.
double accuracy_at_1(std::span<const AnnotatedTable* const> tables, const ChainSelector& selector);

enum class CoreColumnMode { kPrefix, kFull };

struct CoreColumnRecord {
  std::string table_id;
  MidPair er;
  double c1_recall = 0.0;
};

// C1 recall of the selected chain of every executed run, against the table's
// distinct column-1 entities minus ER1. Prefix mode walks p1 only; full mode
// projects the chain result on x. Runs over budget get recall 0.
std::vector<CoreColumnRecord> core_column_eval(std::span<const QueryRun> runs,
                                               std::span<const AnnotatedTable* const> tables, const KnowledgeGraph& g,
                                               CoreColumnMode mode, const QueryBudget& budget);

// Ranker examples: per table, the first positive chain and the first row it
// retrieves act as the example row; candidates are the retrieved rows minus
// that row, relevant when they are table rows. Tables yielding no example row
// are skipped.
std::vector<RankingGroup> build_ranking_groups(std::span<const AnnotatedTable* const> tables, const KnowledgeGraph& g,
                                               const Featurizer& featurizer, const QueryBudget& budget,
                                               std::size_t threads = 1);

// runs.jsonl, summary.json and metrics.csv (rows: metrics; columns:
// 25-ile, 50-ile, mean, 75-ile).
void write_eval_outputs(std::span<const QueryRun> runs, const MetricSummary& summary,
                        const std::filesystem::path& dir);

}  // namespace tablefill
