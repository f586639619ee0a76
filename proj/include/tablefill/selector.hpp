#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tablefill/dataset.hpp"
#include "tablefill/metapath.hpp"
#include "tablefill/text.hpp"
#include "tablefill/vocabulary.hpp"

namespace tablefill {

struct FieldLimits {
  std::size_t qis = 100;
  std::size_t cn = 10;
  std::size_t set = 100;
  std::size_t chain = 200;
};

// Query side of the matching problem: <QIS, CN1, CN2, SET> as raw tokens and
// as vocabulary indices. `key` identifies the query for seeded scorers.
struct QueryContext {
  std::string key;
  TokenList qis;
  TokenList cn1;
  TokenList cn2;
  TokenList set_tokens;
  std::vector<std::size_t> qis_ids;
  std::vector<std::size_t> cn1_ids;
  std::vector<std::size_t> cn2_ids;
  std::vector<std::size_t> set_ids;
};

struct ChainEncoding {
  ChainPair chain;
  std::string canonical;
  TokenList tokens;
  std::vector<std::size_t> ids;  // KB vocabulary indices
};

class QueryEncoder {
 public:
  QueryEncoder(const Vocabulary& tb, const Vocabulary& kb, FieldLimits limits = {})
      : tb_(tb), kb_(kb), limits_(limits) {}

  QueryContext context(std::string key, TokenList qis, TokenList cn1, TokenList cn2, TokenList set_tokens) const;
  QueryContext context(const AnnotatedTable& table) const;
  ChainEncoding chain(const ChainPair& chain) const;
  std::vector<ChainEncoding> chains(const CandidateChainSet& chains) const;

  const Vocabulary& tb() const noexcept { return tb_; }
  const Vocabulary& kb() const noexcept { return kb_; }

 private:
  const Vocabulary& tb_;
  const Vocabulary& kb_;
  FieldLimits limits_;
};

// Pluggable matching score between a query and a candidate chain.
class ChainScorer {
 public:
  virtual ~ChainScorer() = default;
  virtual std::string_view name() const = 0;
  virtual double score(const QueryContext& ctx, const ChainEncoding& chain) const = 0;
};

// Uniform draw in [0, 1) hashed from (seed, query key, chain), so repeated
// calls agree and distinct chains are independent.
class RandomScorer final : public ChainScorer {
 public:
  explicit RandomScorer(std::uint64_t seed) : seed_(seed) {}
  std::string_view name() const override { return "random"; }
  double score(const QueryContext& ctx, const ChainEncoding& chain) const override;

 private:
  std::uint64_t seed_;
};

// Jaccard similarity between the union of query tokens and the chain tokens.
class JaccardScorer final : public ChainScorer {
 public:
  std::string_view name() const override { return "jacsim"; }
  double score(const QueryContext& ctx, const ChainEncoding& chain) const override;
};

// Highest score wins; ties go to the lexicographically smallest canonical
// chain. Throws EmptyCandidatesError on an empty set.
const ChainEncoding& select_top1(const ChainScorer& scorer, const QueryContext& ctx,
                                 std::span<const ChainEncoding> chains);

// max{0, margin - cos(q, p) + cos(q, n)}
double hinge_loss(std::span<const double> q, std::span<const double> p, std::span<const double> n, double margin);

struct LinearConfig {
  std::size_t epochs = 300;
  // 0 picks 1/L from the logistic-loss smoothness bound.
  double learning_rate = 0.0;
  double l2 = 1e-4;
};

// Affine scorer over five concatenated count vectors (QIS, CN1, CN2 over the
// TB vocabulary; SET, chain over the KB vocabulary). OOV tokens are not
// counted.
class LinearScorer final : public ChainScorer {
 public:
  LinearScorer(const Vocabulary& tb, const Vocabulary& kb);

  std::string_view name() const override { return "linear"; }
  double score(const QueryContext& ctx, const ChainEncoding& chain) const override;

  std::size_t dimension() const noexcept { return weights_.size(); }
  // Sparse (index, count) features, sorted by index.
  std::vector<std::pair<std::size_t, double>> features(const QueryContext& ctx, const ChainEncoding& chain) const;

  std::vector<double>& weights() noexcept { return weights_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double& bias() noexcept { return bias_; }
  double bias() const noexcept { return bias_; }

  std::uint64_t tb_fingerprint() const noexcept { return tb_fingerprint_; }
  std::uint64_t kb_fingerprint() const noexcept { return kb_fingerprint_; }

  nlohmann::json to_json() const;
  static LinearScorer from_json(const nlohmann::json& j, const Vocabulary& tb, const Vocabulary& kb);

 private:
  std::size_t tb_size_;
  std::size_t kb_size_;
  std::uint64_t tb_fingerprint_;
  std::uint64_t kb_fingerprint_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

struct TrainReport {
  std::vector<double> loss_history;  // objective after each epoch
};

// L2-regularized logistic regression on +1 (positive) / -1 (negative) chain
// labels with full-batch gradient descent. Throws ConfigError on empty data.
LinearScorer train_linear(std::span<const AnnotatedTable* const> tables, const QueryEncoder& encoder,
                          const LinearConfig& config, TrainReport* report = nullptr);

// Throws ConfigError unless the model's tb/kb fingerprints match.
void check_model_fingerprints(const nlohmann::json& model, const Vocabulary& tb, const Vocabulary& kb);

// Writes {"kind": ..., fingerprints, parameters} as JSON.
void save_scorer(const ChainScorer& scorer, const std::filesystem::path& path);
// Restores a linear or embedding scorer; throws ConfigError when the stored
// vocabulary fingerprints do not match.
std::unique_ptr<ChainScorer> load_scorer(const std::filesystem::path& path, const Vocabulary& tb, const Vocabulary& kb);

}  // namespace tablefill
