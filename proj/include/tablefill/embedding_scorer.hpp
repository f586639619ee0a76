#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "tablefill/selector.hpp"

namespace tablefill {

// Encoder sizes. Each field encoder projects the mean of its token
// embeddings (input_dim wide) to its output width; the query vector is the
// concatenation [qis | cn1 | cn2 | set] and must be as wide as the chain
// vector.
struct EmbeddingDims {
  std::size_t input_dim = 100;
  std::size_t qis = 100;
  std::size_t cn = 25;
  std::size_t set = 100;
  std::size_t chain = 250;

  void validate() const;
};

enum class OptimizerKind { kSgd, kAdam };

struct EmbeddingConfig {
  EmbeddingDims dims;
  double margin = 0.25;
  double l2 = 5e-6;
  double learning_rate = 1e-5;
  std::size_t batch_size = 250;
  std::size_t epochs = 2000;
  std::size_t negatives = 9;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double init_scale = 0.1;
  std::uint64_t seed = 42;
};

// Siamese matcher scoring cos(query vector, chain vector). The QIS and
// column-name encoders own separate TB embedding tables; the SET and chain
// encoders share one KB table. The OOV row of every table stays zero.
class EmbeddingScorer final : public ChainScorer {
 public:
  enum Block { kQisEmbedding, kCnEmbedding, kKbEmbedding, kQisProjection, kCnProjection, kSetProjection,
               kChainProjection, kBlockCount };

  EmbeddingScorer(const Vocabulary& tb, const Vocabulary& kb, const EmbeddingDims& dims, double margin);

  std::string_view name() const override { return "embedding"; }
  double score(const QueryContext& ctx, const ChainEncoding& chain) const override;

  std::vector<double> query_vector(const QueryContext& ctx) const;
  std::vector<double> chain_vector(const ChainEncoding& chain) const;

  // Hinge loss of one (query, positive, negative) triple, without the
  // regularizer, and its gradient with respect to every parameter.
  double triple_loss(const QueryContext& ctx, const ChainEncoding& pos, const ChainEncoding& neg) const;
  std::vector<double> triple_gradient(const QueryContext& ctx, const ChainEncoding& pos,
                                      const ChainEncoding& neg) const;

  const EmbeddingDims& dims() const noexcept { return dims_; }
  double margin() const noexcept { return margin_; }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::size_t block_offset(Block b) const { return offsets_[b]; }
  std::size_t block_size(Block b) const { return offsets_[b + 1] - offsets_[b]; }
  // True for entries that training never changes (OOV embedding rows).
  bool is_frozen(std::size_t param_index) const;

  void initialize(std::uint64_t seed, double init_scale);

  std::uint64_t tb_fingerprint() const noexcept { return tb_fingerprint_; }
  std::uint64_t kb_fingerprint() const noexcept { return kb_fingerprint_; }

  nlohmann::json to_json() const;
  static EmbeddingScorer from_json(const nlohmann::json& j, const Vocabulary& tb, const Vocabulary& kb);

  // Accumulates d(loss)/d(params) for a query whose output gradient is
  // grad_q, and for a chain whose output gradient is grad_c.
  void backprop_query(const QueryContext& ctx, std::span<const double> grad_q, std::span<double> grad) const;
  void backprop_chain(const ChainEncoding& chain, std::span<const double> grad_c, std::span<double> grad) const;

 private:
  std::vector<double> mean_embedding(Block table, std::span<const std::size_t> ids) const;
  void project(Block projection, std::span<const double> mean, std::span<double> out) const;
  void backprop_field(Block table, Block projection, std::span<const std::size_t> ids, std::span<const double> grad_out,
                      std::span<double> grad) const;

  std::size_t tb_size_;
  std::size_t kb_size_;
  std::uint64_t tb_fingerprint_;
  std::uint64_t kb_fingerprint_;
  EmbeddingDims dims_;
  double margin_;
  std::array<std::size_t, kBlockCount + 1> offsets_{};
  std::vector<double> params_;
};

// Mini-batch minimization of mean hinge loss + (l2 / 2) * ||W||^2 over
// (query, positive, negative) triples; every positive of a table is paired
// with up to `negatives` negatives. Throws ConfigError on bad dimensions or
// when no table yields a triple.
EmbeddingScorer train_embedding(std::span<const AnnotatedTable* const> tables, const QueryEncoder& encoder,
                                const EmbeddingConfig& config, TrainReport* report = nullptr);

}  // namespace tablefill
