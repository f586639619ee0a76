#include "tablefill/embedding_scorer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tablefill/error.hpp"
#include "tablefill/rng.hpp"
#include "tablefill/simd/kernels.hpp"

namespace tablefill {

using nlohmann::json;

void EmbeddingDims::validate() const {
  if (input_dim == 0 || qis == 0 || cn == 0 || set == 0 || chain == 0) {
    throw ConfigError("embedding dimensions must be positive");
  }
  if (qis + 2 * cn + set != chain) {
    throw ConfigError("query encoder widths must sum to the chain width (qis + 2*cn + set == chain)");
  }
}

EmbeddingScorer::EmbeddingScorer(const Vocabulary& tb, const Vocabulary& kb, const EmbeddingDims& dims, double margin)
    : tb_size_(tb.size()),
      kb_size_(kb.size()),
      tb_fingerprint_(tb.fingerprint()),
      kb_fingerprint_(kb.fingerprint()),
      dims_(dims),
      margin_(margin) {
  dims_.validate();
  const std::size_t e = dims_.input_dim;
  const std::array<std::size_t, kBlockCount> sizes{tb_size_ * e, tb_size_ * e, kb_size_ * e, dims_.qis * e,
                                                   dims_.cn * e,  dims_.set * e, dims_.chain * e};
  offsets_[0] = 0;
  for (std::size_t b = 0; b < kBlockCount; ++b) offsets_[b + 1] = offsets_[b] + sizes[b];
  params_.assign(offsets_[kBlockCount], 0.0);
}

bool EmbeddingScorer::is_frozen(std::size_t i) const {
  const std::size_t e = dims_.input_dim;
  for (Block b : {kQisEmbedding, kCnEmbedding, kKbEmbedding}) {
    if (i >= offsets_[b] && i < offsets_[b] + e) return true;  // row kOovIndex
  }
  return false;
}

void EmbeddingScorer::initialize(std::uint64_t seed, double init_scale) {
  Rng rng(seed);
  const std::size_t e = dims_.input_dim;
  for (Block b : {kQisEmbedding, kCnEmbedding, kKbEmbedding}) {
    for (std::size_t i = offsets_[b]; i < offsets_[b + 1]; ++i) {
      params_[i] = is_frozen(i) ? 0.0 : rng.uniform(-init_scale, init_scale);
    }
  }
  for (Block b : {kQisProjection, kCnProjection, kSetProjection, kChainProjection}) {
    const std::size_t rows = block_size(b) / e;
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + e));
    for (std::size_t i = offsets_[b]; i < offsets_[b + 1]; ++i) params_[i] = rng.uniform(-limit, limit);
  }
}

std::vector<double> EmbeddingScorer::mean_embedding(Block table, std::span<const std::size_t> ids) const {
  const std::size_t e = dims_.input_dim;
  const std::size_t rows = block_size(table) / e;
  std::vector<double> mean(e, 0.0);
  if (ids.empty()) return mean;
  for (auto id : ids) {
    if (id == kOovIndex || id >= rows) continue;
    simd::axpy(1.0, std::span<const double>(params_.data() + offsets_[table] + id * e, e), mean);
  }
  simd::scale(1.0 / static_cast<double>(ids.size()), mean);
  return mean;
}

void EmbeddingScorer::project(Block projection, std::span<const double> mean, std::span<double> out) const {
  simd::matvec(std::span<const double>(params_.data() + offsets_[projection], block_size(projection)), mean, out);
}

std::vector<double> EmbeddingScorer::query_vector(const QueryContext& ctx) const {
  std::vector<double> q(dims_.chain, 0.0);
  std::span<double> out(q);
  project(kQisProjection, mean_embedding(kQisEmbedding, ctx.qis_ids), out.subspan(0, dims_.qis));
  project(kCnProjection, mean_embedding(kCnEmbedding, ctx.cn1_ids), out.subspan(dims_.qis, dims_.cn));
  project(kCnProjection, mean_embedding(kCnEmbedding, ctx.cn2_ids), out.subspan(dims_.qis + dims_.cn, dims_.cn));
  project(kSetProjection, mean_embedding(kKbEmbedding, ctx.set_ids), out.subspan(dims_.qis + 2 * dims_.cn, dims_.set));
  return q;
}

std::vector<double> EmbeddingScorer::chain_vector(const ChainEncoding& chain) const {
  std::vector<double> c(dims_.chain, 0.0);
  project(kChainProjection, mean_embedding(kKbEmbedding, chain.ids), c);
  return c;
}

double EmbeddingScorer::score(const QueryContext& ctx, const ChainEncoding& chain) const {
  return simd::cosine(query_vector(ctx), chain_vector(chain));
}

void EmbeddingScorer::backprop_field(Block table, Block projection, std::span<const std::size_t> ids,
                                     std::span<const double> grad_out, std::span<double> grad) const {
  if (ids.empty()) return;
  const std::size_t e = dims_.input_dim;
  const std::size_t rows = block_size(table) / e;
  const auto mean = mean_embedding(table, ids);
  simd::rank1_update(1.0, grad_out, mean, grad.subspan(offsets_[projection], block_size(projection)));
  std::vector<double> grad_mean(e);
  simd::matvec_transposed(std::span<const double>(params_.data() + offsets_[projection], block_size(projection)),
                          grad_out, grad_mean);
  const double share = 1.0 / static_cast<double>(ids.size());
  for (auto id : ids) {
    if (id == kOovIndex || id >= rows) continue;
    simd::axpy(share, grad_mean, grad.subspan(offsets_[table] + id * e, e));
  }
}

void EmbeddingScorer::backprop_query(const QueryContext& ctx, std::span<const double> grad_q,
                                     std::span<double> grad) const {
  backprop_field(kQisEmbedding, kQisProjection, ctx.qis_ids, grad_q.subspan(0, dims_.qis), grad);
  backprop_field(kCnEmbedding, kCnProjection, ctx.cn1_ids, grad_q.subspan(dims_.qis, dims_.cn), grad);
  backprop_field(kCnEmbedding, kCnProjection, ctx.cn2_ids, grad_q.subspan(dims_.qis + dims_.cn, dims_.cn), grad);
  backprop_field(kKbEmbedding, kSetProjection, ctx.set_ids, grad_q.subspan(dims_.qis + 2 * dims_.cn, dims_.set),
                 grad);
}

void EmbeddingScorer::backprop_chain(const ChainEncoding& chain, std::span<const double> grad_c,
                                     std::span<double> grad) const {
  backprop_field(kKbEmbedding, kChainProjection, chain.ids, grad_c, grad);
}

namespace {

// Adds scale * d cos(a, b) / da to grad_a and scale * d cos(a, b) / db to
// grad_b. Zero vectors contribute nothing.
void accumulate_cosine_gradient(std::span<const double> a, std::span<const double> b, double scale,
                                std::span<double> grad_a, std::span<double> grad_b) {
  const double na2 = simd::squared_norm(a);
  const double nb2 = simd::squared_norm(b);
  if (na2 == 0.0 || nb2 == 0.0) return;
  const double inv = 1.0 / std::sqrt(na2 * nb2);
  const double c = simd::dot(a, b) * inv;
  if (!grad_a.empty()) {
    simd::axpy(scale * inv, b, grad_a);
    simd::axpy(-scale * c / na2, a, grad_a);
  }
  if (!grad_b.empty()) {
    simd::axpy(scale * inv, a, grad_b);
    simd::axpy(-scale * c / nb2, b, grad_b);
  }
}

}  // namespace

double EmbeddingScorer::triple_loss(const QueryContext& ctx, const ChainEncoding& pos, const ChainEncoding& neg) const {
  return hinge_loss(query_vector(ctx), chain_vector(pos), chain_vector(neg), margin_);
}

std::vector<double> EmbeddingScorer::triple_gradient(const QueryContext& ctx, const ChainEncoding& pos,
                                                     const ChainEncoding& neg) const {
  std::vector<double> grad(params_.size(), 0.0);
  const auto q = query_vector(ctx);
  const auto p = chain_vector(pos);
  const auto n = chain_vector(neg);
  if (hinge_loss(q, p, n, margin_) <= 0.0) return grad;
  std::vector<double> gq(q.size(), 0.0);
  std::vector<double> gp(p.size(), 0.0);
  std::vector<double> gn(n.size(), 0.0);
  accumulate_cosine_gradient(q, p, -1.0, gq, gp);
  accumulate_cosine_gradient(q, n, 1.0, gq, gn);
  backprop_query(ctx, gq, grad);
  backprop_chain(pos, gp, grad);
  backprop_chain(neg, gn, grad);
  return grad;
}

json EmbeddingScorer::to_json() const {
  return json{{"format", "tablefill-selector"},
              {"version", 1},
              {"kind", "embedding"},
              {"tb_fingerprint", hex64(tb_fingerprint_)},
              {"kb_fingerprint", hex64(kb_fingerprint_)},
              {"tb_size", tb_size_},
              {"kb_size", kb_size_},
              {"dims",
               {{"input_dim", dims_.input_dim},
                {"qis", dims_.qis},
                {"cn", dims_.cn},
                {"set", dims_.set},
                {"chain", dims_.chain}}},
              {"margin", margin_},
              {"params", params_}};
}

EmbeddingScorer EmbeddingScorer::from_json(const json& j, const Vocabulary& tb, const Vocabulary& kb) {
  if (j.at("kind").get<std::string>() != "embedding") throw ConfigError("not an embedding selector model");
  check_model_fingerprints(j, tb, kb);
  const auto& d = j.at("dims");
  EmbeddingDims dims{d.at("input_dim").get<std::size_t>(), d.at("qis").get<std::size_t>(), d.at("cn").get<std::size_t>(),
                     d.at("set").get<std::size_t>(), d.at("chain").get<std::size_t>()};
  EmbeddingScorer s(tb, kb, dims, j.at("margin").get<double>());
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != s.params_.size()) throw ConfigError("embedding model parameter count mismatch");
  s.params_ = std::move(params);
  return s;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct TableTriples {
  QueryContext ctx;
  std::vector<ChainEncoding> chains;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (positive, negative) indices into chains
};

TableTriples make_triples(const AnnotatedTable& t, const QueryEncoder& encoder, std::size_t negatives,
                          std::uint64_t seed) {
  TableTriples out;
  out.ctx = encoder.context(t);
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  std::vector<const LabeledChain*> sorted;
  for (const auto& c : t.chains) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(), [](const LabeledChain* a, const LabeledChain* b) { return a->chain < b->chain; });
  for (const auto* c : sorted) {
    out.chains.push_back(encoder.chain(c->chain));
    (c->label == ChainLabel::kPositive ? pos : neg).push_back(out.chains.size() - 1);
  }
  if (neg.empty() || pos.empty()) return out;
  std::vector<std::size_t> picked(neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(std::min(negatives, neg.size())));
  Rng rng(mix64(seed ^ fnv1a64(t.table_id)));
  while (picked.size() < negatives) picked.push_back(neg[rng.uniform_index(neg.size())]);
  for (auto p : pos) {
    for (auto n : picked) out.pairs.emplace_back(p, n);
  }
  return out;
}

class Optimizer {
 public:
  Optimizer(const EmbeddingConfig& cfg, std::size_t size) : cfg_(cfg) {
    if (cfg.optimizer == OptimizerKind::kAdam) {
      m_.assign(size, 0.0);
      v_.assign(size, 0.0);
    }
  }

  void step(std::span<double> params, std::span<const double> grad) {
    if (cfg_.optimizer == OptimizerKind::kSgd) {
      simd::axpy(-cfg_.learning_rate, grad, params);
      return;
    }
    ++t_;
    const double b1 = cfg_.adam_beta1;
    const double b2 = cfg_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
      params[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.adam_epsilon);
    }
  }

 private:
  const EmbeddingConfig& cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

}  // namespace

EmbeddingScorer train_embedding(std::span<const AnnotatedTable* const> tables, const QueryEncoder& encoder,
                                const EmbeddingConfig& config, TrainReport* report) {
  config.dims.validate();
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");
  EmbeddingScorer model(encoder.tb(), encoder.kb(), config.dims, config.margin);
  model.initialize(config.seed, config.init_scale);

  std::vector<TableTriples> data;
  std::size_t total_pairs = 0;
  for (const AnnotatedTable* t : tables) {
    auto triples = make_triples(*t, encoder, config.negatives, config.seed);
    if (triples.pairs.empty()) continue;
    total_pairs += triples.pairs.size();
    data.push_back(std::move(triples));
  }
  if (data.empty()) throw ConfigError("embedding selector: no (positive, negative) pairs in the training set");

  const auto params = model.parameters();
  std::vector<double> grad(params.size());
  Optimizer optimizer(config, params.size());
  std::vector<std::size_t> order(data.size());

  auto objective = [&] {
    double loss = 0.0;
    for (const auto& d : data) {
      const auto q = model.query_vector(d.ctx);
      std::vector<std::vector<double>> cv;
      for (const auto& c : d.chains) cv.push_back(model.chain_vector(c));
      for (const auto& [p, n] : d.pairs) loss += hinge_loss(q, cv[p], cv[n], config.margin);
    }
    return loss / static_cast<double>(total_pairs) + 0.5 * config.l2 * simd::squared_norm(params);
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(mix64(config.seed + 0x51ed27ULL * (epoch + 1)));
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::size_t batch_pairs = 0;
      for (std::size_t i = start; i < stop; ++i) batch_pairs += data[order[i]].pairs.size();
      const double share = 1.0 / static_cast<double>(batch_pairs);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        const auto& d = data[order[i]];
        const auto q = model.query_vector(d.ctx);
        std::vector<std::vector<double>> cv;
        cv.reserve(d.chains.size());
        for (const auto& c : d.chains) cv.push_back(model.chain_vector(c));
        std::vector<double> gq(q.size(), 0.0);
        std::map<std::size_t, std::vector<double>> gc;
        for (const auto& [p, n] : d.pairs) {
          if (hinge_loss(q, cv[p], cv[n], config.margin) <= 0.0) continue;
          auto& gp = gc.try_emplace(p, q.size(), 0.0).first->second;
          accumulate_cosine_gradient(q, cv[p], -share, gq, gp);
          auto& gn = gc.try_emplace(n, q.size(), 0.0).first->second;
          accumulate_cosine_gradient(q, cv[n], share, gq, gn);
        }
        if (gc.empty()) continue;
        model.backprop_query(d.ctx, gq, grad);
        for (const auto& [idx, g] : gc) model.backprop_chain(d.chains[idx], g, grad);
      }
      simd::axpy(config.l2, params, grad);
      optimizer.step(params, grad);
    }
    if (report != nullptr) report->loss_history.push_back(objective());
  }
  return model;
}

}  // namespace tablefill
