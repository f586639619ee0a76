#include "tablefill/selector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "tablefill/embedding_scorer.hpp"
#include "tablefill/error.hpp"
#include "tablefill/rng.hpp"
#include "tablefill/simd/kernels.hpp"

namespace tablefill {

using nlohmann::json;

QueryContext QueryEncoder::context(std::string key, TokenList qis, TokenList cn1, TokenList cn2,
                                   TokenList set_tokens) const {
  QueryContext ctx;
  ctx.key = std::move(key);
  ctx.qis_ids = tb_.encode(qis, limits_.qis);
  ctx.cn1_ids = tb_.encode(cn1, limits_.cn);
  ctx.cn2_ids = tb_.encode(cn2, limits_.cn);
  ctx.set_ids = kb_.encode(set_tokens, limits_.set);
  ctx.qis = std::move(qis);
  ctx.cn1 = std::move(cn1);
  ctx.cn2 = std::move(cn2);
  ctx.set_tokens = std::move(set_tokens);
  return ctx;
}

QueryContext QueryEncoder::context(const AnnotatedTable& table) const {
  return context(table.table_id, table.qis, table.cn1, table.cn2, table.set_tokens);
}

ChainEncoding QueryEncoder::chain(const ChainPair& chain) const {
  ChainEncoding enc;
  enc.chain = chain;
  enc.canonical = chain.canonical();
  enc.tokens = tokenize(enc.canonical);
  enc.ids = kb_.encode(enc.tokens, limits_.chain);
  return enc;
}

std::vector<ChainEncoding> QueryEncoder::chains(const CandidateChainSet& chains) const {
  std::vector<ChainEncoding> out;
  out.reserve(chains.size());
  for (const auto& c : chains) out.push_back(chain(c));
  return out;
}

double RandomScorer::score(const QueryContext& ctx, const ChainEncoding& chain) const {
  std::uint64_t h = mix64(seed_);
  h = fnv1a64(ctx.key, h);
  h = fnv1a64("\x1f", h);
  h = fnv1a64(chain.canonical, h);
  return hash_to_unit(h);
}

double JaccardScorer::score(const QueryContext& ctx, const ChainEncoding& chain) const {
  TokenList all = ctx.qis;
  all.insert(all.end(), ctx.cn1.begin(), ctx.cn1.end());
  all.insert(all.end(), ctx.cn2.begin(), ctx.cn2.end());
  all.insert(all.end(), ctx.set_tokens.begin(), ctx.set_tokens.end());
  return jaccard(to_token_set(std::move(all)), to_token_set(chain.tokens));
}

const ChainEncoding& select_top1(const ChainScorer& scorer, const QueryContext& ctx,
                                 std::span<const ChainEncoding> chains) {
  if (chains.empty()) throw EmptyCandidatesError("no candidate chains for query " + ctx.key);
  const ChainEncoding* best = nullptr;
  double best_score = 0.0;
  for (const auto& c : chains) {
    const double s = scorer.score(ctx, c);
    if (best == nullptr || s > best_score || (s == best_score && c.canonical < best->canonical)) {
      best = &c;
      best_score = s;
    }
  }
  return *best;
}

double hinge_loss(std::span<const double> q, std::span<const double> p, std::span<const double> n, double margin) {
  if (q.size() != p.size() || q.size() != n.size()) throw InvalidInputError("hinge_loss: dimension mismatch");
  return std::max(0.0, margin - simd::cosine(q, p) + simd::cosine(q, n));
}

// ---------------------------------------------------------------------------
// Linear scorer

LinearScorer::LinearScorer(const Vocabulary& tb, const Vocabulary& kb)
    : tb_size_(tb.size()),
      kb_size_(kb.size()),
      tb_fingerprint_(tb.fingerprint()),
      kb_fingerprint_(kb.fingerprint()),
      weights_(3 * tb.size() + 2 * kb.size(), 0.0) {}

std::vector<std::pair<std::size_t, double>> LinearScorer::features(const QueryContext& ctx,
                                                                   const ChainEncoding& chain) const {
  std::map<std::size_t, double> counts;
  auto add = [&](const std::vector<std::size_t>& ids, std::size_t offset, std::size_t size) {
    for (auto id : ids) {
      if (id != kOovIndex && id < size) counts[offset + id] += 1.0;
    }
  };
  add(ctx.qis_ids, 0, tb_size_);
  add(ctx.cn1_ids, tb_size_, tb_size_);
  add(ctx.cn2_ids, 2 * tb_size_, tb_size_);
  add(ctx.set_ids, 3 * tb_size_, kb_size_);
  add(chain.ids, 3 * tb_size_ + kb_size_, kb_size_);
  return {counts.begin(), counts.end()};
}

double LinearScorer::score(const QueryContext& ctx, const ChainEncoding& chain) const {
  double s = bias_;
  for (const auto& [i, v] : features(ctx, chain)) s += weights_[i] * v;
  return s;
}

json LinearScorer::to_json() const {
  return json{{"format", "tablefill-selector"},
              {"version", 1},
              {"kind", "linear"},
              {"tb_fingerprint", hex64(tb_fingerprint_)},
              {"kb_fingerprint", hex64(kb_fingerprint_)},           {"tb_size", tb_size_}, {"kb_size", kb_size_}, {"bias", bias_},
              {"weights", weights_}};
}

namespace {

}  // namespace

void check_model_fingerprints(const json& j, const Vocabulary& tb, const Vocabulary& kb) {
  if (j.at("tb_fingerprint").get<std::string>() != hex64(tb.fingerprint()) ||
      j.at("kb_fingerprint").get<std::string>() != hex64(kb.fingerprint())) {
    throw ConfigError("model vocabulary fingerprint does not match the dataset vocabulary");
  }
}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(-m)), stable for large |m|.
double logistic_loss(double margin) {
  return margin > 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

}  // namespace

LinearScorer LinearScorer::from_json(const json& j, const Vocabulary& tb, const Vocabulary& kb) {
  if (j.at("kind").get<std::string>() != "linear") throw ConfigError("not a linear selector model");
  check_model_fingerprints(j, tb, kb);
  LinearScorer s(tb, kb);
  auto w = j.at("weights").get<std::vector<double>>();
  if (w.size() != s.weights_.size()) throw ConfigError("linear model dimension mismatch");
  s.weights_ = std::move(w);
  s.bias_ = j.at("bias").get<double>();
  return s;
}

LinearScorer train_linear(std::span<const AnnotatedTable* const> tables, const QueryEncoder& encoder,
                          const LinearConfig& config, TrainReport* report) {
  struct Example {
    std::vector<std::pair<std::size_t, double>> x;
    double y;
  };
  LinearScorer model(encoder.tb(), encoder.kb());
  std::vector<Example> examples;
  for (const AnnotatedTable* t : tables) {
    const QueryContext ctx = encoder.context(*t);
    for (const auto& c : t->chains) {
      examples.push_back({model.features(ctx, encoder.chain(c.chain)), c.label == ChainLabel::kPositive ? 1.0 : -1.0});
    }
  }
  if (examples.empty()) throw ConfigError("linear selector: empty training set");

  double max_sq = 1.0;
  for (const auto& e : examples) {
    double sq = 1.0;  // bias feature
    for (const auto& [i, v] : e.x) sq += v * v;
    max_sq = std::max(max_sq, sq);
  }
  const double lr = config.learning_rate > 0 ? config.learning_rate : 1.0 / (0.25 * max_sq + config.l2);
  const double n = static_cast<double>(examples.size());

  auto objective = [&] {
    double loss = 0.0;
    for (const auto& e : examples) {
      double s = model.bias();
      for (const auto& [i, v] : e.x) s += model.weights()[i] * v;
      loss += logistic_loss(e.y * s);
    }
    return loss / n + 0.5 * config.l2 * simd::squared_norm(model.weights());
  };

  std::vector<double> grad(model.dimension());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (const auto& e : examples) {
      double s = model.bias();
      for (const auto& [i, v] : e.x) s += model.weights()[i] * v;
      const double g = -e.y * sigmoid(-e.y * s) / n;
      for (const auto& [i, v] : e.x) grad[i] += g * v;
      grad_bias += g;
    }
    simd::axpy(config.l2, model.weights(), grad);
    simd::axpy(-lr, grad, model.weights());
    model.bias() -= lr * grad_bias;
    if (report != nullptr) report->loss_history.push_back(objective());
  }
  return model;
}

// ---------------------------------------------------------------------------
// Persistence

void save_scorer(const ChainScorer& scorer, const std::filesystem::path& path) {
  json j;
  if (const auto* linear = dynamic_cast<const LinearScorer*>(&scorer)) {
    j = linear->to_json();
  } else if (const auto* emb = dynamic_cast<const EmbeddingScorer*>(&scorer)) {
    j = emb->to_json();
  } else {
    throw ConfigError("scorer '" + std::string(scorer.name()) + "' has no trainable state to save");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << j.dump() << '\n';
}

std::unique_ptr<ChainScorer> load_scorer(const std::filesystem::path& path, const Vocabulary& tb, const Vocabulary& kb) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (j.value("format", std::string{}) != "tablefill-selector") throw ConfigError(path.string() + ": not a selector model");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") return std::make_unique<LinearScorer>(LinearScorer::from_json(j, tb, kb));
  if (kind == "embedding") return std::make_unique<EmbeddingScorer>(EmbeddingScorer::from_json(j, tb, kb));
  throw ConfigError("unknown selector kind " + kind);
}

}  // namespace tablefill
