#include "tablefill/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "tablefill/error.hpp"
#include "tablefill/rng.hpp"

namespace tablefill {

using nlohmann::json;

namespace {

double discount(std::size_t rank0) { return 1.0 / std::log2(static_cast<double>(rank0) + 2.0); }

double ideal_dcg(std::size_t relevant) {
  double d = 0.0;
  for (std::size_t i = 0; i < relevant; ++i) d += discount(i);
  return d;
}

}  // namespace

double ndcg(std::span<const int> relevances) {
  double dcg = 0.0;
  std::size_t relevant = 0;
  for (std::size_t i = 0; i < relevances.size(); ++i) {
    if (relevances[i] > 0) {
      dcg += discount(i);
      ++relevant;
    }
  }
  if (relevant == 0) return 0.0;
  return dcg / ideal_dcg(relevant);
}

double precision_at_1(std::span<const MidPair> ranked, std::span<const MidPair> expected) {
  if (ranked.empty()) return 0.0;
  return std::find(expected.begin(), expected.end(), ranked.front()) != expected.end() ? 1.0 : 0.0;
}

void RankerConfig::validate() const {
  if (max_depth == 0) throw ConfigError("ranker tree depth must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("ranker learning rate must be positive");
  if (!(sigma > 0.0)) throw ConfigError("ranker sigma must be positive");
  if (min_leaf == 0) throw ConfigError("ranker min_leaf must be positive");
}

double RegressionTree::predict(const FeatureVector& x) const {
  if (nodes_.empty()) return 0.0;
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    i = x[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes_[i].feature >= 0) {
      stack.emplace_back(nodes_[i].left, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return deepest;
}

double RankerModel::predict(const FeatureVector& x) const {
  double s = 0.0;
  for (const auto& t : trees_) s += t.predict(x);
  return learning_rate_ * s;
}

std::vector<double> RankerModel::predict_all(std::span<const FeatureVector> xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(predict(x));
  return out;
}

json RankerModel::to_json() const {
  json trees = json::array();
  for (const auto& t : trees_) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
      if (n.feature < 0) {
        nodes.push_back(json{{"value", n.value}});
      } else {
        nodes.push_back(json{{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  return json{{"format", "tablefill-ranker"},
              {"version", 1},
              {"features", feature_names()},
              {"learning_rate", learning_rate_},
              {"sigma", sigma_},
              {"trees", std::move(trees)}};
}

RankerModel RankerModel::from_json(const json& j) {
  if (j.value("format", "") != "tablefill-ranker" || j.value("version", 0) != 1) {
    throw ConfigError("not a tablefill ranker model");
  }
  const auto names = j.at("features").get<std::vector<std::string>>();
  const auto& expected = feature_names();
  if (!std::equal(names.begin(), names.end(), expected.begin(), expected.end())) {
    throw ConfigError("ranker model feature layout does not match this build");
  }
  std::vector<RegressionTree> trees;
  for (const auto& t : j.at("trees")) {
    std::vector<RegressionTree::Node> nodes;
    for (const auto& n : t) {
      RegressionTree::Node node;
      if (n.contains("feature")) {
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<std::size_t>();
        node.right = n.at("right").get<std::size_t>();
        if (node.feature >= static_cast<int>(kFeatureCount) || node.left >= t.size() || node.right >= t.size()) {
          throw ConfigError("malformed ranker tree");
        }
      } else {
        node.value = n.at("value").get<double>();
      }
      nodes.push_back(node);
    }
    trees.emplace_back(std::move(nodes));
  }
  return RankerModel(std::move(trees), j.at("learning_rate").get<double>(), j.at("sigma").get<double>());
}

void RankerModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << to_json().dump(1) << '\n';
}

RankerModel RankerModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open ranker model " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed ranker model " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

double pair_lambda(double s_i, double s_j, double delta_ndcg, double sigma) {
  return -sigma / (1.0 + std::exp(sigma * (s_i - s_j))) * std::abs(delta_ndcg);
}

LambdaGradients lambda_gradients(std::span<const double> scores, std::span<const int> relevance, double sigma) {
  const std::size_t n = scores.size();
  LambdaGradients g{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const auto relevant = static_cast<std::size_t>(std::count_if(relevance.begin(), relevance.end(), [](int r) { return r > 0; }));
  if (relevant == 0 || relevant == n) return g;
  // Current rank of every item: descending score, ties by index.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> position(n);
  for (std::size_t r = 0; r < n; ++r) position[order[r]] = r;
  const double idcg = ideal_dcg(relevant);
  for (std::size_t i = 0; i < n; ++i) {
    if (relevance[i] <= 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (relevance[j] > 0) continue;
      const double delta = (discount(position[i]) - discount(position[j])) / idcg;
      const double lambda = pair_lambda(scores[i], scores[j], delta, sigma);
      g.lambdas[i] += lambda;
      g.lambdas[j] -= lambda;
      const double rho = 1.0 / (1.0 + std::exp(sigma * (scores[i] - scores[j])));
      const double w = sigma * sigma * rho * (1.0 - rho) * std::abs(delta);
      g.weights[i] += w;
      g.weights[j] += w;
    }
  }
  return g;
}

namespace {

struct Sample {
  const FeatureVector* x;
  double target;  // negative lambda
  double weight;
};

class TreeBuilder {
 public:
  TreeBuilder(std::vector<Sample>& samples, const RankerConfig& config) : samples_(samples), config_(config) {}

  RegressionTree build() {
    std::vector<std::size_t> idx(samples_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    grow(idx, 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  std::size_t grow(std::vector<std::size_t>& idx, std::size_t depth) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    const Split split = depth < config_.max_depth ? best_split(idx) : Split{};
    if (split.feature < 0) {
      double sum_y = 0.0;
      double sum_w = 0.0;
      for (auto i : idx) {
        sum_y += samples_[i].target;
        sum_w += samples_[i].weight;
      }
      nodes_[id].value = sum_w > 1e-12 ? sum_y / sum_w : 0.0;
      return id;
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto i : idx) {
      ((*samples_[i].x)[static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(i);
    }
    const std::size_t l = grow(left, depth + 1);
    const std::size_t r = grow(right, depth + 1);
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  // Largest reduction of squared error on the targets; ties keep the lowest
  // feature index, then the lowest threshold.
  Split best_split(const std::vector<std::size_t>& idx) const {
    Split best;
    const std::size_t n = idx.size();
    if (n < 2 * config_.min_leaf) return best;
    double total = 0.0;
    for (auto i : idx) total += samples_[i].target;
    const double base = total * total / static_cast<double>(n);
    std::vector<std::pair<double, double>> column(n);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      for (std::size_t k = 0; k < n; ++k) column[k] = {(*samples_[idx[k]].x)[f], samples_[idx[k]].target};
      std::sort(column.begin(), column.end());
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left_sum += column[k].second;
        if (column[k].first == column[k + 1].first) continue;
        const std::size_t nl = k + 1;
        const std::size_t nr = n - nl;
        if (nl < config_.min_leaf || nr < config_.min_leaf) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - base;
        if (gain > best.gain + 1e-12) {
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (column[k].first + column[k + 1].first);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  std::vector<Sample>& samples_;
  const RankerConfig& config_;
  std::vector<RegressionTree::Node> nodes_;
};

}  // namespace

RankerModel train_ranker(std::span<const RankingGroup> groups, const RankerConfig& config, RankerTrainReport* report) {
  config.validate();
  for (const auto& g : groups) {
    if (g.features.size() != g.relevance.size()) throw InvalidInputError("ranking group " + g.key + ": size mismatch");
  }
  std::vector<std::vector<double>> scores;
  for (const auto& g : groups) scores.emplace_back(g.features.size(), 0.0);
  std::vector<RegressionTree> trees;
  for (std::size_t t = 0; t < config.trees; ++t) {
    std::vector<Sample> samples;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const auto lg = lambda_gradients(scores[gi], groups[gi].relevance, config.sigma);
      for (std::size_t i = 0; i < groups[gi].features.size(); ++i) {
        samples.push_back({&groups[gi].features[i], -lg.lambdas[i], lg.weights[i]});
      }
    }
    if (samples.empty()) break;
    RegressionTree tree = TreeBuilder(samples, config).build();
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      for (std::size_t i = 0; i < groups[gi].features.size(); ++i) {
        scores[gi][i] += config.learning_rate * tree.predict(groups[gi].features[i]);
      }
    }
    trees.push_back(std::move(tree));
    if (report != nullptr) {
      double total = 0.0;
      for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto order = rank_by_scores(scores[gi], groups[gi].candidates);
        std::vector<int> rel;
        for (auto i : order) rel.push_back(groups[gi].relevance[i]);
        total += ndcg(rel);
      }
      report->mean_ndcg.push_back(groups.empty() ? 0.0 : total / static_cast<double>(groups.size()));
    }
  }
  return RankerModel(std::move(trees), config.learning_rate, config.sigma);
}

std::vector<std::size_t> rank_by_scores(std::span<const double> scores, std::span<const MidPair> candidates) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (a < candidates.size() && b < candidates.size() && candidates[a] != candidates[b]) {
      return candidates[a] < candidates[b];
    }
    return a < b;
  });
  return order;
}

std::vector<std::size_t> rank(const RankerModel& model, std::span<const FeatureVector> features,
                              std::span<const MidPair> candidates) {
  const auto scores = model.predict_all(features);
  return rank_by_scores(scores, candidates);
}

std::vector<std::size_t> shuffle_ranking(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  return order;
}

}  // namespace tablefill
