#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tablefill/dataset.hpp"
#include "tablefill/features.hpp"

namespace tablefill {

// DCG = sum rel_i / log2(i + 1) over 1-based ranks, divided by the ideal
// DCG. 0 when nothing is relevant.
double ndcg(std::span<const int> relevances);

// 1 when the first ranked candidate is expected, 0 otherwise (and when the
// list is empty).
double precision_at_1(std::span<const MidPair> ranked, std::span<const MidPair> expected);

struct RankerConfig {
  std::size_t trees = 100;
  std::size_t max_depth = 4;
  double learning_rate = 0.1;
  double sigma = 1.0;
  std::size_t min_leaf = 1;

  void validate() const;
};

// One query for the ranker: candidate rows, their features and binary
// relevance labels.
struct RankingGroup {
  std::string key;
  std::vector<MidPair> candidates;
  std::vector<FeatureVector> features;
  std::vector<int> relevance;
};

class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    double value = 0.0;
  };

  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  // Goes left when x[feature] <= threshold.
  double predict(const FeatureVector& x) const;
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;

 private:
  std::vector<Node> nodes_;
};

class RankerModel {
 public:
  RankerModel() = default;
  RankerModel(std::vector<RegressionTree> trees, double learning_rate, double sigma)
      : trees_(std::move(trees)), learning_rate_(learning_rate), sigma_(sigma) {}

  // learning_rate * sum of tree outputs.
  double predict(const FeatureVector& x) const;
  std::vector<double> predict_all(std::span<const FeatureVector> xs) const;

  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  double learning_rate() const noexcept { return learning_rate_; }
  double sigma() const noexcept { return sigma_; }

  nlohmann::json to_json() const;
  static RankerModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static RankerModel load(const std::filesystem::path& path);

 private:
  std::vector<RegressionTree> trees_;
  double learning_rate_ = 0.1;
  double sigma_ = 1.0;
};

// lambda_ij = -sigma / (1 + exp(sigma * (s_i - s_j))) * |delta_ndcg| for a
// relevant i and irrelevant j. Item i receives lambda_ij, item j its negation.
double pair_lambda(double s_i, double s_j, double delta_ndcg, double sigma);

struct LambdaGradients {
  std::vector<double> lambdas;  // d(cost)/d(score)
  std::vector<double> weights;  // second-order terms for Newton leaf values
};

// Accumulated lambdas of one group under the current scores. Groups without
// both relevant and irrelevant items get zeros.
LambdaGradients lambda_gradients(std::span<const double> scores, std::span<const int> relevance, double sigma);

struct RankerTrainReport {
  std::vector<double> mean_ndcg;  // training NDCG after each tree
};

RankerModel train_ranker(std::span<const RankingGroup> groups, const RankerConfig& config,
                         RankerTrainReport* report = nullptr);

// Permutation of candidate indices by descending score; ties go to the
// smaller (C1, C2) id pair.
std::vector<std::size_t> rank_by_scores(std::span<const double> scores, std::span<const MidPair> candidates);
std::vector<std::size_t> rank(const RankerModel& model, std::span<const FeatureVector> features,
                              std::span<const MidPair> candidates);

// Seeded uniform permutation; the random-ranking baseline.
std::vector<std::size_t> shuffle_ranking(std::size_t n, std::uint64_t seed);

}  // namespace tablefill
