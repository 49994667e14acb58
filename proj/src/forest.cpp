#include "padbench/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "padbench/rng.hpp"
#include "padbench/types.hpp"

namespace padbench {
namespace {

struct Builder {
  const std::vector<Eigen::VectorXd>& xs;
  const std::vector<int>& ys;
  const ForestConfig& config;
  Rng& rng;
  int n_features;
  int mtry;
  RandomForest::Tree& tree;

  static double gini(std::size_t n_attack, std::size_t n_total) {
    if (n_total == 0) return 0.0;
    const double p = static_cast<double>(n_attack) / static_cast<double>(n_total);
    return 2.0 * p * (1.0 - p);
  }

  int build(std::vector<std::size_t>& indices, int depth) {
    std::size_t attack = 0;
    for (std::size_t i : indices) attack += static_cast<std::size_t>(ys[i]);

    RandomForest::Node node;
    node.attack_prob = indices.empty()
                           ? 0.5
                           : static_cast<double>(attack) / static_cast<double>(indices.size());
    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(node);

    const bool pure = attack == 0 || attack == indices.size();
    if (pure || depth >= config.max_depth ||
        indices.size() < static_cast<std::size_t>(2 * config.min_leaf)) {
      return node_index;
    }

    // feature subsample without replacement
    std::vector<int> candidates(n_features);
    std::iota(candidates.begin(), candidates.end(), 0);
    for (int i = 0; i < mtry; ++i) {
      const std::size_t j = i + rng.uniform_index(candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = gini(attack, indices.size());
    std::vector<std::pair<double, int>> values(indices.size());
    for (int ci = 0; ci < mtry; ++ci) {
      const int feature = candidates[ci];
      for (std::size_t i = 0; i < indices.size(); ++i) {
        values[i] = {xs[indices[i]][feature], ys[indices[i]]};
      }
      std::sort(values.begin(), values.end());
      std::size_t left_attack = 0;
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        left_attack += static_cast<std::size_t>(values[i].second);
        if (values[i].first == values[i + 1].first) continue;
        const std::size_t left_n = i + 1;
        const std::size_t right_n = values.size() - left_n;
        if (left_n < static_cast<std::size_t>(config.min_leaf) ||
            right_n < static_cast<std::size_t>(config.min_leaf)) {
          continue;
        }
        const double weighted =
            (gini(left_attack, left_n) * left_n +
             gini(attack - left_attack, right_n) * right_n) /
            static_cast<double>(values.size());
        if (weighted + 1e-12 < best_score) {
          best_score = weighted;
          best_feature = feature;
          best_threshold = 0.5 * (values[i].first + values[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return node_index;

    std::vector<std::size_t> left, right;
    for (std::size_t i : indices) {
      (xs[i][best_feature] <= best_threshold ? left : right).push_back(i);
    }
    if (left.empty() || right.empty()) return node_index;

    tree.nodes[node_index].feature = best_feature;
    tree.nodes[node_index].threshold = best_threshold;
    tree.nodes[node_index].left = build(left, depth + 1);
    tree.nodes[node_index].right = build(right, depth + 1);
    return node_index;
  }
};

double tree_probability(const RandomForest::Tree& tree, const Eigen::VectorXd& x) {
  int node = 0;
  while (tree.nodes[node].feature >= 0) {
    const auto& n = tree.nodes[node];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return tree.nodes[node].attack_prob;
}

}  // namespace

void RandomForest::train(const std::vector<Eigen::VectorXd>& features,
                         const std::vector<int>& labels, const ForestConfig& config) {
  if (features.empty() || features.size() != labels.size()) {
    throw ValidationError("forest training needs matching non-empty inputs");
  }
  trees_.clear();
  const int n_features = static_cast<int>(features.front().size());
  const int mtry = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n_features))));
  for (int t = 0; t < config.n_trees; ++t) {
    Rng rng(mix_seed(config.seed, 0x666f72ULL, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> bootstrap(features.size());
    for (auto& idx : bootstrap) idx = rng.uniform_index(features.size());
    Tree tree;
    Builder builder{features, labels, config, rng, n_features, mtry, tree};
    builder.build(bootstrap, 0);
    trees_.push_back(std::move(tree));
  }
}

double RandomForest::attack_probability(const Eigen::VectorXd& x) const {
  if (trees_.empty()) throw ValidationError("forest is not trained");
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree_probability(tree, x);
  return sum / static_cast<double>(trees_.size());
}

}  // namespace padbench
