#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace padbench {

struct ForestConfig {
  int n_trees = 25;
  int max_depth = 8;
  int min_leaf = 2;
  std::uint64_t seed = 0;
};

// Bagged CART trees with per-node feature subsampling (sqrt of the feature
// count), Gini split criterion.
class RandomForest {
 public:
  void train(const std::vector<Eigen::VectorXd>& features, const std::vector<int>& labels,
             const ForestConfig& config);
  double attack_probability(const Eigen::VectorXd& x) const;
  bool predict_attack(const Eigen::VectorXd& x) const {
    return attack_probability(x) >= 0.5;
  }
  bool trained() const { return !trees_.empty(); }

  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double attack_prob = 0.0;
  };
  struct Tree {
    std::vector<Node> nodes;
  };
  const std::vector<Tree>& trees() const { return trees_; }
  std::vector<Tree>& mutable_trees() { return trees_; }

 private:
  std::vector<Tree> trees_;
};

}  // namespace padbench
