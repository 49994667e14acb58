#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace padbench {

enum class SvmKernel { linear, rbf, poly3, sigmoid };

std::string to_string(SvmKernel kernel);
SvmKernel svm_kernel_from_string(const std::string& name);

struct SvmConfig {
  SvmKernel kernel = SvmKernel::rbf;
  double c = 1.0;       // soft-margin weight; deliberately untuned defaults
  double gamma = 0.0;   // 0 -> median pairwise-distance heuristic at train time
  double coef0 = 1.0;   // poly offset; sigmoid uses 0
  double tol = 1e-3;
  int max_passes = 200;
};

// Soft-margin SVM trained by sequential minimal optimization. Pair selection
// is deterministic, so identical inputs give identical models.
class KernelSvm {
 public:
  void train(const std::vector<Eigen::VectorXd>& features, const std::vector<int>& labels,
             const SvmConfig& config);  // labels: 0 bona fide, 1 attack
  double decision(const Eigen::VectorXd& x) const;  // signed margin, >= 0 -> attack
  bool predict_attack(const Eigen::VectorXd& x) const { return decision(x) >= 0.0; }
  bool trained() const { return trained_; }

  const SvmConfig& config() const { return config_; }
  double effective_gamma() const { return gamma_; }
  double bias() const { return bias_; }
  const std::vector<Eigen::VectorXd>& support_vectors() const { return support_; }
  const std::vector<double>& support_coeffs() const { return coeffs_; }  // alpha_i * y_i

  // for deserialization
  void restore(const SvmConfig& config, double gamma, double bias,
               std::vector<Eigen::VectorXd> support, std::vector<double> coeffs);

 private:
  double kernel_value(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  SvmConfig config_;
  double gamma_ = 1.0;
  double bias_ = 0.0;
  std::vector<Eigen::VectorXd> support_;
  std::vector<double> coeffs_;
  bool trained_ = false;
};

}  // namespace padbench
