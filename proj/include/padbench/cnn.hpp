#pragma once

#include <optional>
#include <string>
#include <vector>

#include "padbench/dataset.hpp"
#include "padbench/metrics.hpp"
#include "padbench/nn.hpp"

namespace padbench {

struct CnnArch {
  int image_size = 64;
  int base_channels = 8;
  int deep_channels = 16;
  double crop_fraction = 0.9;  // center crop before resizing
  std::string preset = "desk";

  static CnnArch desk();
  static CnnArch tiny();
};

struct ThresholdPolicy {
  enum class Kind { fixed, fdr_calibrated };
  Kind kind = Kind::fixed;
  double fixed_value = 0.4;
  double target_fdr = 0.002;

  static ThresholdPolicy fixed(double value = 0.4) {
    return {Kind::fixed, value, 0.0};
  }
  static ThresholdPolicy fdr_calibrated(double target = 0.002) {
    return {Kind::fdr_calibrated, 0.0, target};
  }
};

// Small convolutional classifier emitting an attack likelihood in [0, 1].
class CnnModel {
 public:
  CnnModel() = default;
  CnnModel(const CnnArch& arch, std::uint64_t seed);

  double score(const Image& image) const;    // pure
  double score_tensor(const nn::Tensor& x) const;
  double loss_and_grad(const nn::Tensor& x, int target);  // cross entropy

  std::vector<nn::ParamView> params();
  std::string checksum();
  const CnnArch& arch() const { return arch_; }

  std::uint64_t seed = 0;
  bool trained = false;
  ThresholdPolicy policy;  // recorded with the model
  std::optional<double> calibrated_threshold;
  std::vector<std::string> train_sample_ids;

 private:
  friend std::string cnn_to_json(CnnModel& model);
  CnnArch arch_;
  nn::Conv2d stem_;
  nn::Relu stem_relu_;
  nn::ResBlock block1_;
  nn::Conv2d down_;
  nn::Relu down_relu_;
  nn::ResBlock block2_;
  nn::GlobalAvgPool pool_;
  nn::Linear fc_;
};

struct CnnTrainConfig {
  CnnArch arch;
  int epochs = 40;
  int batch_size = 16;
  double learning_rate = 2e-3;
  std::uint64_t seed = 0;
  ThresholdPolicy policy;
};

CnnModel train_cnn(const std::vector<LabeledImage>& samples, const CnnTrainConfig& config);

// Resolves the policy to a concrete threshold. The calibration set is required
// for (and only for) the FDR-calibrated policy.
double resolve_threshold(const ThresholdPolicy& policy,
                         const std::vector<double>* calibration_scores,
                         const std::vector<BinaryLabel>* calibration_labels);

// decision: true = attack
bool apply_threshold(double score, const ThresholdPolicy& policy,
                     const std::vector<double>* calibration_scores = nullptr,
                     const std::vector<BinaryLabel>* calibration_labels = nullptr);

std::string cnn_to_json(CnnModel& model);
CnnModel cnn_from_json(const std::string& text);

}  // namespace padbench
