#include "padbench/cnn.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "padbench/types.hpp"

namespace padbench {

using nn::Tensor;
using nn::Vector;
using nlohmann::json;

CnnArch CnnArch::desk() { return CnnArch{}; }

CnnArch CnnArch::tiny() {
  CnnArch arch;
  arch.image_size = 8;
  arch.base_channels = 3;
  arch.deep_channels = 4;
  arch.crop_fraction = 1.0;
  arch.preset = "tiny";
  return arch;
}

CnnModel::CnnModel(const CnnArch& arch, std::uint64_t seed_value) : arch_(arch) {
  seed = seed_value;
  Rng rng(mix_seed(seed_value, 0x636e6eULL));
  const int stem_stride = arch.image_size >= 32 ? 4 : 2;
  const int stem_kernel = arch.image_size >= 32 ? 5 : 3;
  stem_ = nn::Conv2d(1, arch.base_channels, stem_kernel, stem_stride, stem_kernel / 2, rng);
  block1_ = nn::ResBlock(arch.base_channels, rng);
  down_ = nn::Conv2d(arch.base_channels, arch.deep_channels, 3, 2, 1, rng);
  block2_ = nn::ResBlock(arch.deep_channels, rng);
  fc_ = nn::Linear(arch.deep_channels, 2, rng);
}

double CnnModel::score_tensor(const Tensor& x) const {
  Tensor h = nn::Relu::apply(stem_.apply(x));
  h = block1_.apply(h);
  h = nn::Relu::apply(down_.apply(h));
  h = block2_.apply(h);
  const Vector logits = fc_.apply(nn::GlobalAvgPool::apply(h));
  return nn::softmax(logits)[1];
}

double CnnModel::score(const Image& image) const {
  const Image prepared =
      center_crop_resize(image, arch_.image_size, arch_.image_size, arch_.crop_fraction);
  return score_tensor(to_input_tensor(prepared, arch_.image_size));
}

double CnnModel::loss_and_grad(const Tensor& x, int target) {
  Tensor h = stem_relu_.forward(stem_.forward(x));
  h = block1_.forward(h);
  h = down_relu_.forward(down_.forward(h));
  h = block2_.forward(h);
  const Vector pooled = pool_.forward(h);
  const Vector logits = fc_.forward(pooled);

  Vector grad_logits;
  const double loss = nn::softmax_cross_entropy(logits, target, grad_logits);

  Tensor dh = pool_.backward(fc_.backward(grad_logits));
  dh = block2_.backward(dh);
  dh = down_.backward(down_relu_.backward(dh));
  dh = block1_.backward(dh);
  stem_.backward(stem_relu_.backward(dh));
  return loss;
}

std::vector<nn::ParamView> CnnModel::params() {
  std::vector<nn::ParamView> out;
  stem_.collect_params("stem", out);
  block1_.collect_params("block1", out);
  down_.collect_params("down", out);
  block2_.collect_params("block2", out);
  fc_.collect_params("fc", out);
  return out;
}

std::string CnnModel::checksum() { return nn::parameter_checksum(params()); }

CnnModel train_cnn(const std::vector<LabeledImage>& samples, const CnnTrainConfig& config) {
  bool has_attack = false, has_bona = false;
  for (const auto& sample : samples) {
    (is_attack(sample.label) ? has_attack : has_bona) = true;
  }
  if (!has_attack || !has_bona) throw ValidationError("CNN training needs both classes");
  if (config.batch_size <= 0) throw ValidationError("batch size must be positive");

  CnnModel model(config.arch, config.seed);
  model.policy = config.policy;
  for (const auto& sample : samples) model.train_sample_ids.push_back(sample.sample_id);

  std::vector<Tensor> inputs;
  std::vector<int> targets;
  inputs.reserve(samples.size());
  for (const auto& sample : samples) {
    const Image prepared = center_crop_resize(sample.image, config.arch.image_size,
                                              config.arch.image_size,
                                              config.arch.crop_fraction);
    inputs.push_back(to_input_tensor(prepared, config.arch.image_size));
    targets.push_back(is_attack(sample.label) ? 1 : 0);
  }

  auto params = model.params();
  nn::Adam optimizer(config.learning_rate);
  Rng order_rng(mix_seed(config.seed, 0x6f726466ULL));
  std::vector<std::size_t> order(inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      optimizer.zero_grad(params);
      for (std::size_t i = start; i < stop; ++i) {
        model.loss_and_grad(inputs[order[i]], targets[order[i]]);
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (auto& p : params) {
        Eigen::Map<Vector>(p.grad, p.size) *= scale;
      }
      optimizer.step(params);
    }
  }
  model.trained = true;
  return model;
}

double resolve_threshold(const ThresholdPolicy& policy,
                         const std::vector<double>* calibration_scores,
                         const std::vector<BinaryLabel>* calibration_labels) {
  if (policy.kind == ThresholdPolicy::Kind::fixed) {
    return policy.fixed_value;
  }
  if (calibration_scores == nullptr || calibration_labels == nullptr) {
    throw ValidationError("FDR-calibrated policy needs a calibration set");
  }
  return threshold_at_fdr(*calibration_scores, *calibration_labels, policy.target_fdr);
}

bool apply_threshold(double score, const ThresholdPolicy& policy,
                     const std::vector<double>* calibration_scores,
                     const std::vector<BinaryLabel>* calibration_labels) {
  return score >= resolve_threshold(policy, calibration_scores, calibration_labels);
}

std::string cnn_to_json(CnnModel& model) {
  json doc = {{"kind", "cnn"},
              {"arch",
               {{"image_size", model.arch_.image_size},
                {"base_channels", model.arch_.base_channels},
                {"deep_channels", model.arch_.deep_channels},
                {"crop_fraction", model.arch_.crop_fraction},
                {"preset", model.arch_.preset}}},
              {"seed", model.seed},
              {"trained", model.trained},
              {"policy",
               {{"kind", model.policy.kind == ThresholdPolicy::Kind::fixed
                             ? "fixed"
                             : "fdr_calibrated"},
                {"fixed_value", model.policy.fixed_value},
                {"target_fdr", model.policy.target_fdr}}},
              {"train_sample_ids", model.train_sample_ids}};
  if (model.calibrated_threshold) doc["calibrated_threshold"] = *model.calibrated_threshold;
  json params = json::object();
  for (const auto& p : model.params()) {
    params[p.name] = std::vector<double>(p.value, p.value + p.size);
  }
  doc["params"] = params;
  return doc.dump();
}

CnnModel cnn_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.at("kind").get<std::string>() != "cnn") {
    throw ValidationError("model archive is not a CNN");
  }
  CnnArch arch;
  arch.image_size = doc.at("arch").at("image_size").get<int>();
  arch.base_channels = doc.at("arch").at("base_channels").get<int>();
  arch.deep_channels = doc.at("arch").at("deep_channels").get<int>();
  arch.crop_fraction = doc.at("arch").at("crop_fraction").get<double>();
  arch.preset = doc.at("arch").at("preset").get<std::string>();

  CnnModel model(arch, doc.at("seed").get<std::uint64_t>());
  model.trained = doc.at("trained").get<bool>();
  model.policy.kind = doc.at("policy").at("kind").get<std::string>() == "fixed"
                          ? ThresholdPolicy::Kind::fixed
                          : ThresholdPolicy::Kind::fdr_calibrated;
  model.policy.fixed_value = doc.at("policy").at("fixed_value").get<double>();
  model.policy.target_fdr = doc.at("policy").at("target_fdr").get<double>();
  model.train_sample_ids = doc.at("train_sample_ids").get<std::vector<std::string>>();
  if (doc.contains("calibrated_threshold")) {
    model.calibrated_threshold = doc["calibrated_threshold"].get<double>();
  }
  for (auto& p : model.params()) {
    const auto values = doc.at("params").at(p.name).get<std::vector<double>>();
    if (values.size() != p.size) throw ValidationError("parameter size mismatch: " + p.name);
    std::copy(values.begin(), values.end(), p.value);
  }
  return model;
}

}  // namespace padbench
