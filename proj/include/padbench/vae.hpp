#pragma once

#include <optional>
#include <string>
#include <vector>

#include "padbench/dataset.hpp"
#include "padbench/nn.hpp"

namespace padbench {

struct VaeArch {
  int image_size = 64;
  int latent_dim = 128;
  int stem_kernel = 5;
  int stem_stride = 4;
  int base_channels = 8;
  int deep_channels = 16;
  int blocks_per_scale = 1;  // residual blocks at each encoder/decoder scale
  std::string preset = "desk";

  static VaeArch desk();  // 64x64 inputs, d=128, 4 residual blocks total
  static VaeArch tiny();  // gradient-check scale
};

struct VaeTrainConfig {
  VaeArch arch;
  int epochs = 30;
  int batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  bool literal_negative_kl = false;  // the as-printed loss sign, for comparison
};

// Convolutional residual VAE. The encoder maps an image to (mu, log sigma^2);
// the decoder mirrors it back through nearest-neighbour upsampling.
class VaeModel {
 public:
  VaeModel() = default;
  VaeModel(const VaeArch& arch, std::uint64_t seed);

  struct ForwardState {
    nn::Vector mu;
    nn::Vector log_var;
    nn::Tensor reconstruction;
  };

  // deterministic encoder pass (no sampling)
  std::pair<nn::Vector, nn::Vector> encode(const nn::Tensor& x) const;
  nn::Tensor decode(const nn::Vector& z);

  // forward with fixed noise, caching everything needed for backward
  ForwardState forward_train(const nn::Tensor& x, const nn::Vector& noise);
  // fills parameter gradients for loss = sign * c * KL + MSE; returns the loss
  double loss_and_grad(const nn::Tensor& x, const nn::Vector& noise, double c,
                       bool literal_negative_kl = false);

  std::vector<nn::ParamView> params();
  std::string checksum();
  const VaeArch& arch() const { return arch_; }

  // training metadata
  std::uint64_t seed = 0;
  std::size_t train_set_size = 0;   // N
  int batch_size = 0;               // b
  double kl_weight = 0.0;           // c = b / N
  std::optional<double> first_epoch_loss;
  std::optional<double> final_epoch_loss;
  std::vector<std::string> train_sample_ids;

 private:
  friend std::string vae_to_json(VaeModel& model);
  VaeArch arch_;
  nn::Conv2d stem_;
  nn::Relu stem_relu_;
  std::vector<nn::ResBlock> enc_blocks1_;
  nn::Conv2d down_;
  nn::Relu down_relu_;
  std::vector<nn::ResBlock> enc_blocks2_;
  nn::Linear fc_latent_;  // -> [mu, log_var]

  nn::Linear fc_decode_;
  nn::Relu decode_relu_;
  std::vector<nn::ResBlock> dec_blocks2_;
  struct UpStage {
    nn::Upsample2x up;
    nn::Conv2d conv;
    nn::Relu relu;  // unused on the last stage
  };
  std::vector<UpStage> up_stages_;
  std::vector<nn::ResBlock> dec_blocks1_;  // after the first upsample stage
  nn::Sigmoid output_;

  int deep_size_ = 0;

  nn::Tensor encoder_forward(const nn::Tensor& x, nn::Vector& mu, nn::Vector& log_var);
  void encoder_backward(const nn::Vector& d_mu, const nn::Vector& d_log_var);
  nn::Tensor decoder_forward(const nn::Vector& z);
  nn::Vector decoder_backward(const nn::Tensor& d_out);
};

// c * KL(q || N(0, I)) + MSE, or the literal negative-KL variant
double vae_loss(const nn::Tensor& x, const nn::Tensor& x_hat, const nn::Vector& mu,
                const nn::Vector& log_var, double c, bool literal_negative_kl = false);

// Trains on bona fide images only; any attack-labeled input raises.
VaeModel train_vae(const std::vector<LabeledImage>& live_images,
                   const VaeTrainConfig& config);

std::pair<nn::Vector, nn::Vector> encode(const VaeModel& model, const Image& image);

struct MlpHeadConfig {
  int hidden_dim = 64;
  int epochs = 120;
  int batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

struct MlpHead {
  nn::Mlp mlp;
  std::uint64_t seed = 0;
  bool trained = false;
  std::vector<std::string> train_sample_ids;

  // softmax over (bona fide, attack)
  nn::Vector probabilities(const nn::Vector& mu) { return mlp.probabilities(mu); }
};

// Trains the head on latent mu vectors; VAE weights stay frozen.
MlpHead train_mlp_head(const VaeModel& model, const std::vector<LabeledImage>& samples,
                       const MlpHeadConfig& config);

// softmax attack-class probability
double vaepad_score(const VaeModel& model, MlpHead& head, const Image& image);

std::string vae_to_json(VaeModel& model);
VaeModel vae_from_json(const std::string& text);
std::string mlp_head_to_json(MlpHead& head);
MlpHead mlp_head_from_json(const std::string& text);

}  // namespace padbench
