#include "padbench/vae.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "padbench/types.hpp"

namespace padbench {

using nn::Matrix;
using nn::Tensor;
using nn::Vector;
using nlohmann::json;

VaeArch VaeArch::desk() { return VaeArch{}; }

VaeArch VaeArch::tiny() {
  VaeArch arch;
  arch.image_size = 8;
  arch.latent_dim = 6;
  arch.stem_kernel = 3;
  arch.stem_stride = 2;
  arch.base_channels = 3;
  arch.deep_channels = 4;
  arch.blocks_per_scale = 1;
  arch.preset = "tiny";
  return arch;
}

namespace {

void check_arch(const VaeArch& arch) {
  if (arch.image_size % (arch.stem_stride * 2) != 0) {
    throw ValidationError("image size must be divisible by stem_stride * 2");
  }
  const int deep = arch.image_size / (arch.stem_stride * 2);
  if (deep < 2) throw ValidationError("image too small for the architecture");
  if (arch.latent_dim <= 0) throw ValidationError("latent dim must be positive");
}

int upsample_stage_count(const VaeArch& arch) {
  const int deep = arch.image_size / (arch.stem_stride * 2);
  int stages = 0;
  for (int s = deep; s < arch.image_size; s *= 2) ++stages;
  return stages;
}

}  // namespace

VaeModel::VaeModel(const VaeArch& arch, std::uint64_t seed_value) : arch_(arch) {
  check_arch(arch);
  seed = seed_value;
  Rng rng(mix_seed(seed_value, 0x766165ULL));
  deep_size_ = arch.image_size / (arch.stem_stride * 2);

  stem_ = nn::Conv2d(1, arch.base_channels, arch.stem_kernel, arch.stem_stride,
                     arch.stem_kernel / 2, rng);
  for (int i = 0; i < arch.blocks_per_scale; ++i) {
    enc_blocks1_.emplace_back(arch.base_channels, rng);
  }
  down_ = nn::Conv2d(arch.base_channels, arch.deep_channels, 3, 2, 1, rng);
  for (int i = 0; i < arch.blocks_per_scale; ++i) {
    enc_blocks2_.emplace_back(arch.deep_channels, rng);
  }
  const int deep_dim = arch.deep_channels * deep_size_ * deep_size_;
  fc_latent_ = nn::Linear(deep_dim, 2 * arch.latent_dim, rng);
  // start near the prior: mu ~ 0, log sigma^2 ~ 0, so the KL term cannot
  // explode on the first steps
  fc_latent_.weight() *= 0.05;

  fc_decode_ = nn::Linear(arch.latent_dim, deep_dim, rng);
  for (int i = 0; i < arch.blocks_per_scale; ++i) {
    dec_blocks2_.emplace_back(arch.deep_channels, rng);
  }
  const int stages = upsample_stage_count(arch);
  for (int i = 0; i < stages; ++i) {
    UpStage stage;
    const int in_ch = (i == 0) ? arch.deep_channels : arch.base_channels;
    const int out_ch = (i == stages - 1) ? 1 : arch.base_channels;
    stage.conv = nn::Conv2d(in_ch, out_ch, 3, 1, 1, rng);
    up_stages_.push_back(std::move(stage));
  }
  if (stages > 1) {
    for (int i = 0; i < arch.blocks_per_scale; ++i) {
      dec_blocks1_.emplace_back(arch.base_channels, rng);
    }
  }
}

Tensor VaeModel::encoder_forward(const Tensor& x, Vector& mu, Vector& log_var) {
  Tensor h = stem_relu_.forward(stem_.forward(x));
  for (auto& block : enc_blocks1_) h = block.forward(h);
  h = down_relu_.forward(down_.forward(h));
  for (auto& block : enc_blocks2_) h = block.forward(h);
  const Vector latent = fc_latent_.forward(h.data);
  mu = latent.head(arch_.latent_dim);
  log_var = latent.tail(arch_.latent_dim);
  return h;
}

void VaeModel::encoder_backward(const Vector& d_mu, const Vector& d_log_var) {
  Vector d_latent(2 * arch_.latent_dim);
  d_latent.head(arch_.latent_dim) = d_mu;
  d_latent.tail(arch_.latent_dim) = d_log_var;
  const Vector d_flat = fc_latent_.backward(d_latent);

  Tensor dh = Tensor::zeros(arch_.deep_channels, deep_size_, deep_size_);
  dh.data = d_flat;
  for (auto it = enc_blocks2_.rbegin(); it != enc_blocks2_.rend(); ++it) {
    dh = it->backward(dh);
  }
  dh = down_.backward(down_relu_.backward(dh));
  for (auto it = enc_blocks1_.rbegin(); it != enc_blocks1_.rend(); ++it) {
    dh = it->backward(dh);
  }
  stem_.backward(stem_relu_.backward(dh));
}

Tensor VaeModel::decoder_forward(const Vector& z) {
  const Vector flat = decode_relu_.forward(fc_decode_.forward(z));
  Tensor h = Tensor::zeros(arch_.deep_channels, deep_size_, deep_size_);
  h.data = flat;
  for (auto& block : dec_blocks2_) h = block.forward(h);
  for (std::size_t i = 0; i < up_stages_.size(); ++i) {
    auto& stage = up_stages_[i];
    h = stage.conv.forward(stage.up.forward(h));
    if (i + 1 < up_stages_.size()) {
      h = stage.relu.forward(h);
      if (i == 0) {
        for (auto& block : dec_blocks1_) h = block.forward(h);
      }
    }
  }
  return output_.forward(h);
}

Vector VaeModel::decoder_backward(const Tensor& d_out) {
  Tensor dh = output_.backward(d_out);
  for (std::size_t ri = up_stages_.size(); ri-- > 0;) {
    auto& stage = up_stages_[ri];
    if (ri + 1 < up_stages_.size()) {
      if (ri == 0) {
        for (auto it = dec_blocks1_.rbegin(); it != dec_blocks1_.rend(); ++it) {
          dh = it->backward(dh);
        }
      }
      dh = stage.relu.backward(dh);
    }
    dh = stage.up.backward(stage.conv.backward(dh));
  }
  for (auto it = dec_blocks2_.rbegin(); it != dec_blocks2_.rend(); ++it) {
    dh = it->backward(dh);
  }
  const Vector d_flat = decode_relu_.backward_vec(dh.data);
  return fc_decode_.backward(d_flat);
}

std::pair<Vector, Vector> VaeModel::encode(const Tensor& x) const {
  Tensor h = nn::Relu::apply(stem_.apply(x));
  for (const auto& block : enc_blocks1_) h = block.apply(h);
  h = nn::Relu::apply(down_.apply(h));
  for (const auto& block : enc_blocks2_) h = block.apply(h);
  const Vector latent = fc_latent_.apply(h.data);
  return {latent.head(arch_.latent_dim), latent.tail(arch_.latent_dim)};
}

Tensor VaeModel::decode(const Vector& z) {
  if (z.size() != arch_.latent_dim) throw ValidationError("latent size mismatch");
  return decoder_forward(z);
}

VaeModel::ForwardState VaeModel::forward_train(const Tensor& x, const Vector& noise) {
  ForwardState state;
  encoder_forward(x, state.mu, state.log_var);
  const Vector sigma = (0.5 * state.log_var).array().exp().matrix();
  const Vector z = state.mu + sigma.cwiseProduct(noise);
  state.reconstruction = decoder_forward(z);
  return state;
}

double VaeModel::loss_and_grad(const Tensor& x, const Vector& noise, double c,
                               bool literal_negative_kl) {
  if (c <= 0.0) throw ValidationError("KL weight c must be positive");
  const ForwardState state = forward_train(x, noise);
  const double loss =
      vae_loss(x, state.reconstruction, state.mu, state.log_var, c, literal_negative_kl);

  // d(MSE)/d(xhat) = 2 (xhat - x) / P
  Tensor d_recon = state.reconstruction;
  d_recon.data = 2.0 * (state.reconstruction.data - x.data) /
                 static_cast<double>(x.data.size());
  const Vector dz = decoder_backward(d_recon);

  const double kl_sign = literal_negative_kl ? -1.0 : 1.0;
  const Vector sigma = (0.5 * state.log_var).array().exp().matrix();
  // reparameterization: z = mu + sigma(log_var) * eps
  Vector d_mu = dz;
  Vector d_log_var = 0.5 * dz.cwiseProduct(sigma).cwiseProduct(noise);
  // KL term: d/dmu = mu, d/dlogvar = (exp(logvar) - 1) / 2
  d_mu += kl_sign * c * state.mu;
  d_log_var += kl_sign * c * 0.5 * (state.log_var.array().exp() - 1.0).matrix();
  encoder_backward(d_mu, d_log_var);
  return loss;
}

std::vector<nn::ParamView> VaeModel::params() {
  std::vector<nn::ParamView> out;
  stem_.collect_params("enc.stem", out);
  for (std::size_t i = 0; i < enc_blocks1_.size(); ++i) {
    enc_blocks1_[i].collect_params("enc.block1." + std::to_string(i), out);
  }
  down_.collect_params("enc.down", out);
  for (std::size_t i = 0; i < enc_blocks2_.size(); ++i) {
    enc_blocks2_[i].collect_params("enc.block2." + std::to_string(i), out);
  }
  fc_latent_.collect_params("enc.fc_latent", out);
  fc_decode_.collect_params("dec.fc", out);
  for (std::size_t i = 0; i < dec_blocks2_.size(); ++i) {
    dec_blocks2_[i].collect_params("dec.block2." + std::to_string(i), out);
  }
  for (std::size_t i = 0; i < up_stages_.size(); ++i) {
    up_stages_[i].conv.collect_params("dec.up." + std::to_string(i), out);
  }
  for (std::size_t i = 0; i < dec_blocks1_.size(); ++i) {
    dec_blocks1_[i].collect_params("dec.block1." + std::to_string(i), out);
  }
  return out;
}

std::string VaeModel::checksum() { return nn::parameter_checksum(params()); }

double vae_loss(const Tensor& x, const Tensor& x_hat, const Vector& mu,
                const Vector& log_var, double c, bool literal_negative_kl) {
  if (c <= 0.0) throw ValidationError("KL weight c must be positive");
  const double kl = nn::kl_to_standard_normal(mu, log_var);
  const double mse = nn::mean_squared_error(x, x_hat);
  return (literal_negative_kl ? -c : c) * kl + mse;
}

VaeModel train_vae(const std::vector<LabeledImage>& live_images,
                   const VaeTrainConfig& config) {
  if (live_images.empty()) throw ValidationError("VAE training set is empty");
  for (const auto& sample : live_images) {
    if (sample.label != ClassLabel::bona_fide) {
      throw ValidationError("VAE training is live-only; got attack sample '" +
                            sample.sample_id + "'");
    }
  }
  if (config.batch_size <= 0) throw ValidationError("batch size must be positive");

  VaeModel model(config.arch, config.seed);
  model.train_set_size = live_images.size();
  model.batch_size = config.batch_size;
  model.kl_weight = static_cast<double>(config.batch_size) /
                    static_cast<double>(live_images.size());
  for (const auto& sample : live_images) model.train_sample_ids.push_back(sample.sample_id);

  std::vector<Tensor> inputs;
  inputs.reserve(live_images.size());
  for (const auto& sample : live_images) {
    inputs.push_back(to_input_tensor(sample.image, config.arch.image_size));
  }

  auto params = model.params();
  nn::Adam optimizer(config.learning_rate);
  Rng order_rng(mix_seed(config.seed, 0x6f726472ULL));
  Rng noise_rng(mix_seed(config.seed, 0x6e6f6973ULL));

  std::vector<std::size_t> order(inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const double c = model.kl_weight;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      optimizer.zero_grad(params);
      for (std::size_t i = start; i < stop; ++i) {
        Vector noise(config.arch.latent_dim);
        for (Eigen::Index j = 0; j < noise.size(); ++j) noise[j] = noise_rng.normal();
        epoch_loss +=
            model.loss_and_grad(inputs[order[i]], noise, c, config.literal_negative_kl);
      }
      // average the batch gradient
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (auto& p : params) {
        Eigen::Map<Vector>(p.grad, p.size) *= scale;
      }
      optimizer.step(params);
    }
    epoch_loss /= static_cast<double>(inputs.size());
    if (epoch == 0) model.first_epoch_loss = epoch_loss;
    model.final_epoch_loss = epoch_loss;
  }
  return model;
}

std::pair<Vector, Vector> encode(const VaeModel& model, const Image& image) {
  return model.encode(to_input_tensor(image, model.arch().image_size));
}

MlpHead train_mlp_head(const VaeModel& model, const std::vector<LabeledImage>& samples,
                       const MlpHeadConfig& config) {
  bool has_attack = false, has_bona = false;
  for (const auto& sample : samples) {
    (is_attack(sample.label) ? has_attack : has_bona) = true;
  }
  if (!has_attack || !has_bona) {
    throw ValidationError("MLP head training needs both classes");
  }

  // encode with the frozen VAE; gradients never reach the encoder
  std::vector<Vector> features;
  std::vector<int> targets;
  features.reserve(samples.size());
  for (const auto& sample : samples) {
    features.push_back(encode(model, sample.image).first);
    targets.push_back(is_attack(sample.label) ? 1 : 0);
  }

  MlpHead head;
  head.seed = config.seed;
  Rng rng(mix_seed(config.seed, 0x686561ULL));
  head.mlp = nn::Mlp(model.arch().latent_dim, config.hidden_dim, 2, rng);
  for (const auto& sample : samples) head.train_sample_ids.push_back(sample.sample_id);

  auto params = head.mlp.params();
  nn::Adam optimizer(config.learning_rate);
  Rng order_rng(mix_seed(config.seed, 0x6f726465ULL));
  std::vector<std::size_t> order(features.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      optimizer.zero_grad(params);
      for (std::size_t i = start; i < stop; ++i) {
        const Vector logits = head.mlp.forward(features[order[i]]);
        Vector grad_logits;
        nn::softmax_cross_entropy(logits, targets[order[i]], grad_logits);
        head.mlp.backward(grad_logits);
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (auto& p : params) {
        Eigen::Map<Vector>(p.grad, p.size) *= scale;
      }
      optimizer.step(params);
    }
  }
  head.trained = true;
  return head;
}

double vaepad_score(const VaeModel& model, MlpHead& head, const Image& image) {
  if (!head.trained) throw ValidationError("MLP head is not trained");
  const auto [mu, log_var] = encode(model, image);
  return head.probabilities(mu)[1];
}

namespace {

json params_to_json(std::vector<nn::ParamView> params) {
  json doc = json::object();
  for (const auto& p : params) {
    doc[p.name] = std::vector<double>(p.value, p.value + p.size);
  }
  return doc;
}

void params_from_json(const json& doc, std::vector<nn::ParamView> params) {
  for (auto& p : params) {
    const auto values = doc.at(p.name).get<std::vector<double>>();
    if (values.size() != p.size) {
      throw ValidationError("parameter size mismatch for " + p.name);
    }
    std::copy(values.begin(), values.end(), p.value);
  }
}

json arch_to_json(const VaeArch& arch) {
  return {{"image_size", arch.image_size},
          {"latent_dim", arch.latent_dim},
          {"stem_kernel", arch.stem_kernel},
          {"stem_stride", arch.stem_stride},
          {"base_channels", arch.base_channels},
          {"deep_channels", arch.deep_channels},
          {"blocks_per_scale", arch.blocks_per_scale},
          {"preset", arch.preset}};
}

VaeArch arch_from_json(const json& doc) {
  VaeArch arch;
  arch.image_size = doc.at("image_size").get<int>();
  arch.latent_dim = doc.at("latent_dim").get<int>();
  arch.stem_kernel = doc.at("stem_kernel").get<int>();
  arch.stem_stride = doc.at("stem_stride").get<int>();
  arch.base_channels = doc.at("base_channels").get<int>();
  arch.deep_channels = doc.at("deep_channels").get<int>();
  arch.blocks_per_scale = doc.at("blocks_per_scale").get<int>();
  arch.preset = doc.at("preset").get<std::string>();
  return arch;
}

}  // namespace

std::string vae_to_json(VaeModel& model) {
  json doc = {{"kind", "vae"},
              {"arch", arch_to_json(model.arch_)},
              {"seed", model.seed},
              {"train_set_size", model.train_set_size},
              {"batch_size", model.batch_size},
              {"kl_weight", model.kl_weight},
              {"train_sample_ids", model.train_sample_ids},
              {"params", params_to_json(model.params())}};
  if (model.first_epoch_loss) doc["first_epoch_loss"] = *model.first_epoch_loss;
  if (model.final_epoch_loss) doc["final_epoch_loss"] = *model.final_epoch_loss;
  return doc.dump();
}

VaeModel vae_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.at("kind").get<std::string>() != "vae") {
    throw ValidationError("model archive is not a VAE");
  }
  VaeModel model(arch_from_json(doc.at("arch")), doc.at("seed").get<std::uint64_t>());
  model.train_set_size = doc.at("train_set_size").get<std::size_t>();
  model.batch_size = doc.at("batch_size").get<int>();
  model.kl_weight = doc.at("kl_weight").get<double>();
  model.train_sample_ids = doc.at("train_sample_ids").get<std::vector<std::string>>();
  if (doc.contains("first_epoch_loss")) {
    model.first_epoch_loss = doc["first_epoch_loss"].get<double>();
  }
  if (doc.contains("final_epoch_loss")) {
    model.final_epoch_loss = doc["final_epoch_loss"].get<double>();
  }
  params_from_json(doc.at("params"), model.params());
  return model;
}

std::string mlp_head_to_json(MlpHead& head) {
  const json doc = {{"kind", "mlp_head"},
                    {"seed", head.seed},
                    {"trained", head.trained},
                    {"in_dim", head.mlp.in_dim()},
                    {"hidden_dim", head.mlp.hidden_dim()},
                    {"train_sample_ids", head.train_sample_ids},
                    {"params", params_to_json(head.mlp.params())}};
  return doc.dump();
}

MlpHead mlp_head_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.at("kind").get<std::string>() != "mlp_head") {
    throw ValidationError("model archive is not an MLP head");
  }
  MlpHead head;
  head.seed = doc.at("seed").get<std::uint64_t>();
  head.trained = doc.at("trained").get<bool>();
  head.train_sample_ids = doc.at("train_sample_ids").get<std::vector<std::string>>();
  Rng rng(mix_seed(head.seed, 0x686561ULL));
  head.mlp = nn::Mlp(doc.at("in_dim").get<int>(), doc.at("hidden_dim").get<int>(), 2, rng);
  params_from_json(doc.at("params"), head.mlp.params());
  return head;
}

}  // namespace padbench
