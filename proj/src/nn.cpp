#include "padbench/nn.hpp"

#include <cmath>
#include <cstring>

#include "padbench/digest.hpp"
#include "padbench/types.hpp"

namespace padbench::nn {

namespace {

double he_limit(int fan_in) { return std::sqrt(6.0 / fan_in); }

void init_uniform(Matrix& m, double limit, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.uniform(-limit, limit);
  }
}

}  // namespace

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad,
               Rng& rng)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(pad) {
  const int fan_in = in_channels * kernel * kernel;
  weight_.resize(out_channels, fan_in);
  init_uniform(weight_, he_limit(fan_in), rng);
  bias_ = Vector::Zero(out_channels);
  grad_weight_ = Matrix::Zero(out_channels, fan_in);
  grad_bias_ = Vector::Zero(out_channels);
}

void Conv2d::im2col(const Tensor& x, Matrix& cols) const {
  const int oh = out_size(x.height);
  const int ow = out_size(x.width);
  cols.resize(static_cast<Eigen::Index>(in_channels_) * kernel_ * kernel_,
              static_cast<Eigen::Index>(oh) * ow);
  cols.setZero();
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const Eigen::Index col = static_cast<Eigen::Index>(oy) * ow + ox;
      Eigen::Index row = 0;
      for (int c = 0; c < in_channels_; ++c) {
        for (int ky = 0; ky < kernel_; ++ky) {
          const int iy = oy * stride_ + ky - pad_;
          for (int kx = 0; kx < kernel_; ++kx, ++row) {
            const int ix = ox * stride_ + kx - pad_;
            if (iy >= 0 && iy < x.height && ix >= 0 && ix < x.width) {
              cols(row, col) = x.at(c, iy, ix);
            }
          }
        }
      }
    }
  }
}

Tensor Conv2d::forward(const Tensor& x) {
  if (x.channels != in_channels_) throw ValidationError("conv input channel mismatch");
  last_h_ = x.height;
  last_w_ = x.width;
  im2col(x, cols_);
  const int oh = out_size(x.height);
  const int ow = out_size(x.width);
  Tensor y = Tensor::zeros(out_channels_, oh, ow);
  Eigen::Map<Matrix> out(y.data.data(), oh * ow, out_channels_);
  // out^T = W * cols + b
  out.noalias() = (weight_ * cols_).transpose();
  out.rowwise() += bias_.transpose();
  return y;
}

Tensor Conv2d::apply(const Tensor& x) const {
  if (x.channels != in_channels_) throw ValidationError("conv input channel mismatch");
  Matrix cols;
  im2col(x, cols);
  const int oh = out_size(x.height);
  const int ow = out_size(x.width);
  Tensor y = Tensor::zeros(out_channels_, oh, ow);
  Eigen::Map<Matrix> out(y.data.data(), oh * ow, out_channels_);
  out.noalias() = (weight_ * cols).transpose();
  out.rowwise() += bias_.transpose();
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const int oh = grad_out.height;
  const int ow = grad_out.width;
  Eigen::Map<const Matrix> dy(grad_out.data.data(), oh * ow, out_channels_);
  grad_weight_.noalias() += dy.transpose() * cols_.transpose();
  grad_bias_.noalias() += dy.colwise().sum().transpose();

  const Matrix dcols = weight_.transpose() * dy.transpose();
  Tensor dx = Tensor::zeros(in_channels_, last_h_, last_w_);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const Eigen::Index col = static_cast<Eigen::Index>(oy) * ow + ox;
      Eigen::Index row = 0;
      for (int c = 0; c < in_channels_; ++c) {
        for (int ky = 0; ky < kernel_; ++ky) {
          const int iy = oy * stride_ + ky - pad_;
          for (int kx = 0; kx < kernel_; ++kx, ++row) {
            const int ix = ox * stride_ + kx - pad_;
            if (iy >= 0 && iy < last_h_ && ix >= 0 && ix < last_w_) {
              dx.at(c, iy, ix) += dcols(row, col);
            }
          }
        }
      }
    }
  }
  return dx;
}

void Conv2d::collect_params(const std::string& prefix, std::vector<ParamView>& out) {
  out.push_back({prefix + ".weight", weight_.data(), grad_weight_.data(),
                 static_cast<std::size_t>(weight_.size())});
  out.push_back({prefix + ".bias", bias_.data(), grad_bias_.data(),
                 static_cast<std::size_t>(bias_.size())});
}

Tensor Relu::forward(const Tensor& x) {
  Tensor y = x;
  mask_ = Vector::Zero(x.data.size());
  for (Eigen::Index i = 0; i < x.data.size(); ++i) {
    if (x.data[i] > 0.0) {
      mask_[i] = 1.0;
    } else {
      y.data[i] = 0.0;
    }
  }
  return y;
}

Tensor Relu::backward(const Tensor& grad_out) const {
  Tensor dx = grad_out;
  dx.data.array() *= mask_.array();
  return dx;
}

Vector Relu::forward(const Vector& x) {
  Vector y = x;
  mask_ = Vector::Zero(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) {
      mask_[i] = 1.0;
    } else {
      y[i] = 0.0;
    }
  }
  return y;
}

Vector Relu::backward_vec(const Vector& grad_out) const {
  return grad_out.array() * mask_.array();
}

Tensor Relu::apply(const Tensor& x) {
  Tensor y = x;
  y.data = y.data.cwiseMax(0.0);
  return y;
}

Vector Relu::apply(const Vector& x) { return x.cwiseMax(0.0); }

Tensor Sigmoid::forward(const Tensor& x) {
  Tensor y = x;
  for (Eigen::Index i = 0; i < y.data.size(); ++i) {
    y.data[i] = 1.0 / (1.0 + std::exp(-y.data[i]));
  }
  value_ = y.data;
  return y;
}

Tensor Sigmoid::backward(const Tensor& grad_out) const {
  Tensor dx = grad_out;
  dx.data.array() *= value_.array() * (1.0 - value_.array());
  return dx;
}

Tensor Sigmoid::apply(const Tensor& x) {
  Tensor y = x;
  for (Eigen::Index i = 0; i < y.data.size(); ++i) {
    y.data[i] = 1.0 / (1.0 + std::exp(-y.data[i]));
  }
  return y;
}

Linear::Linear(int in_dim, int out_dim, Rng& rng) {
  weight_.resize(out_dim, in_dim);
  init_uniform(weight_, he_limit(in_dim), rng);
  bias_ = Vector::Zero(out_dim);
  grad_weight_ = Matrix::Zero(out_dim, in_dim);
  grad_bias_ = Vector::Zero(out_dim);
}

Vector Linear::forward(const Vector& x) {
  input_ = x;
  return weight_ * x + bias_;
}

Vector Linear::backward(const Vector& grad_out) {
  grad_weight_.noalias() += grad_out * input_.transpose();
  grad_bias_ += grad_out;
  return weight_.transpose() * grad_out;
}

void Linear::collect_params(const std::string& prefix, std::vector<ParamView>& out) {
  out.push_back({prefix + ".weight", weight_.data(), grad_weight_.data(),
                 static_cast<std::size_t>(weight_.size())});
  out.push_back({prefix + ".bias", bias_.data(), grad_bias_.data(),
                 static_cast<std::size_t>(bias_.size())});
}

ResBlock::ResBlock(int channels, Rng& rng)
    : conv1_(channels, channels, 3, 1, 1, rng), conv2_(channels, channels, 3, 1, 1, rng) {}

Tensor ResBlock::forward(const Tensor& x) {
  Tensor h = relu1_.forward(conv1_.forward(x));
  Tensor y = conv2_.forward(h);
  y.data += x.data;  // identity skip
  return relu_out_.forward(y);
}

Tensor ResBlock::backward(const Tensor& grad_out) {
  const Tensor d_sum = relu_out_.backward(grad_out);
  Tensor dx = conv1_.backward(relu1_.backward(conv2_.backward(d_sum)));
  dx.data += d_sum.data;  // skip branch
  return dx;
}

Tensor ResBlock::apply(const Tensor& x) const {
  Tensor y = conv2_.apply(Relu::apply(conv1_.apply(x)));
  y.data += x.data;
  return Relu::apply(y);
}

void ResBlock::collect_params(const std::string& prefix, std::vector<ParamView>& out) {
  conv1_.collect_params(prefix + ".conv1", out);
  conv2_.collect_params(prefix + ".conv2", out);
}

Tensor Upsample2x::forward(const Tensor& x) {
  in_h_ = x.height;
  in_w_ = x.width;
  channels_ = x.channels;
  Tensor y = Tensor::zeros(x.channels, x.height * 2, x.width * 2);
  for (int c = 0; c < x.channels; ++c) {
    for (int yy = 0; yy < y.height; ++yy) {
      for (int xx = 0; xx < y.width; ++xx) {
        y.at(c, yy, xx) = x.at(c, yy / 2, xx / 2);
      }
    }
  }
  return y;
}

Tensor Upsample2x::backward(const Tensor& grad_out) const {
  Tensor dx = Tensor::zeros(channels_, in_h_, in_w_);
  for (int c = 0; c < channels_; ++c) {
    for (int yy = 0; yy < grad_out.height; ++yy) {
      for (int xx = 0; xx < grad_out.width; ++xx) {
        dx.at(c, yy / 2, xx / 2) += grad_out.at(c, yy, xx);
      }
    }
  }
  return dx;
}

Tensor Upsample2x::apply(const Tensor& x) {
  Tensor y = Tensor::zeros(x.channels, x.height * 2, x.width * 2);
  for (int c = 0; c < x.channels; ++c) {
    for (int yy = 0; yy < y.height; ++yy) {
      for (int xx = 0; xx < y.width; ++xx) {
        y.at(c, yy, xx) = x.at(c, yy / 2, xx / 2);
      }
    }
  }
  return y;
}

Vector GlobalAvgPool::forward(const Tensor& x) {
  h_ = x.height;
  w_ = x.width;
  channels_ = x.channels;
  Vector y = Vector::Zero(x.channels);
  const double scale = 1.0 / (static_cast<double>(x.height) * x.width);
  for (int c = 0; c < x.channels; ++c) {
    double sum = 0.0;
    for (int yy = 0; yy < x.height; ++yy) {
      for (int xx = 0; xx < x.width; ++xx) sum += x.at(c, yy, xx);
    }
    y[c] = sum * scale;
  }
  return y;
}

Tensor GlobalAvgPool::backward(const Vector& grad_out) const {
  Tensor dx = Tensor::zeros(channels_, h_, w_);
  const double scale = 1.0 / (static_cast<double>(h_) * w_);
  for (int c = 0; c < channels_; ++c) {
    const double g = grad_out[c] * scale;
    for (int yy = 0; yy < h_; ++yy) {
      for (int xx = 0; xx < w_; ++xx) dx.at(c, yy, xx) = g;
    }
  }
  return dx;
}

Vector GlobalAvgPool::apply(const Tensor& x) {
  Vector y = Vector::Zero(x.channels);
  const double scale = 1.0 / (static_cast<double>(x.height) * x.width);
  for (int c = 0; c < x.channels; ++c) {
    double sum = 0.0;
    for (int yy = 0; yy < x.height; ++yy) {
      for (int xx = 0; xx < x.width; ++xx) sum += x.at(c, yy, xx);
    }
    y[c] = sum * scale;
  }
  return y;
}

Vector softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp();
  return e / e.sum();
}

double softmax_cross_entropy(const Vector& logits, int target, Vector& grad_logits) {
  const Vector p = softmax(logits);
  grad_logits = p;
  grad_logits[target] -= 1.0;
  return -std::log(std::max(p[target], 1e-300));
}

double kl_to_standard_normal(const Vector& mu, const Vector& log_var) {
  if (mu.size() != log_var.size()) throw ValidationError("KL dimension mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    kl += mu[i] * mu[i] + std::exp(log_var[i]) - log_var[i] - 1.0;
  }
  return 0.5 * kl;
}

double mean_squared_error(const Tensor& x, const Tensor& x_hat) {
  if (x.data.size() != x_hat.data.size()) throw ValidationError("MSE shape mismatch");
  return (x.data - x_hat.data).squaredNorm() / static_cast<double>(x.data.size());
}

void Adam::step(std::vector<ParamView>& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(Vector::Zero(p.size));
      v_.emplace_back(Vector::Zero(p.size));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::Map<Vector> value(params[i].value, params[i].size);
    Eigen::Map<const Vector> grad(params[i].grad, params[i].size);
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad;
    v_[i] = beta2_ * v_[i].array().matrix() +
            (1.0 - beta2_) * grad.array().square().matrix();
    const auto m_hat = m_[i].array() / bc1;
    const auto v_hat = v_[i].array() / bc2;
    value.array() -= lr_ * m_hat / (v_hat.sqrt() + eps_);
  }
}

void Adam::zero_grad(std::vector<ParamView>& params) {
  for (auto& p : params) {
    Eigen::Map<Vector>(p.grad, p.size).setZero();
  }
}

Mlp::Mlp(int in_dim, int hidden_dim, int out_dim, Rng& rng)
    : fc1_(in_dim, hidden_dim, rng), fc2_(hidden_dim, out_dim, rng) {}

Vector Mlp::forward(const Vector& x) {
  return fc2_.forward(relu_.forward(fc1_.forward(x)));
}

void Mlp::backward(const Vector& grad_logits) {
  fc1_.backward(relu_.backward_vec(fc2_.backward(grad_logits)));
}

Vector Mlp::probabilities(const Vector& x) const {
  return softmax(fc2_.apply(Relu::apply(fc1_.apply(x))));
}

std::vector<ParamView> Mlp::params() {
  std::vector<ParamView> out;
  fc1_.collect_params("fc1", out);
  fc2_.collect_params("fc2", out);
  return out;
}

std::string parameter_checksum(std::vector<ParamView> params) {
  std::vector<std::uint8_t> bytes;
  for (const auto& p : params) {
    const auto* raw = reinterpret_cast<const std::uint8_t*>(p.value);
    bytes.insert(bytes.end(), raw, raw + p.size * sizeof(double));
  }
  return sha256_hex(bytes);
}

double max_gradient_error(const std::function<double()>& loss,
                          std::vector<ParamView> params, double fd_step) {
  // analytic gradients must already be in place; copy them before perturbing
  std::vector<Vector> analytic;
  for (const auto& p : params) {
    analytic.emplace_back(Eigen::Map<const Vector>(p.grad, p.size));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = 0; j < params[i].size; ++j) {
      double& value = params[i].value[j];
      const double original = value;
      value = original + fd_step;
      const double up = loss();
      value = original - fd_step;
      const double down = loss();
      value = original;
      const double numeric = (up - down) / (2.0 * fd_step);
      const double a = analytic[i][static_cast<Eigen::Index>(j)];
      const double scale = std::max({std::abs(a), std::abs(numeric), 1e-4});
      worst = std::max(worst, std::abs(a - numeric) / scale);
    }
  }
  return worst;
}

}  // namespace padbench::nn
