#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "padbench/rng.hpp"

// Minimal double-precision layer zoo with hand-derived backward passes.
// Everything processes one sample at a time; training loops accumulate
// gradients across a batch and step with Adam.
namespace padbench::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  Vector data;  // channel-major, rows within channel

  static Tensor zeros(int c, int h, int w) {
    Tensor t;
    t.channels = c;
    t.height = h;
    t.width = w;
    t.data = Vector::Zero(static_cast<Eigen::Index>(c) * h * w);
    return t;
  }
  Eigen::Index size() const { return data.size(); }
  double& at(int c, int y, int x) {
    return data[(static_cast<Eigen::Index>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<Eigen::Index>(c) * height + y) * width + x];
  }
};

struct ParamView {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  std::size_t size = 0;
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, Rng& rng);

  Tensor forward(const Tensor& x);
  Tensor apply(const Tensor& x) const;      // pure, no caching
  Tensor backward(const Tensor& grad_out);  // accumulates parameter grads
  void collect_params(const std::string& prefix, std::vector<ParamView>& out);

  int out_size(int in) const { return (in + 2 * pad_ - kernel_) / stride_ + 1; }
  int in_channels() const { return in_channels_; }
  int out_channels() const { return out_channels_; }

 private:
  int in_channels_ = 0, out_channels_ = 0, kernel_ = 0, stride_ = 1, pad_ = 0;
  Matrix weight_;  // out_channels x (in_channels*kernel*kernel)
  Vector bias_;
  Matrix grad_weight_;
  Vector grad_bias_;
  Matrix cols_;  // im2col cache from the last forward
  int last_h_ = 0, last_w_ = 0;

  void im2col(const Tensor& x, Matrix& cols) const;
};

class Relu {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out) const;
  Vector forward(const Vector& x);
  Vector backward_vec(const Vector& grad_out) const;

  static Tensor apply(const Tensor& x);
  static Vector apply(const Vector& x);

 private:
  Vector mask_;
};

class Sigmoid {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out) const;
  static Tensor apply(const Tensor& x);

 private:
  Vector value_;
};

class Linear {
 public:
  Linear() = default;
  Linear(int in_dim, int out_dim, Rng& rng);

  Vector forward(const Vector& x);
  Vector apply(const Vector& x) const { return weight_ * x + bias_; }
  Vector backward(const Vector& grad_out);
  void collect_params(const std::string& prefix, std::vector<ParamView>& out);

  int in_dim() const { return static_cast<int>(weight_.cols()); }
  int out_dim() const { return static_cast<int>(weight_.rows()); }
  Matrix& weight() { return weight_; }
  Vector& bias() { return bias_; }

 private:
  Matrix weight_;
  Vector bias_;
  Matrix grad_weight_;
  Vector grad_bias_;
  Vector input_;
};

// y = relu(x + conv2(relu(conv1(x)))), 3x3 convs, stride 1, same padding
class ResBlock {
 public:
  ResBlock() = default;
  ResBlock(int channels, Rng& rng);

  Tensor forward(const Tensor& x);
  Tensor apply(const Tensor& x) const;
  Tensor backward(const Tensor& grad_out);
  void collect_params(const std::string& prefix, std::vector<ParamView>& out);

 private:
  Conv2d conv1_, conv2_;
  Relu relu1_, relu_out_;
};

class Upsample2x {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out) const;
  static Tensor apply(const Tensor& x);

 private:
  int in_h_ = 0, in_w_ = 0, channels_ = 0;
};

class GlobalAvgPool {
 public:
  Vector forward(const Tensor& x);
  Tensor backward(const Vector& grad_out) const;
  static Vector apply(const Tensor& x);

 private:
  int h_ = 0, w_ = 0, channels_ = 0;
};

Vector softmax(const Vector& logits);
// returns loss; fills grad w.r.t. logits
double softmax_cross_entropy(const Vector& logits, int target, Vector& grad_logits);

// 0.5 * sum_i (mu_i^2 + exp(log_var_i) - log_var_i - 1); >= 0 for all inputs
double kl_to_standard_normal(const Vector& mu, const Vector& log_var);

// mean over pixels of squared error
double mean_squared_error(const Tensor& x, const Tensor& x_hat);

class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<ParamView>& params);
  void zero_grad(std::vector<ParamView>& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Vector> m_, v_;
};

// Two-layer perceptron with softmax output, widths in_dim -> hidden -> classes.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int in_dim, int hidden_dim, int out_dim, Rng& rng);

  Vector forward(const Vector& x);  // returns logits
  void backward(const Vector& grad_logits);
  Vector probabilities(const Vector& x) const;  // pure softmax(apply)
  std::vector<ParamView> params();
  int in_dim() const { return fc1_.in_dim(); }
  int hidden_dim() const { return fc1_.out_dim(); }
  int out_dim() const { return fc2_.out_dim(); }

 private:
  Linear fc1_, fc2_;
  Relu relu_;
};

// sha256 over the raw little-endian bytes of all parameters, in order
std::string parameter_checksum(std::vector<ParamView> params);

// max relative finite-difference error over every parameter scalar;
// loss() must be a pure forward evaluation of the same objective that has
// already filled the analytic gradients.
double max_gradient_error(const std::function<double()>& loss,
                          std::vector<ParamView> params, double fd_step = 1e-5);

}  // namespace padbench::nn
