#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "faqforge/rng.hpp"

// Minimal dense recurrent building blocks with hand-written backward passes.
namespace faqforge::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Param {
  std::string name;
  MatrixXd value;
  MatrixXd grad;
  MatrixXd m;  // Adam first moment
  MatrixXd v;  // Adam second moment

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols);

  void zero_grad() { grad.setZero(); }
  // Uniform in [-scale, scale].
  void init_uniform(Rng &rng, double scale);
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // global gradient norm; <= 0 disables clipping
};

class Adam {
public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}
  void step(std::span<Param *const> params);
  std::uint64_t steps() const { return t_; }

private:
  AdamOptions options_;
  std::uint64_t t_ = 0;
};

VectorXd softmax(const VectorXd &logits);
VectorXd sigmoid(const VectorXd &x);

// Inverted dropout mask: entries are 0 or 1/(1-rate).
VectorXd dropout_mask(Eigen::Index size, double rate, Rng &rng);

struct LstmCache {
  VectorXd z;  // [x; h_prev]
  VectorXd i, f, g, o;
  VectorXd c_prev, c, tanh_c, h;
};

// Gates stacked as (input, forget, cell, output) in a single 4H x (I+H)
// matrix; tanh is the cell activation.
class Lstm {
public:
  Lstm() = default;
  Lstm(const std::string &name, std::size_t input, std::size_t hidden);

  void init(Rng &rng);
  std::size_t input_size() const { return input_; }
  std::size_t hidden_size() const { return hidden_; }

  void forward(const VectorXd &x, const VectorXd &h_prev, const VectorXd &c_prev,
               LstmCache &cache) const;
  // Accumulates weight gradients; writes input and previous-state gradients.
  void backward(const LstmCache &cache, const VectorXd &dh, const VectorXd &dc,
                VectorXd &dx, VectorXd &dh_prev, VectorXd &dc_prev);

  Param weight;
  Param bias;

private:
  std::size_t input_ = 0;
  std::size_t hidden_ = 0;
};

struct GruCache {
  VectorXd x, h_prev;
  VectorXd z, r, rh, cand, h;
};

// h = (1 - z) * h_prev + z * tanh(Wc [x; r * h_prev] + bc)
class Gru {
public:
  Gru() = default;
  Gru(const std::string &name, std::size_t input, std::size_t hidden);

  void init(Rng &rng);
  std::size_t input_size() const { return input_; }
  std::size_t hidden_size() const { return hidden_; }

  void forward(const VectorXd &x, const VectorXd &h_prev, GruCache &cache) const;
  void backward(const GruCache &cache, const VectorXd &dh, VectorXd &dx,
                VectorXd &dh_prev);

  Param gates_weight;  // 2H x (I+H): update then reset
  Param gates_bias;
  Param cand_weight;   // H x (I+H)
  Param cand_bias;

private:
  std::size_t input_ = 0;
  std::size_t hidden_ = 0;
};

} // namespace faqforge::nn
