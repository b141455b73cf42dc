#include "faqforge/nn.hpp"

#include <cmath>

namespace faqforge::nn {

Param::Param(std::string n, Eigen::Index rows, Eigen::Index cols)
    : name(std::move(n)), value(MatrixXd::Zero(rows, cols)),
      grad(MatrixXd::Zero(rows, cols)), m(MatrixXd::Zero(rows, cols)),
      v(MatrixXd::Zero(rows, cols)) {}

void Param::init_uniform(Rng &rng, double scale) {
  for (Eigen::Index j = 0; j < value.cols(); ++j)
    for (Eigen::Index i = 0; i < value.rows(); ++i)
      value(i, j) = rng.uniform(-scale, scale);
}

void Adam::step(std::span<Param *const> params) {
  ++t_;
  double scale = 1.0;
  if (options_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const Param *p : params) sq += p->grad.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > options_.clip_norm) scale = options_.clip_norm / norm;
  }
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = options_.learning_rate * std::sqrt(c2) / c1;
  for (Param *p : params) {
    const MatrixXd g = p->grad * scale;
    p->m = b1 * p->m + (1.0 - b1) * g;
    p->v = b2 * p->v + (1.0 - b2) * g.cwiseProduct(g);
    p->value.array() -= lr * p->m.array() / (p->v.array().sqrt() + options_.epsilon);
  }
}

VectorXd softmax(const VectorXd &logits) {
  if (logits.size() == 0) return logits;
  const VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

VectorXd sigmoid(const VectorXd &x) {
  return x.unaryExpr([](double a) { return 1.0 / (1.0 + std::exp(-a)); });
}

VectorXd dropout_mask(Eigen::Index size, double rate, Rng &rng) {
  VectorXd mask(size);
  const double keep = 1.0 - rate;
  for (Eigen::Index i = 0; i < size; ++i)
    mask[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
  return mask;
}

Lstm::Lstm(const std::string &name, std::size_t input, std::size_t hidden)
    : weight(name + ".weight", static_cast<Eigen::Index>(4 * hidden),
             static_cast<Eigen::Index>(input + hidden)),
      bias(name + ".bias", static_cast<Eigen::Index>(4 * hidden), 1),
      input_(input), hidden_(hidden) {}

void Lstm::init(Rng &rng) {
  weight.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(input_ + hidden_)));
  bias.value.setZero();
  bias.value.block(static_cast<Eigen::Index>(hidden_), 0,
                   static_cast<Eigen::Index>(hidden_), 1)
      .setOnes();
}

void Lstm::forward(const VectorXd &x, const VectorXd &h_prev, const VectorXd &c_prev,
                   LstmCache &cache) const {
  const auto H = static_cast<Eigen::Index>(hidden_);
  cache.z.resize(x.size() + H);
  cache.z << x, h_prev;
  const VectorXd a = weight.value * cache.z + bias.value.col(0);
  cache.i = sigmoid(a.segment(0, H));
  cache.f = sigmoid(a.segment(H, H));
  cache.g = a.segment(2 * H, H).array().tanh();
  cache.o = sigmoid(a.segment(3 * H, H));
  cache.c_prev = c_prev;
  cache.c = cache.f.cwiseProduct(c_prev) + cache.i.cwiseProduct(cache.g);
  cache.tanh_c = cache.c.array().tanh();
  cache.h = cache.o.cwiseProduct(cache.tanh_c);
}

void Lstm::backward(const LstmCache &cache, const VectorXd &dh, const VectorXd &dc,
                    VectorXd &dx, VectorXd &dh_prev, VectorXd &dc_prev) {
  const auto H = static_cast<Eigen::Index>(hidden_);
  const auto I = static_cast<Eigen::Index>(input_);
  const VectorXd d_o = dh.cwiseProduct(cache.tanh_c);
  const VectorXd dc_total =
      dc + dh.cwiseProduct(cache.o).cwiseProduct(
               (1.0 - cache.tanh_c.array().square()).matrix());
  VectorXd da(4 * H);
  da.segment(0, H) = dc_total.cwiseProduct(cache.g).cwiseProduct(
      cache.i.cwiseProduct((1.0 - cache.i.array()).matrix()));
  da.segment(H, H) = dc_total.cwiseProduct(cache.c_prev).cwiseProduct(
      cache.f.cwiseProduct((1.0 - cache.f.array()).matrix()));
  da.segment(2 * H, H) = dc_total.cwiseProduct(cache.i).cwiseProduct(
      (1.0 - cache.g.array().square()).matrix());
  da.segment(3 * H, H) =
      d_o.cwiseProduct(cache.o.cwiseProduct((1.0 - cache.o.array()).matrix()));
  weight.grad.noalias() += da * cache.z.transpose();
  bias.grad.col(0) += da;
  const VectorXd dz = weight.value.transpose() * da;
  dx = dz.head(I);
  dh_prev = dz.tail(H);
  dc_prev = dc_total.cwiseProduct(cache.f);
}

Gru::Gru(const std::string &name, std::size_t input, std::size_t hidden)
    : gates_weight(name + ".gates_weight", static_cast<Eigen::Index>(2 * hidden),
                   static_cast<Eigen::Index>(input + hidden)),
      gates_bias(name + ".gates_bias", static_cast<Eigen::Index>(2 * hidden), 1),
      cand_weight(name + ".cand_weight", static_cast<Eigen::Index>(hidden),
                  static_cast<Eigen::Index>(input + hidden)),
      cand_bias(name + ".cand_bias", static_cast<Eigen::Index>(hidden), 1),
      input_(input), hidden_(hidden) {}

void Gru::init(Rng &rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(input_ + hidden_));
  gates_weight.init_uniform(rng, s);
  cand_weight.init_uniform(rng, s);
  gates_bias.value.setZero();
  cand_bias.value.setZero();
}

void Gru::forward(const VectorXd &x, const VectorXd &h_prev, GruCache &cache) const {
  const auto H = static_cast<Eigen::Index>(hidden_);
  cache.x = x;
  cache.h_prev = h_prev;
  VectorXd xh(x.size() + H);
  xh << x, h_prev;
  const VectorXd gates = sigmoid(gates_weight.value * xh + gates_bias.value.col(0));
  cache.z = gates.head(H);
  cache.r = gates.tail(H);
  cache.rh = cache.r.cwiseProduct(h_prev);
  VectorXd xrh(x.size() + H);
  xrh << x, cache.rh;
  cache.cand = (cand_weight.value * xrh + cand_bias.value.col(0)).array().tanh();
  cache.h = h_prev + cache.z.cwiseProduct(cache.cand - h_prev);
}

void Gru::backward(const GruCache &cache, const VectorXd &dh, VectorXd &dx,
                   VectorXd &dh_prev) {
  const auto H = static_cast<Eigen::Index>(hidden_);
  const auto I = static_cast<Eigen::Index>(input_);
  const VectorXd dcand = dh.cwiseProduct(cache.z);
  const VectorXd dz = dh.cwiseProduct(cache.cand - cache.h_prev);
  dh_prev = dh.cwiseProduct((1.0 - cache.z.array()).matrix());

  const VectorXd dcand_pre =
      dcand.cwiseProduct((1.0 - cache.cand.array().square()).matrix());
  VectorXd xrh(I + H);
  xrh << cache.x, cache.rh;
  cand_weight.grad.noalias() += dcand_pre * xrh.transpose();
  cand_bias.grad.col(0) += dcand_pre;
  const VectorXd dxrh = cand_weight.value.transpose() * dcand_pre;
  dx = dxrh.head(I);
  const VectorXd drh = dxrh.tail(H);
  const VectorXd dr = drh.cwiseProduct(cache.h_prev);
  dh_prev += drh.cwiseProduct(cache.r);

  VectorXd dgates(2 * H);
  dgates.head(H) = dz.cwiseProduct(cache.z.cwiseProduct((1.0 - cache.z.array()).matrix()));
  dgates.tail(H) = dr.cwiseProduct(cache.r.cwiseProduct((1.0 - cache.r.array()).matrix()));
  VectorXd xh(I + H);
  xh << cache.x, cache.h_prev;
  gates_weight.grad.noalias() += dgates * xh.transpose();
  gates_bias.grad.col(0) += dgates;
  const VectorXd dxh = gates_weight.value.transpose() * dgates;
  dx += dxh.head(I);
  dh_prev += dxh.tail(H);
}

} // namespace faqforge::nn
