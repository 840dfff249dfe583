// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The cellfree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cellfree/mlp.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cellfree/binary_io.hpp"

namespace cellfree {
namespace {

constexpr std::uint32_t kModelFormatVersion = 1;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-7;

void activate(Activation act, Matrix& z) {
  switch (act) {
    case Activation::kLinear:
      break;
    case Activation::kTanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::kElu:
      z = z.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
      break;
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      break;
  }
}

// Derivative in terms of the pre-activation z and the activation value a.
Matrix activation_slope(Activation act, const Matrix& z, const Matrix& a) {
  switch (act) {
    case Activation::kLinear:
      return Matrix::Ones(z.rows(), z.cols());
    case Activation::kTanh:
      return (1.0 - a.array().square()).matrix();
    case Activation::kElu:
      return z.binaryExpr(a, [](double zv, double av) { return zv > 0.0 ? 1.0 : av + 1.0; });
    case Activation::kRelu:
      return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
  }
  return {};
}

struct Tape {
  std::vector<Matrix> pre;   // z per layer
  std::vector<Matrix> post;  // a per layer, post[0] is the input
};

Tape forward_tape(const std::vector<DenseLayer>& layers, const Matrix& x) {
  Tape t;
  t.post.push_back(x);
  for (const auto& layer : layers) {
    Matrix z = layer.weight * t.post.back();
    z.colwise() += layer.bias;
    Matrix a = z;
    activate(layer.activation, a);
    t.pre.push_back(std::move(z));
    t.post.push_back(std::move(a));
  }
  return t;
}

double mean_loss(const std::vector<DenseLayer>& layers, const Matrix& x, const Matrix& y) {
  if (x.cols() == 0) return std::numeric_limits<double>::quiet_NaN();
  return (forward_batch(layers, x) - y).squaredNorm() / static_cast<double>(x.cols());
}

Matrix gather_columns(const Matrix& rows_as_samples, const std::vector<std::size_t>& idx, std::size_t begin,
                      std::size_t end) {
  Matrix out(rows_as_samples.cols(), static_cast<Eigen::Index>(end - begin));
  for (std::size_t j = begin; j < end; ++j) {
    out.col(static_cast<Eigen::Index>(j - begin)) = rows_as_samples.row(static_cast<Eigen::Index>(idx[j])).transpose();
  }
  return out;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kDDNN:
      return "ddnn";
    case ModelKind::kDDNNSI:
      return "ddnn-si";
    case ModelKind::kCDNN:
      return "cdnn";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "ddnn") return ModelKind::kDDNN;
  if (name == "ddnn-si") return ModelKind::kDDNNSI;
  if (name == "cdnn") return ModelKind::kCDNN;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

std::vector<DenseLayer> make_layers(const std::vector<int>& sizes, const std::vector<Activation>& activations,
                                    std::uint64_t seed) {
  if (sizes.size() < 2 || activations.size() != sizes.size() - 1) {
    throw std::invalid_argument("make_layers: need one activation per dense layer");
  }
  std::mt19937_64 rng(derive_seed(seed, 0x1A7E25));
  std::vector<DenseLayer> layers;
  for (std::size_t t = 0; t + 1 < sizes.size(); ++t) {
    if (sizes[t] < 1 || sizes[t + 1] < 1) throw std::invalid_argument("make_layers: layer widths must be >= 1");
    const double limit = std::sqrt(3.0 / sizes[t]);
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Matrix(sizes[t + 1], sizes[t]), Vector::Zero(sizes[t + 1]), activations[t]};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

MlpModel build_model(ModelKind kind, int num_ues, int cluster_size, std::uint64_t seed, int id) {
  if (num_ues < 1) throw std::invalid_argument("build_model: K must be >= 1");
  const int K = num_ues;
  using A = Activation;
  std::vector<int> sizes;
  std::vector<Activation> acts;
  switch (kind) {
    case ModelKind::kDDNN:
      cluster_size = 1;
      sizes = {K, 32, 64, 32, K + 1};
      acts = {A::kLinear, A::kTanh, A::kTanh, A::kRelu};
      break;
    case ModelKind::kDDNNSI:
      cluster_size = 1;
      sizes = {2 * K, 64, 128, 64, 32, K + 1};
      acts = {A::kLinear, A::kElu, A::kTanh, A::kTanh, A::kRelu};
      break;
    case ModelKind::kCDNN:
      if (cluster_size < 1) throw std::invalid_argument("build_model: cluster size must be >= 1");
      sizes = {cluster_size * K, 128, 512, 256, 128, cluster_size * (K + 1)};
      acts = {A::kLinear, A::kElu, A::kTanh, A::kTanh, A::kRelu};
      break;
  }
  MlpModel m;
  m.kind = kind;
  m.id = id;
  m.num_ues = K;
  m.cluster_size = cluster_size;
  m.layers = make_layers(sizes, acts, derive_seed(seed, static_cast<std::uint64_t>(id)));
  m.scaler = {Vector::Zero(sizes.front()), Vector::Ones(sizes.front())};

  std::size_t expected = 0;
  for (std::size_t t = 0; t + 1 < sizes.size(); ++t) {
    expected += static_cast<std::size_t>(sizes[t] + 1) * sizes[t + 1];
  }
  if (m.parameter_count() != expected) throw std::logic_error("build_model: parameter count mismatch");
  return m;
}

Matrix forward_batch(const std::vector<DenseLayer>& layers, const Matrix& x) {
  Matrix a = x;
  for (const auto& layer : layers) {
    if (a.rows() != layer.weight.cols()) throw std::invalid_argument("forward: input width mismatch");
    Matrix z = layer.weight * a;
    z.colwise() += layer.bias;
    activate(layer.activation, z);
    a = std::move(z);
  }
  return a;
}

Vector forward(const MlpModel& model, const Vector& x) { return forward_batch(model.layers, x); }

void TrainConfig::validate() const {
  if (!(lr_initial > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(lr_drop_factor > 0.0 && lr_drop_factor < 1.0)) throw std::invalid_argument("lr drop factor must be in (0, 1)");
  if (batch_size < 1 || epochs < 0) throw std::invalid_argument("batch size must be >= 1 and epochs >= 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must be in [0, 1)");
  }
}

DataSplit split_indices(std::size_t n, const TrainConfig& cfg) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(cfg.seed, 0x5B117));
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(n)));
  if (n > 0 && n_val >= n) n_val = n - 1;
  DataSplit split;
  split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  return split;
}

LossGradient loss_and_gradient(const std::vector<DenseLayer>& layers, const Matrix& x, const Matrix& y) {
  const Tape tape = forward_tape(layers, x);
  const double n = static_cast<double>(x.cols());
  const Matrix diff = tape.post.back() - y;
  LossGradient g;
  g.loss = diff.squaredNorm() / n;
  g.d_weight.resize(layers.size());
  g.d_bias.resize(layers.size());

  Matrix upstream = (2.0 / n) * diff;
  for (std::size_t t = layers.size(); t-- > 0;) {
    const Matrix dz = upstream.cwiseProduct(activation_slope(layers[t].activation, tape.pre[t], tape.post[t + 1]));
    g.d_weight[t].noalias() = dz * tape.post[t].transpose();
    g.d_bias[t] = dz.rowwise().sum();
    if (t > 0) upstream.noalias() = layers[t].weight.transpose() * dz;
  }
  return g;
}

TrainReport train(std::vector<DenseLayer>& layers, const Matrix& features, const Matrix& labels,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (features.rows() == 0) throw std::invalid_argument("train: empty dataset");
  if (features.rows() != labels.rows()) throw std::invalid_argument("train: feature/label count mismatch");
  if (features.cols() != layers.front().weight.cols() || labels.cols() != layers.back().weight.rows()) {
    throw std::invalid_argument("train: data width does not match the model");
  }

  TrainReport report;
  DataSplit split = split_indices(static_cast<std::size_t>(features.rows()), cfg);
  report.train_indices = std::move(split.train);
  report.validation_indices = std::move(split.validation);
  const std::size_t n_val = report.validation_indices.size();
  std::mt19937_64 rng(derive_seed(cfg.seed, 0x7EA1));

  const Matrix val_x = gather_columns(features, report.validation_indices, 0, n_val);
  const Matrix val_y = gather_columns(labels, report.validation_indices, 0, n_val);

  std::vector<Matrix> m_w;
  std::vector<Matrix> v_w;
  std::vector<Vector> m_b;
  std::vector<Vector> v_b;
  for (const auto& layer : layers) {
    m_w.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
    v_w.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
    m_b.push_back(Vector::Zero(layer.bias.size()));
    v_b.push_back(Vector::Zero(layer.bias.size()));
  }

  std::vector<std::size_t> train_order = report.train_indices;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  long long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = epoch < cfg.drop_epoch ? cfg.lr_initial : cfg.lr_initial * cfg.lr_drop_factor;
    std::shuffle(train_order.begin(), train_order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < train_order.size(); begin += batch) {
      const std::size_t end = std::min(begin + batch, train_order.size());
      const Matrix bx = gather_columns(features, train_order, begin, end);
      const Matrix by = gather_columns(labels, train_order, begin, end);
      const LossGradient g = loss_and_gradient(layers, bx, by);
      if (!std::isfinite(g.loss)) {
        throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) + " (non-finite loss)");
      }
      epoch_loss += g.loss * static_cast<double>(end - begin);

      ++step;
      const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
      const double step_size = lr * std::sqrt(c2) / c1;
      for (std::size_t t = 0; t < layers.size(); ++t) {
        m_w[t] = kAdamBeta1 * m_w[t] + (1.0 - kAdamBeta1) * g.d_weight[t];
        v_w[t] = kAdamBeta2 * v_w[t] + (1.0 - kAdamBeta2) * g.d_weight[t].cwiseAbs2();
        layers[t].weight.array() -= step_size * m_w[t].array() / (v_w[t].array().sqrt() + kAdamEpsilon);
        m_b[t] = kAdamBeta1 * m_b[t] + (1.0 - kAdamBeta1) * g.d_bias[t];
        v_b[t] = kAdamBeta2 * v_b[t] + (1.0 - kAdamBeta2) * g.d_bias[t].cwiseAbs2();
        layers[t].bias.array() -= step_size * m_b[t].array() / (v_b[t].array().sqrt() + kAdamEpsilon);
      }
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(train_order.size()));
    report.validation_loss.push_back(mean_loss(layers, val_x, val_y));
  }
  return report;
}

void write_model(std::ostream& out, const MlpModel& model) {
  io::Writer w(out);
  w.magic("CFNN");
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.kind));
  w.u32(static_cast<std::uint32_t>(model.id));
  w.u32(static_cast<std::uint32_t>(model.num_ues));
  w.u32(static_cast<std::uint32_t>(model.cluster_size));
  w.u32(static_cast<std::uint32_t>(model.layers.size()));
  for (const auto& layer : model.layers) {
    w.u32(static_cast<std::uint32_t>(layer.weight.cols()));
    w.u32(static_cast<std::uint32_t>(layer.weight.rows()));
    w.u32(static_cast<std::uint32_t>(layer.activation));
  }
  w.u32(static_cast<std::uint32_t>(model.scaler.num_features()));
  w.matrix(model.scaler.median.transpose());
  w.matrix(model.scaler.iqr.transpose());
  for (const auto& layer : model.layers) {
    w.matrix(layer.weight);
    w.matrix(layer.bias.transpose());
  }
}

MlpModel read_model(std::istream& in) {
  constexpr std::uint32_t kMaxWidth = 1u << 16;
  io::Reader r(in);
  r.expect_magic("CFNN");
  if (const auto v = r.u32(); v != kModelFormatVersion) {
    throw DataError("unsupported model format version " + std::to_string(v));
  }
  MlpModel m;
  const auto kind = r.u32();
  if (kind > static_cast<std::uint32_t>(ModelKind::kCDNN)) throw DataError("model file: unknown kind");
  m.kind = static_cast<ModelKind>(kind);
  m.id = static_cast<int>(r.u32());
  m.num_ues = static_cast<int>(r.u32());
  m.cluster_size = static_cast<int>(r.u32());
  const auto n_layers = r.u32();
  if (n_layers == 0 || n_layers > 64) throw DataError("model file: bad layer count");
  std::vector<std::array<std::uint32_t, 3>> shapes(n_layers);
  for (auto& s : shapes) {
    s = {r.u32(), r.u32(), r.u32()};
    if (s[0] == 0 || s[1] == 0 || s[0] > kMaxWidth || s[1] > kMaxWidth) throw DataError("model file: bad layer width");
    if (s[2] > static_cast<std::uint32_t>(Activation::kRelu)) throw DataError("model file: unknown activation");
  }
  for (std::size_t t = 1; t < shapes.size(); ++t) {
    if (shapes[t][0] != shapes[t - 1][1]) throw DataError("model file: layer widths do not chain");
  }
  const auto width = r.u32();
  if (width != shapes.front()[0]) throw DataError("model file: scaler width does not match input layer");
  m.scaler.median = r.matrix(1, width).transpose();
  m.scaler.iqr = r.matrix(1, width).transpose();
  for (const auto& s : shapes) {
    DenseLayer layer;
    layer.weight = r.matrix(s[1], s[0]);
    layer.bias = r.matrix(1, s[1]).transpose();
    layer.activation = static_cast<Activation>(s[2]);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

}  // namespace cellfree
