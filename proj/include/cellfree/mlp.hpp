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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cellfree/common.hpp"
#include "cellfree/scaler.hpp"

namespace cellfree {

enum class Activation : std::uint32_t { kLinear = 0, kTanh = 1, kElu = 2, kRelu = 3 };

enum class ModelKind : std::uint32_t { kDDNN = 0, kDDNNSI = 1, kCDNN = 2 };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;
  Activation activation = Activation::kLinear;
};

struct MlpModel {
  ModelKind kind = ModelKind::kDDNN;
  int id = 0;            // AP index for distributed kinds, cluster index for CDNN
  int num_ues = 0;
  int cluster_size = 1;
  std::vector<DenseLayer> layers;
  ScalerParams scaler;

  Eigen::Index input_size() const { return layers.front().weight.cols(); }
  Eigen::Index output_size() const { return layers.back().weight.rows(); }
  std::size_t parameter_count() const;
};

/// Plain stack of dense layers; `sizes` includes the input width. LeCun-uniform weights
/// (limit sqrt(3 / fan_in)), zero biases.
std::vector<DenseLayer> make_layers(const std::vector<int>& sizes, const std::vector<Activation>& activations,
                                    std::uint64_t seed);

/// DDNN:    K -> 32 -> 64 -> 32 -> K+1            (linear, tanh, tanh, relu)
/// DDNN-SI: 2K -> 64 -> 128 -> 64 -> 32 -> K+1    (linear, elu, tanh, tanh, relu)
/// CDNN:    cK -> 128 -> 512 -> 256 -> 128 -> c(K+1) (linear, elu, tanh, tanh, relu)
MlpModel build_model(ModelKind kind, int num_ues, int cluster_size, std::uint64_t seed, int id = 0);

Vector forward(const MlpModel& model, const Vector& x);

/// Column-per-sample batch forward pass.
Matrix forward_batch(const std::vector<DenseLayer>& layers, const Matrix& x);

struct TrainConfig {
  double lr_initial = 1e-3;
  double lr_drop_factor = 0.1;
  int drop_epoch = 40;
  int batch_size = 256;
  int epochs = 60;
  std::uint64_t seed = 7;
  double validation_fraction = 0.1;

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;       // per epoch, mean squared-norm error on the training split
  std::vector<double> validation_loss;  // per epoch; empty split gives NaN entries
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> validation_indices;
};

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Seeded shuffle; the first floor(fraction * n) indices (at most n - 1) go to validation.
DataSplit split_indices(std::size_t n, const TrainConfig& cfg);

/// Mean over columns of ||y - f(x)||^2 and its gradient per layer.
struct LossGradient {
  double loss = 0.0;
  std::vector<Matrix> d_weight;
  std::vector<Vector> d_bias;
};
LossGradient loss_and_gradient(const std::vector<DenseLayer>& layers, const Matrix& x, const Matrix& y);

/// Adam on the squared-norm loss. `features` and `labels` are n_samples x width and already scaled.
/// Throws std::runtime_error if the loss becomes non-finite.
TrainReport train(std::vector<DenseLayer>& layers, const Matrix& features, const Matrix& labels,
                  const TrainConfig& cfg);

/// Self-describing container: magic "CFNN", u32 version, u32 kind, u32 id, u32 K, u32 c,
/// u32 layer count, per layer (u32 in, u32 out, u32 activation), u32 scaler width, medians, IQRs,
/// then every layer's weights (row-major) and biases. Little-endian f64 throughout.
void write_model(std::ostream& out, const MlpModel& model);
MlpModel read_model(std::istream& in);

}  // namespace cellfree
