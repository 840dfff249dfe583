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

#include "cellfree/learned.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cellfree/heuristic.hpp"

namespace cellfree {
namespace {

Vector to_db(const Vector& x) {
  return x.unaryExpr([](double v) { return linear_to_db(v); });
}

}  // namespace

std::vector<int> cluster_partition(int num_aps, int cluster_size, const std::vector<Point>& ap_positions) {
  if (cluster_size < 1 || num_aps < 1 || num_aps % cluster_size != 0) {
    throw std::invalid_argument("cluster size " + std::to_string(cluster_size) + " does not divide " +
                                std::to_string(num_aps) + " APs");
  }
  if (static_cast<int>(ap_positions.size()) != num_aps) throw std::invalid_argument("cluster_partition: need L positions");
  std::vector<int> order(num_aps);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const Point& pa = ap_positions[a];
    const Point& pb = ap_positions[b];
    return pa.y != pb.y ? pa.y < pb.y : pa.x < pb.x;
  });
  std::vector<int> cluster(num_aps);
  for (int pos = 0; pos < num_aps; ++pos) cluster[order[pos]] = pos / cluster_size;
  return cluster;
}

std::vector<std::vector<int>> cluster_members(const std::vector<int>& partition) {
  const int n_clusters = partition.empty() ? 0 : *std::max_element(partition.begin(), partition.end()) + 1;
  std::vector<std::vector<int>> members(n_clusters);
  for (int l = 0; l < static_cast<int>(partition.size()); ++l) members[partition[l]].push_back(l);
  return members;
}

Vector model_features(ModelKind kind, const Matrix& beta, double v, double p_max, const std::vector<int>& aps) {
  const auto K = beta.rows();
  if (aps.empty()) throw std::invalid_argument("model_features: no APs");
  switch (kind) {
    case ModelKind::kDDNN:
      return to_db(fractional_heuristic(beta.col(aps.front()), v, p_max));
    case ModelKind::kDDNNSI: {
      Vector f(2 * K);
      f.head(K) = to_db(fractional_heuristic(beta.col(aps.front()), v, p_max));
      f.tail(K) = to_db(side_info_ratios(beta, v, p_max).col(aps.front()));
      return f;
    }
    case ModelKind::kCDNN: {
      Vector f(K * static_cast<Eigen::Index>(aps.size()));
      for (std::size_t j = 0; j < aps.size(); ++j) {
        f.segment(static_cast<Eigen::Index>(j) * K, K) = to_db(beta.col(aps[j]));
      }
      return f;
    }
  }
  return {};
}

Vector model_label(const Matrix& mu_star, const std::vector<int>& aps) {
  const auto K = mu_star.rows();
  Vector y((K + 1) * static_cast<Eigen::Index>(aps.size()));
  for (std::size_t j = 0; j < aps.size(); ++j) {
    const auto base = static_cast<Eigen::Index>(j) * (K + 1);
    y.segment(base, K) = mu_star.col(aps[j]);
    y[base + K] = mu_star.col(aps[j]).squaredNorm();
  }
  return y;
}

void LearnedAllocator::validate(int num_ues, int num_aps) const {
  if (models.size() != groups.size()) throw std::invalid_argument("learned allocator: model/group count mismatch");
  std::vector<int> seen(num_aps, 0);
  for (std::size_t j = 0; j < models.size(); ++j) {
    const auto& m = models[j];
    if (m.kind != kind || m.num_ues != num_ues) throw std::invalid_argument("learned allocator: model kind or K mismatch");
    if (m.output_size() != static_cast<Eigen::Index>(groups[j].size()) * (num_ues + 1)) {
      throw std::invalid_argument("learned allocator: output width does not match its AP group");
    }
    for (const int l : groups[j]) {
      if (l < 0 || l >= num_aps) throw std::invalid_argument("learned allocator: AP index out of range");
      ++seen[l];
    }
  }
  for (int l = 0; l < num_aps; ++l) {
    if (seen[l] != 1) throw std::invalid_argument("learned allocator: missing model for AP " + std::to_string(l));
  }
}

std::size_t postprocess_output(const Vector& output, const std::vector<int>& aps, int num_ues, double p_max,
                               Matrix& mu) {
  std::size_t degenerate = 0;
  for (std::size_t j = 0; j < aps.size(); ++j) {
    const auto base = static_cast<Eigen::Index>(j) * (num_ues + 1);
    const Vector direction = output.segment(base, num_ues).cwiseMax(0.0);
    const double total = std::clamp(output[base + num_ues], 0.0, p_max);
    const double norm = direction.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      mu.col(aps[j]).setZero();
      ++degenerate;
      continue;
    }
    mu.col(aps[j]) = direction * (std::sqrt(total) / norm);
  }
  return degenerate;
}

std::vector<Vector> prepare_features(const LearnedAllocator& allocator, const Matrix& beta, double v, double p_max) {
  allocator.validate(static_cast<int>(beta.rows()), static_cast<int>(beta.cols()));
  std::vector<Vector> out;
  out.reserve(allocator.models.size());
  for (std::size_t j = 0; j < allocator.models.size(); ++j) {
    out.push_back(robust_scale_apply(allocator.models[j].scaler,
                                     model_features(allocator.kind, beta, v, p_max, allocator.groups[j])));
  }
  return out;
}

LearnedPrediction predict_from_features(const LearnedAllocator& allocator, const std::vector<Vector>& features,
                                        int num_ues, int num_aps, double p_max) {
  if (features.size() != allocator.models.size()) throw std::invalid_argument("predict: one input per model expected");
  LearnedPrediction out{{Matrix::Zero(num_ues, num_aps)}, 0};
  for (std::size_t j = 0; j < allocator.models.size(); ++j) {
    out.degenerate_aps +=
        postprocess_output(forward(allocator.models[j], features[j]), allocator.groups[j], num_ues, p_max, out.alloc.mu);
  }
  return out;
}

LearnedPrediction predict_allocation(const LearnedAllocator& allocator, const Matrix& beta, double v,
                                     double p_max) {
  return predict_from_features(allocator, prepare_features(allocator, beta, v, p_max), static_cast<int>(beta.rows()),
                               static_cast<int>(beta.cols()), p_max);
}

}  // namespace cellfree
