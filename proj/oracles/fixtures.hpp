// Copyright 2026 The ngd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small seed-pinned networks and batches shared by the test suites.

#ifndef NGD_TESTS_FIXTURES_HPP
#define NGD_TESTS_FIXTURES_HPP

#include "ngd/network.hpp"
#include "ngd/rng.hpp"

#include <cstdint>

namespace ngd::testing {

inline Vector random_vector(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

inline Matrix random_matrix(Index r, Index c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

inline nn::Activation output_for(nn::Loss::Kind k) {
  switch (k) {
    case nn::Loss::Kind::Squared: return nn::Activation::Identity;
    case nn::Loss::Kind::BinaryCE: return nn::Activation::Sigmoid;
    case nn::Loss::Kind::MultiClassCE: return nn::Activation::Softmax;
  }
  return nn::Activation::Identity;
}

/// 2-3-2 network with a sigmoid hidden layer, output matched to the loss.
/// Weights are drawn with unit scale so curvature terms are not tiny.
inline nn::Network net_232(nn::Loss::Kind kind, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<nn::Layer> layers;
  const Index sizes[3] = {2, 3, 2};
  const nn::Activation acts[2] = {nn::Activation::Sigmoid, output_for(kind)};
  for (int l = 0; l < 2; ++l) {
    nn::Layer layer{Matrix(sizes[l + 1], sizes[l]), Vector(sizes[l + 1]), acts[l]};
    for (Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = rng.normal();
    for (Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = 0.5 * rng.normal();
    layers.push_back(std::move(layer));
  }
  return nn::Network(std::move(layers));
}

/// Batch of n samples with labels valid for the loss kind.
inline nn::Batch batch_for(nn::Loss::Kind kind, Index in, Index out, Index n, std::uint64_t seed) {
  Rng rng(seed);
  nn::Batch b{Matrix(n, in), Matrix::Zero(n, out)};
  for (Index s = 0; s < n; ++s) {
    for (Index j = 0; j < in; ++j) b.inputs(s, j) = rng.uniform(-1.0, 1.0);
    switch (kind) {
      case nn::Loss::Kind::Squared:
        for (Index j = 0; j < out; ++j) b.targets(s, j) = rng.normal();
        break;
      case nn::Loss::Kind::BinaryCE:
        for (Index j = 0; j < out; ++j) b.targets(s, j) = rng.uniform() < 0.5 ? 0.0 : 1.0;
        break;
      case nn::Loss::Kind::MultiClassCE:
        b.targets(s, static_cast<Index>(rng.uniform() * static_cast<double>(out))) = 1.0;
        break;
    }
  }
  return b;
}

inline nn::Loss loss_of(nn::Loss::Kind kind) {
  nn::Loss l;
  l.kind = kind;
  l.sigma2 = kind == nn::Loss::Kind::Squared ? 0.7 : 1.0;
  return l;
}

}  // namespace ngd::testing

#endif  // NGD_TESTS_FIXTURES_HPP
