// SPDX-License-Identifier: Apache-2.0
//
// mgsat - distributed precoding for multi-gateway multibeam satellites
// Copyright (C) 2026 The mgsat authors
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
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "mgsat/types.hpp"

namespace mgsat {

/// SplitMix64 finalizer. Stable across platforms and compilers.
std::uint64_t mix64(std::uint64_t x);

/// Order-sensitive combination of integers into one 64-bit seed.
std::uint64_t stable_hash(std::initializer_list<std::uint64_t> parts);

/// Seeded generator whose real-valued draws are bit-identical on every
/// platform: the engine output is mapped to doubles by hand instead of
/// going through the implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard circularly-symmetric complex Gaussian, E|z|^2 = 1.
  cd complex_normal();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// n x m matrix of i.i.d. CN(0,1) entries.
CMat random_complex_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols);

}  // namespace mgsat
