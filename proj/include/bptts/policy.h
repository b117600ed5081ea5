// Copyright 2026 The BPTTS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The shared local policy: a 10 -> 128 -> 128 -> 6 ReLU network whose six
// outputs feed two 3-way softmaxes, giving convex sub-stencil weights for
// the plus and minus flux stencils. Every agent (interface, timestep and
// Euler component) evaluates the same parameters.

#ifndef BPTTS_POLICY_H_
#define BPTTS_POLICY_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bptts/autodiff.h"
#include "bptts/weno.h"

namespace bptts {

struct PolicyParams {
  static constexpr int kInputs = 10;
  static constexpr int kHidden = 128;
  static constexpr int kOutputs = 6;

  // Flat layout, layer by layer: weights (out x in, row-major) then biases.
  static constexpr std::size_t kW1 = 0;
  static constexpr std::size_t kB1 = kW1 + kHidden * kInputs;
  static constexpr std::size_t kW2 = kB1 + kHidden;
  static constexpr std::size_t kB2 = kW2 + kHidden * kHidden;
  static constexpr std::size_t kW3 = kB2 + kHidden;
  static constexpr std::size_t kB3 = kW3 + kOutputs * kHidden;
  static constexpr std::size_t kCount = kB3 + kOutputs;
  static_assert(kCount == 18694);

  std::vector<double> values = std::vector<double>(kCount, 0.0);

  bool all_finite() const;
  bool operator==(const PolicyParams&) const = default;
};

enum class HeadInit {
  kZero,    // output layer zero: every action starts at (1/3, 1/3, 1/3)
  kRandom,  // output layer drawn like the hidden layers
};

// Hidden weights ~ U(+-sqrt(6 / (fan_in + fan_out))), biases zero.
PolicyParams init_params(std::uint64_t seed, HeadInit head = HeadInit::kZero);

// Every entry random, biases included; used for gradient checks.
PolicyParams random_params(std::uint64_t seed, double bias_scale = 0.1);

// Batched forward pass on plain doubles. Inputs are (plus, minus)
// concatenated; throws ParameterError on non-finite activations.
std::vector<SubstencilWeights<double>> policy_forward(
    std::span<const StencilObservation<double>> obs,
    const PolicyParams& params);

SubstencilWeights<double> policy_forward(const StencilObservation<double>& obs,
                                         const PolicyParams& params);

// Policy parameters registered as trainable leaves of a tape. forward()
// records one block node group per call; the parameters must outlive the
// tape.
class TapedPolicy {
 public:
  TapedPolicy(ad::Tape& tape, const PolicyParams& params);

  std::vector<SubstencilWeights<ad::Var>> forward(
      std::span<const StencilObservation<ad::Var>> obs);

  std::span<const ad::Var> leaves() const { return leaves_; }

 private:
  ad::Tape* tape_;
  const PolicyParams* params_;
  std::vector<ad::Var> leaves_;
};

// Checkpoint format: "BPTTSPOL", u32 version, u32 layer count, u32 layer
// widths (10, 128, 128, 6), then little-endian doubles in flat layout.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_params(const PolicyParams& params);
PolicyParams decode_params(std::string_view bytes);
void save_params(const std::filesystem::path& path, const PolicyParams& params);
PolicyParams load_params(const std::filesystem::path& path);

}  // namespace bptts

#endif  // BPTTS_POLICY_H_
