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

#include "bptts/policy.h"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "bptts/error.h"

namespace bptts {
namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMat>;
using MatMap = Eigen::Map<RowMat>;
using ConstRowVecMap = Eigen::Map<const Eigen::RowVectorXd>;
using RowVecMap = Eigen::Map<Eigen::RowVectorXd>;

constexpr int kIn = PolicyParams::kInputs;
constexpr int kHid = PolicyParams::kHidden;
constexpr int kOut = PolicyParams::kOutputs;

struct MlpCache {
  RowMat x;      // M x 10
  RowMat h1;     // M x 128, post-ReLU
  RowMat h2;     // M x 128, post-ReLU
  RowMat omega;  // M x 6, softmax per triple
};

template <class Obs>
void fill_inputs(std::span<const Obs> obs, RowMat& x) {
  x.resize(static_cast<Eigen::Index>(obs.size()), kIn);
  for (std::size_t r = 0; r < obs.size(); ++r) {
    for (int k = 0; k < 5; ++k) {
      x(r, k) = ad::value_of(obs[r].plus[k]);
      x(r, 5 + k) = ad::value_of(obs[r].minus[k]);
    }
  }
}

void mlp_forward(const PolicyParams& p, MlpCache& c) {
  const double* v = p.values.data();
  ConstMatMap w1(v + PolicyParams::kW1, kHid, kIn);
  ConstRowVecMap b1(v + PolicyParams::kB1, kHid);
  ConstMatMap w2(v + PolicyParams::kW2, kHid, kHid);
  ConstRowVecMap b2(v + PolicyParams::kB2, kHid);
  ConstMatMap w3(v + PolicyParams::kW3, kOut, kHid);
  ConstRowVecMap b3(v + PolicyParams::kB3, kOut);

  c.h1.noalias() = c.x * w1.transpose();
  c.h1.rowwise() += b1;
  c.h1 = c.h1.cwiseMax(0.0);
  c.h2.noalias() = c.h1 * w2.transpose();
  c.h2.rowwise() += b2;
  c.h2 = c.h2.cwiseMax(0.0);
  c.omega.noalias() = c.h2 * w3.transpose();
  c.omega.rowwise() += b3;

  for (Eigen::Index r = 0; r < c.omega.rows(); ++r) {
    for (int t = 0; t < 2; ++t) {
      double* l = &c.omega(r, 3 * t);
      const double m = ad::max(ad::max(l[0], l[1]), l[2]);
      const double e0 = std::exp(l[0] - m);
      const double e1 = std::exp(l[1] - m);
      const double e2 = std::exp(l[2] - m);
      const double s = e0 + e1 + e2;
      l[0] = e0 / s;
      l[1] = e1 / s;
      l[2] = e2 / s;
    }
  }
  if (!c.omega.allFinite()) {
    throw ParameterError("non-finite policy activations");
  }
}

SubstencilWeights<double> row_weights(const RowMat& omega, Eigen::Index r) {
  return {{omega(r, 0), omega(r, 1), omega(r, 2)},
          {omega(r, 3), omega(r, 4), omega(r, 5)}};
}

class MlpBlock final : public ad::BlockOp {
 public:
  MlpBlock(const PolicyParams* params, MlpCache cache)
      : params_(params), cache_(std::move(cache)) {}

  std::string_view name() const override { return "policy_mlp"; }

  void backward(std::span<const double> out_adj, std::span<double> in_adj,
                std::span<double> param_adj) const override {
    const Eigen::Index m = cache_.x.rows();
    const double* v = params_->values.data();
    ConstMatMap w1(v + PolicyParams::kW1, kHid, kIn);
    ConstMatMap w2(v + PolicyParams::kW2, kHid, kHid);
    ConstMatMap w3(v + PolicyParams::kW3, kOut, kHid);
    double* g = param_adj.data();
    MatMap gw1(g + PolicyParams::kW1, kHid, kIn);
    RowVecMap gb1(g + PolicyParams::kB1, kHid);
    MatMap gw2(g + PolicyParams::kW2, kHid, kHid);
    RowVecMap gb2(g + PolicyParams::kB2, kHid);
    MatMap gw3(g + PolicyParams::kW3, kOut, kHid);
    RowVecMap gb3(g + PolicyParams::kB3, kOut);

    // Softmax Jacobian per triple: dl_k = w_k (g_k - sum_m w_m g_m).
    RowMat dl(m, kOut);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (int t = 0; t < 3 * 2; t += 3) {
        const double* w = &cache_.omega(r, t);
        const double* go = &out_adj[r * kOut + t];
        const double dot = w[0] * go[0] + w[1] * go[1] + w[2] * go[2];
        for (int k = 0; k < 3; ++k) dl(r, t + k) = w[k] * (go[k] - dot);
      }
    }
    gw3.noalias() += dl.transpose() * cache_.h2;
    gb3 += dl.colwise().sum();

    RowMat dz2 = dl * w3;
    dz2 = (cache_.h2.array() > 0.0).select(dz2, 0.0);
    gw2.noalias() += dz2.transpose() * cache_.h1;
    gb2 += dz2.colwise().sum();

    RowMat dz1 = dz2 * w2;
    dz1 = (cache_.h1.array() > 0.0).select(dz1, 0.0);
    gw1.noalias() += dz1.transpose() * cache_.x;
    gb1 += dz1.colwise().sum();

    MatMap dx(in_adj.data(), m, kIn);
    dx.noalias() += dz1 * w1;
  }

 private:
  const PolicyParams* params_;
  MlpCache cache_;
};

double glorot_bound(int fan_in, int fan_out) {
  return std::sqrt(6.0 / (fan_in + fan_out));
}

void fill_uniform(std::mt19937_64& rng, double bound, double* out,
                  std::size_t n) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::size_t i = 0; i < n; ++i) out[i] = dist(rng);
}

constexpr char kMagic[8] = {'B', 'P', 'T', 'T', 'S', 'P', 'O', 'L'};
constexpr std::uint32_t kWidths[4] = {kIn, kHid, kHid, kOut};
constexpr std::size_t kHeaderBytes = 8 + 4 * (2 + 4);

template <class T>
void put_le(std::string& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
  }
}

template <class T>
T get_le(std::string_view in, std::size_t offset) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(static_cast<unsigned char>(in[offset + i]))
            << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

}  // namespace

bool PolicyParams::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return values.size() == kCount;
}

PolicyParams init_params(std::uint64_t seed, HeadInit head) {
  PolicyParams p;
  std::mt19937_64 rng(seed);
  fill_uniform(rng, glorot_bound(kIn, kHid), &p.values[PolicyParams::kW1],
               kHid * kIn);
  fill_uniform(rng, glorot_bound(kHid, kHid), &p.values[PolicyParams::kW2],
               kHid * kHid);
  if (head == HeadInit::kRandom) {
    fill_uniform(rng, glorot_bound(kHid, kOut), &p.values[PolicyParams::kW3],
                 kOut * kHid);
  }
  return p;
}

PolicyParams random_params(std::uint64_t seed, double bias_scale) {
  PolicyParams p = init_params(seed, HeadInit::kRandom);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  fill_uniform(rng, bias_scale, &p.values[PolicyParams::kB1], kHid);
  fill_uniform(rng, bias_scale, &p.values[PolicyParams::kB2], kHid);
  fill_uniform(rng, bias_scale, &p.values[PolicyParams::kB3], kOut);
  return p;
}

std::vector<SubstencilWeights<double>> policy_forward(
    std::span<const StencilObservation<double>> obs,
    const PolicyParams& params) {
  MlpCache c;
  fill_inputs(obs, c.x);
  if (!c.x.allFinite()) throw ParameterError("non-finite policy input");
  mlp_forward(params, c);
  std::vector<SubstencilWeights<double>> out;
  out.reserve(obs.size());
  for (Eigen::Index r = 0; r < c.omega.rows(); ++r) {
    out.push_back(row_weights(c.omega, r));
  }
  return out;
}

SubstencilWeights<double> policy_forward(const StencilObservation<double>& obs,
                                         const PolicyParams& params) {
  return policy_forward(std::span<const StencilObservation<double>>(&obs, 1),
                        params)[0];
}

TapedPolicy::TapedPolicy(ad::Tape& tape, const PolicyParams& params)
    : tape_(&tape), params_(&params) {
  leaves_.reserve(PolicyParams::kCount);
  for (double v : params.values) leaves_.push_back(tape.leaf(v, true));
}

std::vector<SubstencilWeights<ad::Var>> TapedPolicy::forward(
    std::span<const StencilObservation<ad::Var>> obs) {
  MlpCache c;
  fill_inputs(obs, c.x);
  if (!c.x.allFinite()) throw ParameterError("non-finite policy input");
  mlp_forward(*params_, c);

  std::vector<ad::Var> inputs;
  inputs.reserve(obs.size() * kIn);
  for (const auto& o : obs) {
    inputs.insert(inputs.end(), o.plus.begin(), o.plus.end());
    inputs.insert(inputs.end(), o.minus.begin(), o.minus.end());
  }
  std::vector<double> values(c.omega.data(), c.omega.data() + c.omega.size());
  const auto outs = tape_->apply_block(
      std::make_unique<MlpBlock>(params_, std::move(c)), inputs, leaves_,
      values);

  std::vector<SubstencilWeights<ad::Var>> w(obs.size());
  for (std::size_t r = 0; r < obs.size(); ++r) {
    for (int k = 0; k < 3; ++k) {
      w[r].plus[k] = outs[r * kOut + k];
      w[r].minus[k] = outs[r * kOut + 3 + k];
    }
  }
  return w;
}

std::string encode_params(const PolicyParams& params) {
  if (params.values.size() != PolicyParams::kCount) {
    throw FormatError("parameter vector has wrong length");
  }
  std::string out(kMagic, sizeof(kMagic));
  put_le(out, kCheckpointVersion);
  put_le(out, std::uint32_t{3});
  for (std::uint32_t w : kWidths) put_le(out, w);
  for (double v : params.values) put_le(out, v);
  return out;
}

PolicyParams decode_params(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a policy checkpoint");
  }
  if (get_le<std::uint32_t>(bytes, 8) != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version");
  }
  if (get_le<std::uint32_t>(bytes, 12) != 3) {
    throw FormatError("checkpoint layer count mismatch");
  }
  for (int i = 0; i < 4; ++i) {
    if (get_le<std::uint32_t>(bytes, 16 + 4 * i) != kWidths[i]) {
      throw FormatError("checkpoint layer dimensions mismatch");
    }
  }
  if (bytes.size() != kHeaderBytes + 8 * PolicyParams::kCount) {
    throw FormatError("checkpoint has wrong length");
  }
  PolicyParams p;
  for (std::size_t i = 0; i < PolicyParams::kCount; ++i) {
    p.values[i] = get_le<double>(bytes, kHeaderBytes + 8 * i);
  }
  if (!p.all_finite()) throw FormatError("checkpoint holds non-finite values");
  return p;
}

void save_params(const std::filesystem::path& path,
                 const PolicyParams& params) {
  const std::string bytes = encode_params(params);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("failed writing " + path.string());
}

PolicyParams load_params(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_params(ss.str());
}

}  // namespace bptts
