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

#include "bptts/autodiff.h"

#include <algorithm>
#include <atomic>
#include <limits>
#include <string>

namespace bptts::ad {
namespace {

std::atomic<int> g_fault_kind{-1};

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

}  // namespace

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kDiv: return "div";
    case OpKind::kNeg: return "neg";
    case OpKind::kAbs: return "abs";
    case OpKind::kRelu: return "relu";
    case OpKind::kExp: return "exp";
    case OpKind::kSquare: return "square";
    case OpKind::kSqrt: return "sqrt";
    case OpKind::kMin: return "min";
    case OpKind::kMax: return "max";
    case OpKind::kScale: return "scale";
    case OpKind::kSum: return "sum";
    case OpKind::kBlockOutput: return "block";
  }
  return "unknown";
}

void set_adjoint_fault(std::optional<OpKind> kind) {
  g_fault_kind.store(kind ? static_cast<int>(*kind) : -1);
}

std::optional<OpKind> adjoint_fault() {
  const int k = g_fault_kind.load();
  if (k < 0) return std::nullopt;
  return static_cast<OpKind>(k);
}

double GradientMap::operator[](Var v) const {
  const auto it = std::lower_bound(leaves.begin(), leaves.end(), v.index());
  if (it == leaves.end() || *it != v.index()) {
    throw ConfigError("node " + std::to_string(v.index()) +
                      " is not a trainable leaf");
  }
  return values[static_cast<std::size_t>(it - leaves.begin())];
}

Var Tape::push(OpKind kind, double value, std::uint32_t a, std::uint32_t b,
               double aux) {
  if (nodes_.size() >= kNone) throw DomainError("tape exhausted index space");
  nodes_.push_back(Node{value, aux, a, b, kind});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::check(Var v) const {
  if (v.tape() != this || v.index() >= nodes_.size()) {
    throw ConfigError("operand is not a node of this tape");
  }
}

Var Tape::leaf(double value, bool trainable) {
  if (!std::isfinite(value)) throw DomainError("non-finite leaf value");
  Var v = push(OpKind::kLeaf, value, kNone, kNone);
  if (trainable) trainable_.push_back(v.index());
  return v;
}

Var Tape::add(Var a, Var b) {
  check(a), check(b);
  return push(OpKind::kAdd, a.value() + b.value(), a.index(), b.index());
}

Var Tape::sub(Var a, Var b) {
  check(a), check(b);
  return push(OpKind::kSub, a.value() - b.value(), a.index(), b.index());
}

Var Tape::mul(Var a, Var b) {
  check(a), check(b);
  return push(OpKind::kMul, a.value() * b.value(), a.index(), b.index());
}

Var Tape::div(Var a, Var b) {
  check(a), check(b);
  if (b.value() == 0.0) throw DomainError("division by zero");
  return push(OpKind::kDiv, a.value() / b.value(), a.index(), b.index());
}

Var Tape::neg(Var a) {
  check(a);
  return push(OpKind::kNeg, -a.value(), a.index(), kNone);
}

Var Tape::abs(Var a) {
  check(a);
  return push(OpKind::kAbs, ad::abs(a.value()), a.index(), kNone);
}

Var Tape::relu(Var a) {
  check(a);
  return push(OpKind::kRelu, ad::relu(a.value()), a.index(), kNone);
}

Var Tape::exp(Var a) {
  check(a);
  return push(OpKind::kExp, std::exp(a.value()), a.index(), kNone);
}

Var Tape::square(Var a) {
  check(a);
  return push(OpKind::kSquare, a.value() * a.value(), a.index(), kNone);
}

Var Tape::sqrt(Var a) {
  check(a);
  return push(OpKind::kSqrt, ad::sqrt(a.value()), a.index(), kNone);
}

Var Tape::min(Var a, Var b) {
  check(a), check(b);
  return push(OpKind::kMin, ad::min(a.value(), b.value()), a.index(),
              b.index());
}

Var Tape::max(Var a, Var b) {
  check(a), check(b);
  return push(OpKind::kMax, ad::max(a.value(), b.value()), a.index(),
              b.index());
}

Var Tape::scale(Var a, double c) {
  check(a);
  if (!std::isfinite(c)) throw DomainError("non-finite scale factor");
  return push(OpKind::kScale, c * a.value(), a.index(), kNone, c);
}

Var Tape::sum(std::span<const Var> terms) {
  if (terms.empty()) throw ConfigError("sum of zero terms");
  const auto offset = static_cast<std::uint32_t>(operand_pool_.size());
  double s = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    check(terms[i]);
    s = i == 0 ? terms[i].value() : s + terms[i].value();
    operand_pool_.push_back(terms[i].index());
  }
  return push(OpKind::kSum, s, offset,
              static_cast<std::uint32_t>(terms.size()));
}

Var Tape::apply(OpKind kind, std::span<const Var> operands, double scale) {
  auto need = [&](std::size_t n) {
    if (operands.size() != n) {
      throw ConfigError(std::string(to_string(kind)) + " expects " +
                        std::to_string(n) + " operand(s)");
    }
  };
  switch (kind) {
    case OpKind::kAdd: need(2); return add(operands[0], operands[1]);
    case OpKind::kSub: need(2); return sub(operands[0], operands[1]);
    case OpKind::kMul: need(2); return mul(operands[0], operands[1]);
    case OpKind::kDiv: need(2); return div(operands[0], operands[1]);
    case OpKind::kMin: need(2); return min(operands[0], operands[1]);
    case OpKind::kMax: need(2); return max(operands[0], operands[1]);
    case OpKind::kNeg: need(1); return neg(operands[0]);
    case OpKind::kAbs: need(1); return abs(operands[0]);
    case OpKind::kRelu: need(1); return relu(operands[0]);
    case OpKind::kExp: need(1); return exp(operands[0]);
    case OpKind::kSquare: need(1); return square(operands[0]);
    case OpKind::kSqrt: need(1); return sqrt(operands[0]);
    case OpKind::kScale: need(1); return this->scale(operands[0], scale);
    case OpKind::kSum: return sum(operands);
    case OpKind::kLeaf:
    case OpKind::kBlockOutput:
      break;
  }
  throw ConfigError("apply() does not construct " +
                    std::string(to_string(kind)) + " nodes");
}

std::vector<Var> Tape::apply_block(std::unique_ptr<BlockOp> op,
                                   std::span<const Var> inputs,
                                   std::span<const Var> params,
                                   std::span<const double> outputs) {
  if (outputs.empty()) throw ConfigError("block without outputs");
  Block block;
  block.input_offset = static_cast<std::uint32_t>(operand_pool_.size());
  block.input_count = static_cast<std::uint32_t>(inputs.size());
  for (Var v : inputs) {
    check(v);
    operand_pool_.push_back(v.index());
  }
  block.param_first = params.empty() ? 0 : params.front().index();
  block.param_count = static_cast<std::uint32_t>(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    check(params[i]);
    if (params[i].index() != block.param_first + i ||
        nodes_[params[i].index()].kind != OpKind::kLeaf) {
      throw ConfigError("block parameters must be contiguous leaves");
    }
  }
  const auto id = static_cast<std::uint32_t>(blocks_.size());
  block.output_first = static_cast<std::uint32_t>(nodes_.size());
  block.output_count = static_cast<std::uint32_t>(outputs.size());
  block.op = std::move(op);
  blocks_.push_back(std::move(block));

  std::vector<Var> out;
  out.reserve(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    out.push_back(push(OpKind::kBlockOutput, outputs[i], id,
                       static_cast<std::uint32_t>(i)));
  }
  return out;
}

GradientMap Tape::backward(Var root, BackwardStats* stats) const {
  check(root);
  const std::optional<OpKind> fault = adjoint_fault();
  std::vector<double> adj(root.index() + 1, 0.0);
  adj[root.index()] = 1.0;
  std::vector<double> block_in;

  std::size_t visited = 0;
  for (std::uint32_t i = root.index() + 1; i-- > 0;) {
    ++visited;
    const Node& n = nodes_[i];
    if (n.kind == OpKind::kBlockOutput) {
      // Slot 0 has the smallest index: every output adjoint is final here.
      if (n.b != 0) continue;
      const Block& blk = blocks_[n.a];
      const std::size_t last = std::min<std::size_t>(
          blk.output_first + blk.output_count, adj.size());
      std::span<const double> out_adj(adj.data() + blk.output_first,
                                      last - blk.output_first);
      if (std::all_of(out_adj.begin(), out_adj.end(),
                      [](double g) { return g == 0.0; })) {
        continue;
      }
      std::vector<double> padded;
      if (out_adj.size() < blk.output_count) {
        padded.assign(out_adj.begin(), out_adj.end());
        padded.resize(blk.output_count, 0.0);
        out_adj = padded;
      }
      block_in.assign(blk.input_count, 0.0);
      std::span<double> param_adj(adj.data() + blk.param_first,
                                  blk.param_count);
      const bool flip = fault == OpKind::kBlockOutput;
      std::vector<double> before;
      if (flip) before.assign(param_adj.begin(), param_adj.end());
      blk.op->backward(out_adj, block_in, param_adj);
      if (flip) {
        for (std::size_t k = 0; k < param_adj.size(); ++k) {
          param_adj[k] = before[k] - (param_adj[k] - before[k]);
        }
      }
      const double sign = flip ? -1.0 : 1.0;
      for (std::uint32_t k = 0; k < blk.input_count; ++k) {
        adj[operand_pool_[blk.input_offset + k]] += sign * block_in[k];
      }
      continue;
    }
    double g = adj[i];
    if (g == 0.0 || n.kind == OpKind::kLeaf) continue;
    if (fault == n.kind) g = -g;
    switch (n.kind) {
      case OpKind::kAdd:
        adj[n.a] += g;
        adj[n.b] += g;
        break;
      case OpKind::kSub:
        adj[n.a] += g;
        adj[n.b] -= g;
        break;
      case OpKind::kMul:
        adj[n.a] += g * nodes_[n.b].value;
        adj[n.b] += g * nodes_[n.a].value;
        break;
      case OpKind::kDiv: {
        const double d = nodes_[n.b].value;
        adj[n.a] += g / d;
        adj[n.b] -= g * n.value / d;
        break;
      }
      case OpKind::kNeg:
        adj[n.a] -= g;
        break;
      case OpKind::kAbs: {
        const double x = nodes_[n.a].value;
        if (x > 0.0) {
          adj[n.a] += g;
        } else if (x < 0.0) {
          adj[n.a] -= g;
        }
        break;
      }
      case OpKind::kRelu:
        if (nodes_[n.a].value > 0.0) adj[n.a] += g;
        break;
      case OpKind::kExp:
        adj[n.a] += g * n.value;
        break;
      case OpKind::kSquare:
        adj[n.a] += 2.0 * g * nodes_[n.a].value;
        break;
      case OpKind::kSqrt:
        if (n.value == 0.0) throw DomainError("sqrt derivative at zero");
        adj[n.a] += 0.5 * g / n.value;
        break;
      case OpKind::kMin:
        if (nodes_[n.a].value <= nodes_[n.b].value) {
          adj[n.a] += g;
        } else {
          adj[n.b] += g;
        }
        break;
      case OpKind::kMax:
        if (nodes_[n.a].value >= nodes_[n.b].value) {
          adj[n.a] += g;
        } else {
          adj[n.b] += g;
        }
        break;
      case OpKind::kScale:
        adj[n.a] += g * n.aux;
        break;
      case OpKind::kSum:
        for (std::uint32_t k = 0; k < n.b; ++k) {
          adj[operand_pool_[n.a + k]] += g;
        }
        break;
      case OpKind::kLeaf:
      case OpKind::kBlockOutput:
        break;
    }
  }
  if (stats != nullptr) stats->visited = visited;

  GradientMap grads;
  grads.leaves = trainable_;
  grads.values.resize(trainable_.size(), 0.0);
  for (std::size_t k = 0; k < trainable_.size(); ++k) {
    if (trainable_[k] < adj.size()) grads.values[k] = adj[trainable_[k]];
  }
  return grads;
}

std::vector<std::uint32_t> Tape::operands(std::uint32_t index) const {
  const Node& n = nodes_.at(index);
  switch (n.kind) {
    case OpKind::kLeaf:
    case OpKind::kBlockOutput:
      return {};
    case OpKind::kSum:
      return {operand_pool_.begin() + n.a, operand_pool_.begin() + n.a + n.b};
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul:
    case OpKind::kDiv:
    case OpKind::kMin:
    case OpKind::kMax:
      return {n.a, n.b};
    default:
      return {n.a};
  }
}

bool Tape::all_finite() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [](const Node& n) { return std::isfinite(n.value); });
}

}  // namespace bptts::ad
