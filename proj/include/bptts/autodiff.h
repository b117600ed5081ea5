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

// Reverse-mode automatic differentiation over 64-bit scalars.
//
// A Tape records every arithmetic operation of one unrolled episode as an
// append-only list of nodes. Operand indices are always smaller than the
// node's own index, so a single descending sweep computes all adjoints.
//
// Besides scalar operations the tape supports block operations: a
// multi-input, multi-output node group whose adjoint is provided by a
// BlockOp. The policy network is recorded this way so that one batched
// forward pass per timestep becomes a handful of nodes instead of tens of
// thousands of scalar multiply-adds.
//
// The free functions in namespace ad (abs, relu, exp, ...) are overloaded
// for double and Var with identical IEEE arithmetic, so templated
// simulation code produces bit-identical forward values on either path.

#ifndef BPTTS_AUTODIFF_H_
#define BPTTS_AUTODIFF_H_

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bptts/error.h"

namespace bptts::ad {

enum class OpKind : std::uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kAbs,
  kRelu,
  kExp,
  kSquare,
  kSqrt,
  kMin,
  kMax,
  kScale,
  kSum,
  kBlockOutput,
};

inline constexpr int kNumOpKinds = 16;

std::string_view to_string(OpKind kind);

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  double value() const;
  std::uint32_t index() const { return index_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
};

// Adjoint rule of a block operation. `output_adjoint` holds one entry per
// block output; implementations add into `input_adjoint` (one entry per
// block input) and `param_adjoint` (one entry per parameter leaf).
class BlockOp {
 public:
  virtual ~BlockOp() = default;
  virtual std::string_view name() const = 0;
  virtual void backward(std::span<const double> output_adjoint,
                        std::span<double> input_adjoint,
                        std::span<double> param_adjoint) const = 0;
};

// Accumulated partial derivatives, one entry per trainable leaf in
// registration order.
struct GradientMap {
  std::vector<std::uint32_t> leaves;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  // Gradient of the trainable leaf `v`; throws if `v` is not trainable.
  double operator[](Var v) const;
};

struct BackwardStats {
  std::size_t visited = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void reserve(std::size_t nodes) { nodes_.reserve(nodes); }

  // Throws DomainError for non-finite values.
  Var leaf(double value, bool trainable = false);
  Var constant(double value) { return leaf(value, false); }

  // Generic entry point. Unary kinds take one operand, binary kinds two,
  // kSum any number >= 1, kScale takes one operand plus `scale`.
  Var apply(OpKind kind, std::span<const Var> operands, double scale = 1.0);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var abs(Var a);
  Var relu(Var a);
  Var exp(Var a);
  Var square(Var a);
  Var sqrt(Var a);
  Var min(Var a, Var b);
  Var max(Var a, Var b);
  Var scale(Var a, double c);
  Var sum(std::span<const Var> terms);

  // Records a block operation. `params` must be contiguous trainable
  // leaves. `outputs` are the forward values the block computed; they
  // become consecutive kBlockOutput nodes.
  std::vector<Var> apply_block(std::unique_ptr<BlockOp> op,
                               std::span<const Var> inputs,
                               std::span<const Var> params,
                               std::span<const double> outputs);

  // Single reverse sweep from `root` down to node 0.
  GradientMap backward(Var root, BackwardStats* stats = nullptr) const;

  std::size_t size() const { return nodes_.size(); }
  double value(std::uint32_t index) const { return nodes_[index].value; }
  OpKind kind(std::uint32_t index) const { return nodes_[index].kind; }
  // Operand indices of a scalar node (empty for leaves and block outputs).
  std::vector<std::uint32_t> operands(std::uint32_t index) const;
  std::span<const std::uint32_t> trainable_leaves() const { return trainable_; }
  bool all_finite() const;

 private:
  struct Node {
    double value;
    double aux;  // scale factor for kScale
    std::uint32_t a;
    std::uint32_t b;  // kSum: (a, b) = (offset, count) into operand_pool_
    OpKind kind;
  };
  struct Block {
    std::unique_ptr<BlockOp> op;
    std::uint32_t input_offset;
    std::uint32_t input_count;
    std::uint32_t param_first;
    std::uint32_t param_count;
    std::uint32_t output_first;
    std::uint32_t output_count;
  };

  Var push(OpKind kind, double value, std::uint32_t a, std::uint32_t b,
           double aux = 0.0);
  void check(Var v) const;

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> operand_pool_;
  std::vector<std::uint32_t> trainable_;
  std::vector<Block> blocks_;
};

inline double Var::value() const { return tape_->value(index_); }

// Diagnostics hook: while set, backward() negates the local adjoint rule of
// the given kind. Used to demonstrate that gradient checks detect a broken
// rule. Process-wide; not for use during training.
void set_adjoint_fault(std::optional<OpKind> kind);
std::optional<OpKind> adjoint_fault();

// ----- operators ------------------------------------------------------------

inline Var operator+(Var a, Var b) { return a.tape()->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape()->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape()->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape()->div(a, b); }
inline Var operator-(Var a) { return a.tape()->neg(a); }

inline Var operator+(Var a, double c) { return a + a.tape()->constant(c); }
inline Var operator+(double c, Var a) { return a.tape()->constant(c) + a; }
inline Var operator-(Var a, double c) { return a - a.tape()->constant(c); }
inline Var operator-(double c, Var a) { return a.tape()->constant(c) - a; }
inline Var operator*(Var a, double c) { return a.tape()->scale(a, c); }
inline Var operator*(double c, Var a) { return a.tape()->scale(a, c); }
inline Var operator/(Var a, double c) { return a / a.tape()->constant(c); }
inline Var operator/(double c, Var a) { return a.tape()->constant(c) / a; }

// ----- scalar functions shared by double and Var ----------------------------

inline double value_of(double x) { return x; }
inline double value_of(Var x) { return x.value(); }

inline double abs(double x) { return x > 0.0 ? x : (x < 0.0 ? -x : 0.0); }
inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double exp(double x) { return std::exp(x); }
inline double square(double x) { return x * x; }
inline double sqrt(double x) {
  if (x < 0.0) throw DomainError("sqrt of negative value");
  return std::sqrt(x);
}
// Ties resolve to the first operand.
inline double max(double a, double b) { return a >= b ? a : b; }
inline double min(double a, double b) { return a <= b ? a : b; }
inline double sum(std::span<const double> terms) {
  double s = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) s = s + terms[i];
  return s;
}

inline Var abs(Var x) { return x.tape()->abs(x); }
inline Var relu(Var x) { return x.tape()->relu(x); }
inline Var exp(Var x) { return x.tape()->exp(x); }
inline Var square(Var x) { return x.tape()->square(x); }
inline Var sqrt(Var x) { return x.tape()->sqrt(x); }
inline Var max(Var a, Var b) { return a.tape()->max(a, b); }
inline Var min(Var a, Var b) { return a.tape()->min(a, b); }
inline Var sum(std::span<const Var> terms) {
  return terms[0].tape()->sum(terms);
}

// Constant with the same scalar type as `like` (a detached leaf for Var).
inline double constant_like(double, double c) { return c; }
inline Var constant_like(Var like, double c) { return like.tape()->constant(c); }

}  // namespace bptts::ad

#endif  // BPTTS_AUTODIFF_H_
