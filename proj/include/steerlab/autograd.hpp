#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "steerlab/tensor.hpp"

namespace steerlab {

// Handle into a Tape's node list.
struct Var {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape covering exactly the ops the transformer needs. Values
// are computed eagerly; backward() walks the nodes in reverse and
// accumulates into Parameter::grad for parameter leaves.
class Tape {
 public:
  Var param(Parameter& p);
  Var input(Tensor value);

  // out[i, :] = table[ids[i], :]
  Var gather_rows(Var table, std::vector<int32_t> ids);
  Var add(Var a, Var b);
  // x[m,k] * w[k,n] + b[n]
  Var linear(Var x, Var w, Var b);
  Var layer_norm(Var x, Var gain, Var bias, float eps = 1e-5f);
  Var gelu(Var x);
  // Multi-head causal self-attention over packed qkv [batch*seqlen, 3*d].
  // Columns [0,d) are queries, [d,2d) keys, [2d,3d) values; sequences are
  // independent blocks of `seqlen` rows.
  Var attention_core(Var qkv, int64_t batch, int64_t seqlen, int heads);

  // Declares the loss root. Returns the loss value (64-bit reduction).
  double cross_entropy_loss(Var logits, std::vector<int32_t> targets,
                            std::vector<uint8_t> mask);

  // Propagates from the loss root declared above.
  void backward();

  const Tensor& value(Var v) const;
  // Gradient of the loss w.r.t. a node (available after backward()).
  const Tensor& grad(Var v) const;

  size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    Parameter* param = nullptr;
    std::function<void(Tape&, Node&)> backward;
    // saved context, op-specific
    std::vector<int32_t> ids;
    std::vector<uint8_t> mask;
    Tensor saved;      // e.g. attention probabilities
    Var a, b, c;
    int64_t batch = 0, seqlen = 0;
    int heads = 0;
    float eps = 0.0f;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  Var push(Node n);
  void accumulate(Var v, const Tensor& g);

  std::vector<Node> nodes_;
  Var loss_logits_;
  std::vector<int32_t> loss_targets_;
  std::vector<uint8_t> loss_mask_;
  bool has_loss_ = false;
};

}  // namespace steerlab
