#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "nn.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace sandhi {

// Reverse-mode autodiff over a flat tape of vector/matrix ops.
//
// Leaves either own a constant value or reference one of the caller's
// parameter tensors by index; backward() accumulates parameter gradients into
// per-tape dense buffers that survive reset(), so one tape can accumulate a
// whole shard of examples before the buffers are read.
class Tape {
 public:
  explicit Tape(std::span<const Tensor> params);

  // Drops all nodes but keeps the accumulated parameter gradients.
  void reset();
  void zero_param_grads();

  int constant(Tensor v);
  int zeros(size_t n) { return constant(Tensor::vec(n)); }
  int param(int32_t param_index);

  int embed_row(int embed, int32_t row);
  int matvec(int w, int x);          // W x
  int mat_tvec(int w, int x);        // W^T x
  int affine(int w, int x, int b);   // W x + b
  // prev < 0 starts from the all-zero state; value=h, value2=c.
  int lstm_cell_op(int x, int prev, int w, int u, int b);
  int stack_rows(std::span<const int> rows);
  int concat(int a, int b);
  int tanh_op(int a);
  int softmax_op(int a);
  int dropout_op(int a, double rate, Rng& rng);
  int softmax_xent_op(int logits, int32_t target);
  int sum_scalars(std::span<const int> scalars);
  int mul_elem(int a, int b);
  int reduce_sum(int a);
  int scale(int a, double factor);

  const Tensor& value(int id) const { return resolve_value(id); }
  const Tensor& cell_state(int id) const { return nodes_[static_cast<size_t>(id)].value2; }
  double scalar(int id) const { return resolve_value(id)[0]; }

  void backward(int loss, double seed = 1.0);

  // Dense per-parameter gradients (zeros where a parameter went unused).
  std::vector<Tensor>& param_grads() { return param_grads_; }

 private:
  enum class Op : uint8_t {
    kConst,
    kParam,
    kEmbedRow,
    kMatVec,
    kMatTVec,
    kAffine,
    kLstmCell,
    kStack,
    kConcat,
    kTanh,
    kSoftmax,
    kDropout,
    kSoftmaxXent,
    kSum,
    kMulElem,
    kReduceSum,
    kScale,
  };

  struct Node {
    Op op;
    int32_t a0 = -1, a1 = -1, a2 = -1;
    int32_t index = -1;    // param index / embedding row / xent target
    double factor = 0.0;   // kScale
    std::vector<int32_t> list;
    Tensor value;
    Tensor value2;  // LSTM cell state
    Tensor aux;     // activated gates / probs / dropout mask
    Tensor grad;
    Tensor grad2;
  };

  int push(Node n);
  const Tensor& resolve_value(int id) const;
  Tensor& grad_for(int id);
  Tensor& grad2_for(int id);
  void backward_node(size_t i);

  std::span<const Tensor> params_;
  std::vector<Node> nodes_;
  std::vector<Tensor> param_grads_;
  std::unordered_map<int32_t, int> param_nodes_;
};

}  // namespace sandhi
