#pragma once

#include <cstdint>
#include <span>

#include "rng.hpp"
#include "tensor.hpp"

namespace sandhi {

// --- raw kernels -----------------------------------------------------------

// y = W x, W is [m x n] row-major.
void mat_vec(const double* w, size_t m, size_t n, const double* x, double* y);
// x += W^T y
void mat_tvec_acc(const double* w, size_t m, size_t n, const double* y, double* x);
// W += y (outer) x
void outer_acc(double* w, size_t m, size_t n, const double* y, const double* x);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// In-place softmax with max subtraction.
void softmax_inplace(std::span<double> v);

// --- LSTM cell --------------------------------------------------------------

// Gate order inside the stacked [4h] blocks: input i, forget f,
// cell-candidate g, output o. This ordering is part of the checkpoint format.
struct LstmParamsRef {
  const Tensor& w;  // [4h x d]
  const Tensor& u;  // [4h x h]
  const Tensor& b;  // [4h]
};

struct LstmState {
  Tensor h;
  Tensor c;
};

// Shared forward kernel. `gates_out` receives the activated gates (i,f,g,o),
// which the backward pass consumes. All pointers sized by the caller.
void lstm_cell_forward(const double* x, size_t d, const double* h_prev,
                       const double* c_prev, const LstmParamsRef& p, size_t h,
                       double* gates_out, double* c_out, double* h_out);

// i,f,o = sigmoid, g = tanh of the preactivations W x + U h_prev + b;
// c = f*c_prev + i*g; h = o*tanh(c). Validates shapes.
LstmState lstm_cell(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
                    const LstmParamsRef& p);

// --- attention ---------------------------------------------------------------

struct AttentionResult {
  Tensor context;  // [h]
  Tensor weights;  // [n]
};

// Global dot attention: scores s_j = query . state_j over the [n x h] state
// matrix, weights = softmax(s), context = sum_j weights_j * state_j.
AttentionResult attention(const Tensor& query, const Tensor& encoder_states);

// --- softmax cross-entropy ----------------------------------------------------

struct XentResult {
  double loss;
  Tensor probs;
};

// loss = -log softmax(logits)[target_id], stabilized by max subtraction.
XentResult softmax_xent(const Tensor& logits, int32_t target_id);

// --- dropout -------------------------------------------------------------------

// Inverted dropout: under training, each element is zeroed with probability
// `rate` and survivors scale by 1/(1-rate); in evaluation it is the identity.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng);

}  // namespace sandhi
