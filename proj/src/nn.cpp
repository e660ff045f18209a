#include "nn.hpp"

#include <algorithm>
#include <cmath>

namespace sandhi {

void mat_vec(const double* w, size_t m, size_t n, const double* x, double* y) {
  for (size_t i = 0; i < m; ++i) {
    const double* row = w + i * n;
    double acc = 0.0;
    for (size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void mat_tvec_acc(const double* w, size_t m, size_t n, const double* y, double* x) {
  for (size_t i = 0; i < m; ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    const double* row = w + i * n;
    for (size_t j = 0; j < n; ++j) x[j] += row[j] * yi;
  }
}

void outer_acc(double* w, size_t m, size_t n, const double* y, const double* x) {
  for (size_t i = 0; i < m; ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    double* row = w + i * n;
    for (size_t j = 0; j < n; ++j) row[j] += yi * x[j];
  }
}

void softmax_inplace(std::span<double> v) {
  double mx = v[0];
  for (double e : v) mx = std::max(mx, e);
  double sum = 0.0;
  for (double& e : v) {
    e = std::exp(e - mx);
    sum += e;
  }
  for (double& e : v) e /= sum;
}

void lstm_cell_forward(const double* x, size_t d, const double* h_prev,
                       const double* c_prev, const LstmParamsRef& p, size_t h,
                       double* gates_out, double* c_out, double* h_out) {
  mat_vec(p.w.data(), 4 * h, d, x, gates_out);
  const double* u = p.u.data();
  for (size_t i = 0; i < 4 * h; ++i) {
    const double* row = u + i * h;
    double acc = p.b[i];
    for (size_t j = 0; j < h; ++j) acc += row[j] * h_prev[j];
    gates_out[i] += acc;
  }
  double* gi = gates_out;
  double* gf = gates_out + h;
  double* gg = gates_out + 2 * h;
  double* go = gates_out + 3 * h;
  for (size_t j = 0; j < h; ++j) {
    gi[j] = sigmoid(gi[j]);
    gf[j] = sigmoid(gf[j]);
    gg[j] = std::tanh(gg[j]);
    go[j] = sigmoid(go[j]);
    c_out[j] = gf[j] * c_prev[j] + gi[j] * gg[j];
    h_out[j] = go[j] * std::tanh(c_out[j]);
  }
}

LstmState lstm_cell(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
                    const LstmParamsRef& p) {
  if (p.w.rank() != 2 || p.u.rank() != 2 || p.b.rank() != 1 ||
      p.w.rows() != p.u.rows() || p.w.rows() != p.b.size() || p.w.rows() % 4 != 0) {
    fail(ErrorKind::invalid_argument, "lstm_cell: inconsistent parameter shapes");
  }
  const size_t h = p.u.cols();
  const size_t d = p.w.cols();
  if (p.u.rows() != 4 * h) fail(ErrorKind::invalid_argument, "lstm_cell: U must be [4h x h]");
  if (x.rank() != 1 || x.size() != d || h_prev.size() != h || c_prev.size() != h) {
    fail(ErrorKind::invalid_argument, "lstm_cell: input/state shape mismatch");
  }
  LstmState out{Tensor::vec(h), Tensor::vec(h)};
  std::vector<double> gates(4 * h);
  lstm_cell_forward(x.data(), d, h_prev.data(), c_prev.data(), p, h, gates.data(),
                    out.c.data(), out.h.data());
  return out;
}

AttentionResult attention(const Tensor& query, const Tensor& encoder_states) {
  if (encoder_states.rank() != 2 || encoder_states.rows() == 0) {
    fail(ErrorKind::invalid_argument, "attention: need at least one encoder state");
  }
  const size_t n = encoder_states.rows();
  const size_t h = encoder_states.cols();
  if (query.size() != h) fail(ErrorKind::invalid_argument, "attention: query size mismatch");

  AttentionResult out{Tensor::vec(h), Tensor::vec(n)};
  mat_vec(encoder_states.data(), n, h, query.data(), out.weights.data());
  softmax_inplace(out.weights.values());
  mat_tvec_acc(encoder_states.data(), n, h, out.weights.data(), out.context.data());
  return out;
}

XentResult softmax_xent(const Tensor& logits, int32_t target_id) {
  if (target_id < 0 || static_cast<size_t>(target_id) >= logits.size()) {
    fail(ErrorKind::invalid_argument,
         "softmax_xent: target id " + std::to_string(target_id) + " out of range");
  }
  XentResult out{0.0, logits};
  softmax_inplace(out.probs.values());
  out.loss = -std::log(out.probs[static_cast<size_t>(target_id)]);
  return out;
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    fail(ErrorKind::invalid_argument, "dropout: rate must be in [0,1)");
  }
  if (!training || rate == 0.0) return x;
  Tensor out = x;
  const double scale = 1.0 / (1.0 - rate);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = rng.uniform() < rate ? 0.0 : out[i] * scale;
  }
  return out;
}

}  // namespace sandhi
