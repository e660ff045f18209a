#include "tape.hpp"

#include <cmath>

namespace sandhi {

Tape::Tape(std::span<const Tensor> params) : params_(params) {
  param_grads_.reserve(params.size());
  for (const Tensor& p : params) param_grads_.emplace_back(p.shape());
}

void Tape::reset() {
  nodes_.clear();
  param_nodes_.clear();
}

void Tape::zero_param_grads() {
  for (Tensor& g : param_grads_) g.fill(0.0);
}

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size() - 1);
}

const Tensor& Tape::resolve_value(int id) const {
  const Node& n = nodes_[static_cast<size_t>(id)];
  if (n.op == Op::kParam) return params_[static_cast<size_t>(n.index)];
  return n.value;
}

Tensor& Tape::grad_for(int id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.op == Op::kParam) {
    return param_grads_[static_cast<size_t>(n.index)];
  }
  if (!n.grad.defined()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

Tensor& Tape::grad2_for(int id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (!n.grad2.defined()) n.grad2 = Tensor(n.value2.shape());
  return n.grad2;
}

int Tape::constant(Tensor v) {
  Node n{.op = Op::kConst};
  n.value = std::move(v);
  return push(std::move(n));
}

int Tape::param(int32_t param_index) {
  if (auto it = param_nodes_.find(param_index); it != param_nodes_.end()) return it->second;
  Node n{.op = Op::kParam};
  n.index = param_index;
  const int id = push(std::move(n));
  param_nodes_.emplace(param_index, id);
  return id;
}

int Tape::embed_row(int embed, int32_t row) {
  const Tensor& e = resolve_value(embed);
  Node n{.op = Op::kEmbedRow, .a0 = embed, .index = row};
  n.value = Tensor::vec(e.cols());
  const double* src = e.row(static_cast<size_t>(row));
  std::copy(src, src + e.cols(), n.value.data());
  return push(std::move(n));
}

int Tape::matvec(int w, int x) {
  const Tensor& wt = resolve_value(w);
  const Tensor& xt = resolve_value(x);
  Node n{.op = Op::kMatVec, .a0 = w, .a1 = x};
  n.value = Tensor::vec(wt.rows());
  mat_vec(wt.data(), wt.rows(), wt.cols(), xt.data(), n.value.data());
  return push(std::move(n));
}

int Tape::mat_tvec(int w, int x) {
  const Tensor& wt = resolve_value(w);
  const Tensor& xt = resolve_value(x);
  Node n{.op = Op::kMatTVec, .a0 = w, .a1 = x};
  n.value = Tensor::vec(wt.cols());
  mat_tvec_acc(wt.data(), wt.rows(), wt.cols(), xt.data(), n.value.data());
  return push(std::move(n));
}

int Tape::affine(int w, int x, int b) {
  const Tensor& wt = resolve_value(w);
  const Tensor& xt = resolve_value(x);
  const Tensor& bt = resolve_value(b);
  Node n{.op = Op::kAffine, .a0 = w, .a1 = x, .a2 = b};
  n.value = Tensor::vec(wt.rows());
  mat_vec(wt.data(), wt.rows(), wt.cols(), xt.data(), n.value.data());
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] += bt[i];
  return push(std::move(n));
}

int Tape::lstm_cell_op(int x, int prev, int w, int u, int b) {
  const Tensor& xt = resolve_value(x);
  const Tensor& ut = resolve_value(u);
  const size_t h = ut.cols();
  const size_t d = xt.size();

  Node n{.op = Op::kLstmCell};
  n.list = {x, prev, w, u, b};
  n.value = Tensor::vec(h);
  n.value2 = Tensor::vec(h);
  n.aux = Tensor::vec(4 * h);

  static thread_local std::vector<double> zeros_buf;
  const double* h_prev;
  const double* c_prev;
  if (prev >= 0) {
    h_prev = resolve_value(prev).data();
    c_prev = nodes_[static_cast<size_t>(prev)].value2.data();
  } else {
    if (zeros_buf.size() < h) zeros_buf.assign(h, 0.0);
    h_prev = zeros_buf.data();
    c_prev = zeros_buf.data();
  }
  LstmParamsRef p{resolve_value(w), ut, resolve_value(b)};
  lstm_cell_forward(xt.data(), d, h_prev, c_prev, p, h, n.aux.data(), n.value2.data(),
                    n.value.data());
  return push(std::move(n));
}

int Tape::stack_rows(std::span<const int> rows) {
  Node n{.op = Op::kStack};
  n.list.assign(rows.begin(), rows.end());
  const size_t h = resolve_value(rows[0]).size();
  n.value = Tensor::mat(rows.size(), h);
  for (size_t r = 0; r < rows.size(); ++r) {
    const Tensor& v = resolve_value(rows[r]);
    std::copy(v.data(), v.data() + h, n.value.row(r));
  }
  return push(std::move(n));
}

int Tape::concat(int a, int b) {
  const Tensor& at = resolve_value(a);
  const Tensor& bt = resolve_value(b);
  Node n{.op = Op::kConcat, .a0 = a, .a1 = b};
  n.value = Tensor::vec(at.size() + bt.size());
  std::copy(at.data(), at.data() + at.size(), n.value.data());
  std::copy(bt.data(), bt.data() + bt.size(), n.value.data() + at.size());
  return push(std::move(n));
}

int Tape::tanh_op(int a) {
  Node n{.op = Op::kTanh, .a0 = a};
  n.value = resolve_value(a);
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] = std::tanh(n.value[i]);
  return push(std::move(n));
}

int Tape::softmax_op(int a) {
  Node n{.op = Op::kSoftmax, .a0 = a};
  n.value = resolve_value(a);
  softmax_inplace(n.value.values());
  return push(std::move(n));
}

int Tape::dropout_op(int a, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    fail(ErrorKind::invalid_argument, "dropout: rate must be in [0,1)");
  }
  Node n{.op = Op::kDropout, .a0 = a};
  const Tensor& at = resolve_value(a);
  n.aux = Tensor(at.shape());
  n.value = Tensor(at.shape());
  const double scale = 1.0 / (1.0 - rate);
  for (size_t i = 0; i < at.size(); ++i) {
    const double m = rng.uniform() < rate ? 0.0 : scale;
    n.aux[i] = m;
    n.value[i] = at[i] * m;
  }
  return push(std::move(n));
}

int Tape::softmax_xent_op(int logits, int32_t target) {
  const Tensor& lt = resolve_value(logits);
  Node n{.op = Op::kSoftmaxXent, .a0 = logits, .index = target};
  XentResult r = softmax_xent(lt, target);
  n.aux = std::move(r.probs);
  n.value = Tensor::vec(1);
  n.value[0] = r.loss;
  return push(std::move(n));
}

int Tape::sum_scalars(std::span<const int> scalars) {
  Node n{.op = Op::kSum};
  n.list.assign(scalars.begin(), scalars.end());
  n.value = Tensor::vec(1);
  double acc = 0.0;
  for (int id : scalars) acc += resolve_value(id)[0];
  n.value[0] = acc;
  return push(std::move(n));
}

int Tape::mul_elem(int a, int b) {
  const Tensor& at = resolve_value(a);
  const Tensor& bt = resolve_value(b);
  Node n{.op = Op::kMulElem, .a0 = a, .a1 = b};
  n.value = at;
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] *= bt[i];
  return push(std::move(n));
}

int Tape::reduce_sum(int a) {
  Node n{.op = Op::kReduceSum, .a0 = a};
  n.value = Tensor::vec(1);
  double acc = 0.0;
  for (double v : resolve_value(a).values()) acc += v;
  n.value[0] = acc;
  return push(std::move(n));
}

int Tape::scale(int a, double factor) {
  Node n{.op = Op::kScale, .a0 = a, .factor = factor};
  n.value = resolve_value(a);
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] *= factor;
  return push(std::move(n));
}

void Tape::backward(int loss, double seed) {
  grad_for(loss)[0] += seed;
  for (size_t i = nodes_.size(); i-- > 0;) backward_node(i);
}

void Tape::backward_node(size_t i) {
  Node& n = nodes_[i];
  const bool has_grad = n.grad.defined();
  const bool has_grad2 = n.grad2.defined();
  if (!has_grad && !has_grad2) return;
  const int id = static_cast<int>(i);

  switch (n.op) {
    case Op::kConst:
    case Op::kParam:
      break;

    case Op::kEmbedRow: {
      Tensor& de = grad_for(n.a0);
      double* row = de.row(static_cast<size_t>(n.index));
      for (size_t j = 0; j < n.grad.size(); ++j) row[j] += n.grad[j];
      break;
    }

    case Op::kMatVec: {
      const Tensor& w = resolve_value(n.a0);
      const Tensor& x = resolve_value(n.a1);
      outer_acc(grad_for(n.a0).data(), w.rows(), w.cols(), n.grad.data(), x.data());
      mat_tvec_acc(w.data(), w.rows(), w.cols(), n.grad.data(), grad_for(n.a1).data());
      break;
    }

    case Op::kMatTVec: {
      // value = W^T x: dW += x (outer) dvalue, dx += W dvalue
      const Tensor& w = resolve_value(n.a0);
      const Tensor& x = resolve_value(n.a1);
      outer_acc(grad_for(n.a0).data(), w.rows(), w.cols(), x.data(), n.grad.data());
      Tensor& dx = grad_for(n.a1);
      static thread_local std::vector<double> buf;
      buf.assign(w.rows(), 0.0);
      mat_vec(w.data(), w.rows(), w.cols(), n.grad.data(), buf.data());
      for (size_t j = 0; j < dx.size(); ++j) dx[j] += buf[j];
      break;
    }

    case Op::kAffine: {
      const Tensor& w = resolve_value(n.a0);
      const Tensor& x = resolve_value(n.a1);
      outer_acc(grad_for(n.a0).data(), w.rows(), w.cols(), n.grad.data(), x.data());
      mat_tvec_acc(w.data(), w.rows(), w.cols(), n.grad.data(), grad_for(n.a1).data());
      Tensor& db = grad_for(n.a2);
      for (size_t j = 0; j < db.size(); ++j) db[j] += n.grad[j];
      break;
    }

    case Op::kLstmCell: {
      const int x_id = n.list[0], prev_id = n.list[1];
      const int w_id = n.list[2], u_id = n.list[3], b_id = n.list[4];
      const Tensor& w = resolve_value(w_id);
      const Tensor& u = resolve_value(u_id);
      const size_t h = u.cols();
      const size_t d = w.cols();
      const Tensor& x = resolve_value(x_id);

      static thread_local std::vector<double> zeros_buf;
      const double* h_prev;
      const double* c_prev;
      if (prev_id >= 0) {
        h_prev = resolve_value(prev_id).data();
        c_prev = nodes_[static_cast<size_t>(prev_id)].value2.data();
      } else {
        if (zeros_buf.size() < h) zeros_buf.assign(h, 0.0);
        h_prev = zeros_buf.data();
        c_prev = zeros_buf.data();
      }

      const double* gi = n.aux.data();
      const double* gf = n.aux.data() + h;
      const double* gg = n.aux.data() + 2 * h;
      const double* go = n.aux.data() + 3 * h;
      const double* c = n.value2.data();

      static thread_local std::vector<double> dpre;
      dpre.assign(4 * h, 0.0);
      double* dpi = dpre.data();
      double* dpf = dpre.data() + h;
      double* dpg = dpre.data() + 2 * h;
      double* dpo = dpre.data() + 3 * h;

      Tensor* dprev2 = prev_id >= 0 ? &grad2_for(prev_id) : nullptr;
      for (size_t j = 0; j < h; ++j) {
        const double dh = has_grad ? n.grad[j] : 0.0;
        const double tc = std::tanh(c[j]);
        double dc = has_grad2 ? n.grad2[j] : 0.0;
        dc += dh * go[j] * (1.0 - tc * tc);
        const double dout = dh * tc;
        const double di = dc * gg[j];
        const double dg = dc * gi[j];
        const double df = dc * c_prev[j];
        if (dprev2) (*dprev2)[j] += dc * gf[j];
        dpi[j] = di * gi[j] * (1.0 - gi[j]);
        dpf[j] = df * gf[j] * (1.0 - gf[j]);
        dpg[j] = dg * (1.0 - gg[j] * gg[j]);
        dpo[j] = dout * go[j] * (1.0 - go[j]);
      }

      outer_acc(grad_for(w_id).data(), 4 * h, d, dpre.data(), x.data());
      outer_acc(grad_for(u_id).data(), 4 * h, h, dpre.data(), h_prev);
      Tensor& db = grad_for(b_id);
      for (size_t j = 0; j < 4 * h; ++j) db[j] += dpre[j];
      mat_tvec_acc(w.data(), 4 * h, d, dpre.data(), grad_for(x_id).data());
      if (prev_id >= 0) {
        mat_tvec_acc(u.data(), 4 * h, h, dpre.data(), grad_for(prev_id).data());
      }
      break;
    }

    case Op::kStack: {
      const size_t h = n.value.cols();
      for (size_t r = 0; r < n.list.size(); ++r) {
        Tensor& dr = grad_for(n.list[r]);
        const double* g = n.grad.row(r);
        for (size_t j = 0; j < h; ++j) dr[j] += g[j];
      }
      break;
    }

    case Op::kConcat: {
      Tensor& da = grad_for(n.a0);
      Tensor& db = grad_for(n.a1);
      for (size_t j = 0; j < da.size(); ++j) da[j] += n.grad[j];
      for (size_t j = 0; j < db.size(); ++j) db[j] += n.grad[da.size() + j];
      break;
    }

    case Op::kTanh: {
      Tensor& dx = grad_for(n.a0);
      for (size_t j = 0; j < dx.size(); ++j) {
        dx[j] += n.grad[j] * (1.0 - n.value[j] * n.value[j]);
      }
      break;
    }

    case Op::kSoftmax: {
      Tensor& dx = grad_for(n.a0);
      double dot = 0.0;
      for (size_t j = 0; j < n.value.size(); ++j) dot += n.value[j] * n.grad[j];
      for (size_t j = 0; j < dx.size(); ++j) {
        dx[j] += n.value[j] * (n.grad[j] - dot);
      }
      break;
    }

    case Op::kDropout: {
      Tensor& dx = grad_for(n.a0);
      for (size_t j = 0; j < dx.size(); ++j) dx[j] += n.grad[j] * n.aux[j];
      break;
    }

    case Op::kSoftmaxXent: {
      const double dl = n.grad[0];
      Tensor& dx = grad_for(n.a0);
      for (size_t j = 0; j < dx.size(); ++j) dx[j] += dl * n.aux[j];
      dx[static_cast<size_t>(n.index)] -= dl;
      break;
    }

    case Op::kSum: {
      const double dl = n.grad[0];
      for (int src : n.list) grad_for(src)[0] += dl;
      break;
    }

    case Op::kMulElem: {
      const Tensor& a = resolve_value(n.a0);
      const Tensor& b = resolve_value(n.a1);
      Tensor& da = grad_for(n.a0);
      Tensor& db = grad_for(n.a1);
      for (size_t j = 0; j < da.size(); ++j) {
        da[j] += n.grad[j] * b[j];
        db[j] += n.grad[j] * a[j];
      }
      break;
    }

    case Op::kReduceSum: {
      const double dl = n.grad[0];
      Tensor& dx = grad_for(n.a0);
      for (size_t j = 0; j < dx.size(); ++j) dx[j] += dl;
      break;
    }

    case Op::kScale: {
      Tensor& dx = grad_for(n.a0);
      for (size_t j = 0; j < dx.size(); ++j) dx[j] += n.grad[j] * n.factor;
      break;
    }
  }
  (void)id;
}

}  // namespace sandhi
