#include "optim.hpp"

#include <cmath>

namespace sandhi {

void AdamHyper::validate() const {
  if (!(lr > 0.0)) fail(ErrorKind::invalid_argument, "adam: lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    fail(ErrorKind::invalid_argument, "adam: betas must be in [0,1)");
  }
  if (!(eps > 0.0)) fail(ErrorKind::invalid_argument, "adam: eps must be positive");
}

AdamState::AdamState(std::span<const Tensor> params, AdamHyper hyper) : hyper_(hyper) {
  hyper_.validate();
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Tensor& p : params) {
    m_.emplace_back(p.shape());
    v_.emplace_back(p.shape());
  }
}

void AdamState::step(std::span<Tensor> params, std::span<const Tensor> grads,
                     std::span<const std::string> names) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    fail(ErrorKind::invalid_argument, "adam: parameter/gradient count mismatch");
  }
  for (size_t k = 0; k < grads.size(); ++k) {
    if (!grads[k].all_finite()) {
      fail(ErrorKind::numeric, "adam: non-finite gradient in parameter group '" +
                                   std::string(names[k]) + "'");
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));
  for (size_t k = 0; k < params.size(); ++k) {
    double* p = params[k].data();
    const double* g = grads[k].data();
    double* m = m_[k].data();
    double* v = v_[k].data();
    const size_t n = params[k].size();
    for (size_t i = 0; i < n; ++i) {
      m[i] = hyper_.beta1 * m[i] + (1.0 - hyper_.beta1) * g[i];
      v[i] = hyper_.beta2 * v[i] + (1.0 - hyper_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= hyper_.lr * m_hat / (std::sqrt(v_hat) + hyper_.eps);
    }
  }
}

void clip_grad_norm(std::span<Tensor> grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.values()) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (Tensor& g : grads) {
    for (double& v : g.values()) v *= scale;
  }
}

}  // namespace sandhi
