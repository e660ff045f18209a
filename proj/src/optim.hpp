#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace sandhi {

struct AdamHyper {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

// Adam with bias correction; the step counter increments before the update.
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::span<const Tensor> params, AdamHyper hyper);

  // theta -= lr * m_hat / (sqrt(v_hat) + eps). Rejects non-finite gradients,
  // naming the offending parameter group.
  void step(std::span<Tensor> params, std::span<const Tensor> grads,
            std::span<const std::string> names);

  uint64_t step_count() const { return t_; }
  void set_step_count(uint64_t t) { t_ = t; }
  const AdamHyper& hyper() const { return hyper_; }
  std::vector<Tensor>& first_moments() { return m_; }
  std::vector<Tensor>& second_moments() { return v_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  bool initialized() const { return !m_.empty(); }

 private:
  AdamHyper hyper_;
  std::vector<Tensor> m_, v_;
  uint64_t t_ = 0;
};

// Scales all gradients so their global L2 norm is at most max_norm
// (no-op when max_norm <= 0 or the norm is already within bounds).
void clip_grad_norm(std::span<Tensor> grads, double max_norm);

}  // namespace sandhi
