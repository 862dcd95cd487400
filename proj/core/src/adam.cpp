#include "user/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace user::nd {

void adam_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads,
               AdamState& state) {
  if (params.size() != grads.size())
    throw std::invalid_argument("adam_step: parameter/gradient count mismatch");

  if (state.m_.empty()) {
    for (const Tensor* p : params) {
      state.m_.emplace_back(p->rows(), p->cols());
      state.v_.emplace_back(p->rows(), p->cols());
    }
  }
  if (state.m_.size() != params.size())
    throw std::invalid_argument("adam_step: parameter count changed between steps");

  state.step_ += 1;
  const AdamConfig& c = state.config_;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_));

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = grads[k];
    if (!p.same_shape(g) || !p.same_shape(state.m_[k]))
      throw std::invalid_argument("adam_step: shape mismatch");

    auto pd = p.data();
    auto gd = g.data();
    auto md = state.m_[k].data();
    auto vd = state.v_[k].data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      md[i] = c.beta1 * md[i] + (1.0 - c.beta1) * gd[i];
      vd[i] = c.beta2 * vd[i] + (1.0 - c.beta2) * gd[i] * gd[i];
      const double mhat = md[i] / bc1;
      const double vhat = vd[i] / bc2;
      pd[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

}  // namespace user::nd
