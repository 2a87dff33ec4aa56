#include "mgs/nn/optim.hpp"

#include <cmath>

namespace mgs::nn {

AdamState AdamState::make(Eigen::Index parameter_count, double learning_rate) {
  AdamState s;
  s.first_moment = Vector::Zero(parameter_count);
  s.second_moment = Vector::Zero(parameter_count);
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(AdamState& state, Vector& params, const Vector& grads) {
  require(params.size() == grads.size(), "adam_step: parameter/gradient size mismatch");
  require(state.first_moment.size() == params.size() && state.second_moment.size() == params.size(),
          "adam_step: optimizer state does not match parameters");
  ++state.step;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
  state.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseAbs2();
  double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    double m_hat = state.first_moment(i) / c1;
    double v_hat = state.second_moment(i) / c2;
    params(i) -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

void sgd_step(double learning_rate, Vector& params, const Vector& grads) {
  require(params.size() == grads.size(), "sgd_step: parameter/gradient size mismatch");
  params -= learning_rate * grads;
}

}  // namespace mgs::nn
