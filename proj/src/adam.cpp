#include "lse/adam.hpp"

#include <cmath>
#include <string>

#include "lse/error.hpp"

namespace lse {

AdamState::AdamState(std::size_t size, AdamConfig config)
    : config_(config), m_(size, 0.0), v_(size, 0.0) {}

void AdamState::update(std::span<double> params, std::span<const double> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw usage_error("AdamState::update: got " + std::to_string(params.size()) +
                          " params / " + std::to_string(grads.size()) + " grads for state of size " +
                          std::to_string(m_.size()));
    ++step_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    const double lr = config_.learning_rate;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        m_[i] = b1 * m_[i] + (1.0 - b1) * g;
        v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
        const double mhat = m_[i] / bias1;
        const double vhat = v_[i] / bias2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
}

}  // namespace lse
