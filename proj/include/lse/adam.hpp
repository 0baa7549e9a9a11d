#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lse {

struct AdamConfig {
    double learning_rate = 0.0001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam state for one flat parameter tensor. update() applies the standard
// bias-corrected recurrence in place and advances the step counter by one.
class AdamState {
public:
    AdamState() = default;
    AdamState(std::size_t size, AdamConfig config);

    void update(std::span<double> params, std::span<const double> grads);

    std::int64_t step() const { return step_; }
    const AdamConfig& config() const { return config_; }
    const std::vector<double>& first_moment() const { return m_; }
    const std::vector<double>& second_moment() const { return v_; }

private:
    AdamConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::int64_t step_ = 0;
};

}  // namespace lse
