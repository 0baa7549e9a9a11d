#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lse {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t parameters_checked = 0;
    std::size_t networks_checked = 0;
    std::string worst_case;  // description of the network holding the max
};

// Backpropagation vs central finite differences (h = 1e-5) on randomly built
// small dense networks (every dimension <= 10), covering relu/identity/softmax
// activations, MAE and softmax cross-entropy losses, and one multitask
// encoder/decoder/head variant. Inputs are resampled away from relu and MAE
// kink points so the finite-difference quotient is trustworthy. The numeric
// side evaluates the loss through forward passes only.
GradCheckReport run_gradient_check_suite(std::size_t n_networks, std::uint64_t seed);

}  // namespace lse
