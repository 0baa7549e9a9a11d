#pragma once

#include <vector>

#include "lse/matrix.hpp"

namespace lse {

struct LossResult {
    double value = 0.0;
    Matrix grad;  // d value / d pred, same shape as pred
};

// Mean absolute error over all cells. grad = sign(pred - target) / cell_count
// with sign(0) = 0.
LossResult mae_loss(const Matrix& pred, const Matrix& target);

// Row-wise softmax + mean negative log-likelihood over class-index labels.
// grad = (softmax - onehot) / n, numerically stabilized by max subtraction.
LossResult softmax_crossentropy(const Matrix& logits, const std::vector<int>& labels);

}  // namespace lse
