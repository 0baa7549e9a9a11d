#include "lse/losses.hpp"

#include <cmath>
#include <string>

#include "lse/error.hpp"

namespace lse {

LossResult mae_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw usage_error("mae_loss: shape mismatch " + std::to_string(pred.rows()) + "x" +
                          std::to_string(pred.cols()) + " vs " + std::to_string(target.rows()) +
                          "x" + std::to_string(target.cols()));
    LossResult res;
    res.grad = Matrix(pred.rows(), pred.cols());
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred.values()[i] - target.values()[i];
        sum += std::abs(diff);
        res.grad.values()[i] = diff > 0.0 ? inv_n : (diff < 0.0 ? -inv_n : 0.0);
    }
    res.value = sum * inv_n;
    return res;
}

LossResult softmax_crossentropy(const Matrix& logits, const std::vector<int>& labels) {
    if (labels.size() != logits.rows())
        throw usage_error("softmax_crossentropy: " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(logits.rows()) + " rows");
    const std::size_t n = logits.rows();
    const std::size_t k = logits.cols();
    LossResult res;
    res.grad = Matrix(n, k);
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = labels[i];
        if (label < 0 || static_cast<std::size_t>(label) >= k)
            throw usage_error("softmax_crossentropy: label " + std::to_string(label) +
                              " out of range [0, " + std::to_string(k) + ") at row " +
                              std::to_string(i));
        const double* row = logits.row(i);
        double mx = row[0];
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        double* g = res.grad.row(i);
        for (std::size_t j = 0; j < k; ++j) {
            g[j] = std::exp(row[j] - mx);
            sum += g[j];
        }
        total += -(row[static_cast<std::size_t>(label)] - mx - std::log(sum));
        for (std::size_t j = 0; j < k; ++j) g[j] *= inv_n / sum;
        g[static_cast<std::size_t>(label)] -= inv_n;
    }
    res.value = total * inv_n;
    return res;
}

}  // namespace lse
