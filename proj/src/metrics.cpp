#include "lse/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lse/error.hpp"

namespace lse {

namespace {

constexpr double kDenominatorFloor = 1e-8;

void check_lengths(std::size_t a, std::size_t b, const char* op) {
    if (a != b)
        throw usage_error(std::string(op) + ": length mismatch " + std::to_string(a) + " vs " +
                          std::to_string(b));
}

}  // namespace

double r2(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
    check_lengths(y_true.size(), y_pred.size(), "r2");
    if (y_true.size() < 2) throw usage_error("r2: need at least 2 observations");
    double mean = 0.0;
    for (double v : y_true) mean += v;
    mean /= static_cast<double>(y_true.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
        ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    }
    if (ss_tot == 0.0) throw usage_error("r2: undefined for constant y_true");
    return 1.0 - ss_res / ss_tot;
}

MapeDetail mape_detail(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
    check_lengths(y_true.size(), y_pred.size(), "mape");
    MapeDetail detail;
    double sum = 0.0;
    std::size_t included = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (std::abs(y_true[i]) < kDenominatorFloor) {
            ++detail.excluded_count;
            continue;
        }
        sum += std::abs(y_true[i] - y_pred[i]) / std::abs(y_true[i]);
        ++included;
    }
    if (included == 0) throw usage_error("mape: every entry excluded by the near-zero rule");
    detail.value = 100.0 * sum / static_cast<double>(included);
    return detail;
}

double mape(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
    return mape_detail(y_true, y_pred).value;
}

ClassificationMetrics classification_metrics(const std::vector<int>& labels_true,
                                             const std::vector<int>& labels_pred, std::size_t k) {
    check_lengths(labels_true.size(), labels_pred.size(), "classification_metrics");
    if (labels_true.empty()) throw usage_error("classification_metrics: no observations");

    ClassificationMetrics m;
    m.confusion.assign(k, std::vector<std::size_t>(k, 0));
    for (std::size_t i = 0; i < labels_true.size(); ++i) {
        const int t = labels_true[i];
        const int p = labels_pred[i];
        if (t < 0 || static_cast<std::size_t>(t) >= k)
            throw usage_error("classification_metrics: true label " + std::to_string(t) +
                              " out of range [0, " + std::to_string(k) + ")");
        if (p < 0 || static_cast<std::size_t>(p) >= k)
            throw usage_error("classification_metrics: predicted label " + std::to_string(p) +
                              " out of range [0, " + std::to_string(k) + ")");
        ++m.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }

    std::size_t correct = 0;
    double precision_sum = 0.0, recall_sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        correct += m.confusion[c][c];
        std::size_t truth_support = 0, pred_support = 0;
        for (std::size_t j = 0; j < k; ++j) {
            truth_support += m.confusion[c][j];
            pred_support += m.confusion[j][c];
        }
        if (pred_support > 0)
            precision_sum += static_cast<double>(m.confusion[c][c]) / static_cast<double>(pred_support);
        if (truth_support > 0)
            recall_sum += static_cast<double>(m.confusion[c][c]) / static_cast<double>(truth_support);
    }
    const double n = static_cast<double>(labels_true.size());
    m.accuracy = 100.0 * static_cast<double>(correct) / n;
    m.precision = 100.0 * precision_sum / static_cast<double>(k);
    m.recall = 100.0 * recall_sum / static_cast<double>(k);
    return m;
}

ReconstructionReport reconstruction_report(const Matrix& x_true_scaled, const Matrix& x_hat_scaled,
                                           double threshold_percent) {
    if (x_true_scaled.rows() != x_hat_scaled.rows() || x_true_scaled.cols() != x_hat_scaled.cols())
        throw usage_error("reconstruction_report: shape mismatch " +
                          std::to_string(x_true_scaled.rows()) + "x" +
                          std::to_string(x_true_scaled.cols()) + " vs " +
                          std::to_string(x_hat_scaled.rows()) + "x" +
                          std::to_string(x_hat_scaled.cols()));
    const std::size_t n = x_true_scaled.rows();
    const std::size_t d = x_true_scaled.cols();
    const double threshold = threshold_percent / 100.0;

    ReconstructionReport report;
    report.per_feature_mape.assign(d, std::numeric_limits<double>::quiet_NaN());
    double all_cells_sum = 0.0;
    std::size_t all_cells_included = 0;
    double rate_sum = 0.0;
    std::size_t rated_features = 0;

    for (std::size_t c = 0; c < d; ++c) {
        double feature_sum = 0.0;
        std::size_t included = 0, correct = 0;
        for (std::size_t r = 0; r < n; ++r) {
            const double truth = x_true_scaled(r, c);
            if (std::abs(truth) < kDenominatorFloor) {
                ++report.excluded_cell_count;
                continue;
            }
            const double ape = std::abs(x_hat_scaled(r, c) - truth) / std::abs(truth);
            feature_sum += ape;
            ++included;
            if (ape < threshold) ++correct;
        }
        if (included == 0) continue;  // fully excluded feature
        report.per_feature_mape[c] = 100.0 * feature_sum / static_cast<double>(included);
        rate_sum += static_cast<double>(correct) / static_cast<double>(included);
        ++rated_features;
        all_cells_sum += feature_sum;
        all_cells_included += included;
    }

    if (all_cells_included > 0) {
        report.representation_error = 100.0 * all_cells_sum / static_cast<double>(all_cells_included);
        report.correct_rate = 100.0 * rate_sum / static_cast<double>(rated_features);
    }
    return report;
}

}  // namespace lse
