#pragma once

#include <vector>

#include "lse/matrix.hpp"

namespace lse {

struct RegressionMetrics {
    double r2 = 0.0;    // fraction, <= 1
    double mape = 0.0;  // percent
};

struct ClassificationMetrics {
    double accuracy = 0.0;   // percent
    double precision = 0.0;  // percent, macro-averaged
    double recall = 0.0;     // percent, macro-averaged
    std::vector<std::vector<std::size_t>> confusion;  // [true][pred]
};

struct ReconstructionReport {
    double representation_error = 0.0;  // percent: mean APE over included cells
    double correct_rate = 0.0;          // percent: avg correctly estimated observations per feature
    std::vector<double> per_feature_mape;  // percent; NaN for fully-excluded features
    std::size_t excluded_cell_count = 0;
};

// 1 - SS_res / SS_tot. Throws when y_true is constant.
double r2(const std::vector<double>& y_true, const std::vector<double>& y_pred);

// Mean absolute percentage error in percent. Entries with |y_true| < 1e-8 are
// excluded; throws when every entry is excluded.
double mape(const std::vector<double>& y_true, const std::vector<double>& y_pred);

struct MapeDetail {
    double value = 0.0;
    std::size_t excluded_count = 0;
};
MapeDetail mape_detail(const std::vector<double>& y_true, const std::vector<double>& y_pred);

// Accuracy plus macro precision/recall over K classes; per-class 0/0 counts
// as 0.
ClassificationMetrics classification_metrics(const std::vector<int>& labels_true,
                                             const std::vector<int>& labels_pred, std::size_t k);

// Per-cell absolute percentage errors on scaled data. A feature's MAPE
// averages its included rows; correct_rate averages, over features, the share
// of included observations with APE below the threshold.
ReconstructionReport reconstruction_report(const Matrix& x_true_scaled, const Matrix& x_hat_scaled,
                                           double threshold_percent = 5.0);

}  // namespace lse
