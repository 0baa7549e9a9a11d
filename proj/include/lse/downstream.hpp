#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lse/dataset.hpp"
#include "lse/matrix.hpp"

namespace lse {

enum class LearnerKind { ridge, logistic };

LearnerKind learner_kind_from_string(const std::string& s);
const char* learner_kind_name(LearnerKind k);

struct LearnerSpec {
    LearnerKind kind = LearnerKind::ridge;
    double l2 = 0.0;
    // Logistic-only knobs.
    double learning_rate = 0.01;
    std::size_t epochs = 100;
    std::size_t batch_size = 128;
    std::uint64_t seed = 0;
};

struct FittedModel {
    LearnerKind kind = LearnerKind::ridge;
    Matrix coefficients;             // d x 1 (ridge) or d x K (logistic)
    std::vector<double> intercepts;  // 1 or K entries
    // Ridge target standardization, inverted at prediction time.
    double target_mean = 0.0;
    double target_std = 1.0;
    std::size_t num_classes = 0;  // logistic only
};

struct RidgeOptions {
    bool fit_intercept = true;
    bool standardize_target = true;
};

// Normal-equations ridge on the train-standardized target; the intercept is
// unpenalized. Predictions come back in original target units.
FittedModel fit_ridge(const Matrix& x, const std::vector<double>& y, double l2,
                      const RidgeOptions& options = {});

// Multinomial logistic regression: softmax + cross-entropy trained with
// minibatch Adam, l2 applied to weights (not intercepts).
FittedModel fit_logistic(const Matrix& x, const std::vector<int>& labels, const LearnerSpec& spec);

std::vector<double> predict_regression(const FittedModel& model, const Matrix& x);

struct ClassPrediction {
    std::vector<int> labels;
    Matrix probabilities;  // n x K, rows sum to 1
};
ClassPrediction predict_classification(const FittedModel& model, const Matrix& x);

// --- randomized-search cross-validation ---------------------------------

enum class ParamScale { uniform, log_uniform, uniform_int };

struct ParamRange {
    std::string name;  // "l2", "learning_rate", "epochs"
    ParamScale scale = ParamScale::uniform;
    double lo = 0.0;
    double hi = 1.0;
};

struct SearchSpace {
    std::vector<ParamRange> params;
    std::size_t n_samples = 20;
    std::size_t n_folds = 3;
    std::uint64_t seed = 0;
};

// Spec-declared default spaces: ridge l2 in [1e-6, 1e3] log-uniform;
// logistic lr in [1e-4, 1e-1] and l2 in [1e-6, 1e-1] log-uniform, epochs in
// {50..200} uniform.
SearchSpace default_search_space(LearnerKind kind);

enum class Metric { r2, mape, accuracy };
Metric metric_from_string(const std::string& s);
const char* metric_name(Metric m);

struct CvCandidate {
    std::size_t index = 0;  // sampling order
    LearnerSpec spec;
    std::vector<double> fold_scores;
    double mean_score = 0.0;
};

struct CvResult {
    LearnerSpec best;
    std::size_t best_index = 0;
    Metric metric = Metric::r2;
    std::vector<CvCandidate> table;
};

// Samples candidates deterministically by seed, scores each with seeded
// k-fold CV and picks the best mean (max for r2/accuracy, min for mape);
// ties go to the earliest sampled candidate.
CvResult random_search_cv(const Matrix& x, const std::vector<double>& y, Task task,
                          LearnerKind kind, const SearchSpace& space, Metric metric,
                          std::uint64_t base_learner_seed = 0);

void write_cv_table_csv(const CvResult& result, const std::filesystem::path& path);

}  // namespace lse
