#include "lse/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "lse/adam.hpp"
#include "lse/error.hpp"
#include "lse/layer.hpp"
#include "lse/losses.hpp"
#include "lse/metrics.hpp"
#include "lse/rng.hpp"

namespace lse {

LearnerKind learner_kind_from_string(const std::string& s) {
    if (s == "ridge") return LearnerKind::ridge;
    if (s == "logistic") return LearnerKind::logistic;
    throw usage_error("unknown learner '" + s + "' (expected 'ridge' or 'logistic')");
}

const char* learner_kind_name(LearnerKind k) {
    return k == LearnerKind::ridge ? "ridge" : "logistic";
}

namespace {

// Cholesky solve of the SPD system a*x = b; a is overwritten. Throws on a
// non-positive pivot (singular or indefinite system).
std::vector<double> cholesky_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
        if (diag <= 0.0)
            throw data_error("ridge: singular system (pivot " + std::to_string(diag) +
                             " at column " + std::to_string(j) + "); try l2 > 0");
        const double root = std::sqrt(diag);
        a(j, j) = root;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= a(i, k) * a(j, k);
            a(i, j) = v / root;
        }
    }
    // Forward then backward substitution.
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= a(i, k) * b[k];
        b[i] = v / a(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        for (std::size_t k = i + 1; k < n; ++k) v -= a(k, i) * b[k];
        b[i] = v / a(i, i);
    }
    return b;
}

}  // namespace

FittedModel fit_ridge(const Matrix& x, const std::vector<double>& y, double l2,
                      const RidgeOptions& options) {
    if (x.rows() != y.size())
        throw usage_error("fit_ridge: " + std::to_string(y.size()) + " targets for " +
                          std::to_string(x.rows()) + " rows");
    if (x.rows() < 2) throw usage_error("fit_ridge: need at least 2 rows");
    if (l2 < 0.0) throw usage_error("fit_ridge: l2 must be >= 0");

    const std::size_t n = x.rows();
    const std::size_t d = x.cols();

    FittedModel model;
    model.kind = LearnerKind::ridge;

    std::vector<double> y_work(y);
    if (options.standardize_target) {
        double mean = 0.0;
        for (double v : y) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : y) ss += (v - mean) * (v - mean);
        double stddev = std::sqrt(ss / static_cast<double>(n));
        if (stddev <= 0.0) stddev = 1.0;
        model.target_mean = mean;
        model.target_std = stddev;
        for (double& v : y_work) v = (v - mean) / stddev;
    }

    std::vector<double> col_means(d, 0.0);
    double y_mean = 0.0;
    if (options.fit_intercept) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = x.row(i);
            for (std::size_t c = 0; c < d; ++c) col_means[c] += row[c];
            y_mean += y_work[i];
        }
        for (double& m : col_means) m /= static_cast<double>(n);
        y_mean /= static_cast<double>(n);
    }

    // Gram matrix and right-hand side on centered data.
    Matrix gram(d, d, 0.0);
    std::vector<double> rhs(d, 0.0);
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.row(i);
        for (std::size_t c = 0; c < d; ++c) centered[c] = row[c] - col_means[c];
        const double yc = y_work[i] - y_mean;
        for (std::size_t a = 0; a < d; ++a) {
            const double va = centered[a];
            double* gr = gram.row(a);
            for (std::size_t b = a; b < d; ++b) gr[b] += va * centered[b];
            rhs[a] += va * yc;
        }
    }
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < a; ++b) gram(a, b) = gram(b, a);
        gram(a, a) += l2;
    }

    const std::vector<double> w = cholesky_solve(std::move(gram), std::move(rhs));
    model.coefficients = Matrix(d, 1);
    for (std::size_t c = 0; c < d; ++c) model.coefficients(c, 0) = w[c];
    double intercept = y_mean;
    for (std::size_t c = 0; c < d; ++c) intercept -= w[c] * col_means[c];
    model.intercepts = {intercept};
    return model;
}

FittedModel fit_logistic(const Matrix& x, const std::vector<int>& labels, const LearnerSpec& spec) {
    if (x.rows() != labels.size())
        throw usage_error("fit_logistic: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(x.rows()) + " rows");
    if (spec.epochs < 1) throw usage_error("fit_logistic: epochs must be >= 1");
    if (spec.batch_size < 1) throw usage_error("fit_logistic: batch_size must be >= 1");
    if (spec.l2 < 0.0) throw usage_error("fit_logistic: l2 must be >= 0");

    int max_label = 0;
    std::set<int> distinct;
    for (int label : labels) {
        if (label < 0) throw data_error("fit_logistic: negative label " + std::to_string(label));
        max_label = std::max(max_label, label);
        distinct.insert(label);
    }
    if (distinct.size() < 2)
        throw data_error("fit_logistic: training data contains a single class");
    const std::size_t k = static_cast<std::size_t>(max_label) + 1;
    const std::size_t n = x.rows();

    Rng init_rng(derive_seed(spec.seed, "logistic-init"));
    LayerParams layer = he_init(x.cols(), k, Activation::identity, init_rng);
    AdamConfig adam_cfg{spec.learning_rate};
    AdamState w_state(layer.weights.size(), adam_cfg);
    AdamState b_state(layer.biases.size(), adam_cfg);

    Rng shuffle_rng(derive_seed(spec.seed, "logistic-shuffle"));
    std::vector<int> yb;
    for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffle_rng.permutation(n);
        for (std::size_t start = 0; start < n; start += spec.batch_size) {
            const std::size_t end = std::min(start + spec.batch_size, n);
            const std::vector<std::size_t> batch_idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                     order.begin() + static_cast<std::ptrdiff_t>(end));
            const Matrix xb = x.select_rows(batch_idx);
            yb.resize(batch_idx.size());
            for (std::size_t i = 0; i < batch_idx.size(); ++i) yb[i] = labels[batch_idx[i]];

            LayerCache cache;
            layer_forward(layer, xb, &cache);
            LossResult loss = softmax_crossentropy(cache.preact, yb);
            if (!std::isfinite(loss.value))
                throw lse::runtime_error("fit_logistic: non-finite loss at epoch " +
                                         std::to_string(epoch + 1));
            LayerGrads grads = affine_backward(layer, cache, loss.grad);
            if (spec.l2 > 0.0) {
                auto& wg = grads.weight_grad.values();
                const auto& w = layer.weights.values();
                for (std::size_t i = 0; i < wg.size(); ++i) wg[i] += spec.l2 * w[i];
            }
            w_state.update(layer.weights.values(), grads.weight_grad.values());
            b_state.update(layer.biases, grads.bias_grad);
        }
    }

    FittedModel model;
    model.kind = LearnerKind::logistic;
    model.coefficients = std::move(layer.weights);
    model.intercepts = std::move(layer.biases);
    model.num_classes = k;
    return model;
}

namespace {

void check_width(const FittedModel& model, const Matrix& x, const char* op) {
    if (x.cols() != model.coefficients.rows())
        throw usage_error(std::string(op) + ": input has " + std::to_string(x.cols()) +
                          " columns, model was fit on " + std::to_string(model.coefficients.rows()));
}

}  // namespace

std::vector<double> predict_regression(const FittedModel& model, const Matrix& x) {
    if (model.kind != LearnerKind::ridge)
        throw usage_error("predict_regression: model is not a regression learner");
    check_width(model, x, "predict_regression");
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* row = x.row(i);
        double v = model.intercepts[0];
        for (std::size_t c = 0; c < x.cols(); ++c) v += row[c] * model.coefficients(c, 0);
        out[i] = v * model.target_std + model.target_mean;
    }
    return out;
}

ClassPrediction predict_classification(const FittedModel& model, const Matrix& x) {
    if (model.kind != LearnerKind::logistic)
        throw usage_error("predict_classification: model is not a classification learner");
    check_width(model, x, "predict_classification");
    LayerParams layer{model.coefficients, model.intercepts, Activation::softmax};
    ClassPrediction pred;
    pred.probabilities = layer_forward(layer, x);
    pred.labels.resize(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* row = pred.probabilities.row(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < model.num_classes; ++c)
            if (row[c] > row[best]) best = c;
        pred.labels[i] = static_cast<int>(best);
    }
    return pred;
}

// --- randomized search ----------------------------------------------------

SearchSpace default_search_space(LearnerKind kind) {
    SearchSpace space;
    if (kind == LearnerKind::ridge) {
        space.params = {{"l2", ParamScale::log_uniform, 1e-6, 1e3}};
    } else {
        space.params = {{"learning_rate", ParamScale::log_uniform, 1e-4, 1e-1},
                        {"l2", ParamScale::log_uniform, 1e-6, 1e-1},
                        {"epochs", ParamScale::uniform_int, 50, 200}};
    }
    return space;
}

Metric metric_from_string(const std::string& s) {
    if (s == "r2") return Metric::r2;
    if (s == "mape") return Metric::mape;
    if (s == "accuracy") return Metric::accuracy;
    throw usage_error("unknown metric '" + s + "' (expected r2, mape or accuracy)");
}

const char* metric_name(Metric m) {
    switch (m) {
        case Metric::r2: return "r2";
        case Metric::mape: return "mape";
        case Metric::accuracy: return "accuracy";
    }
    return "?";
}

namespace {

double sample_param(const ParamRange& range, Rng& rng) {
    switch (range.scale) {
        case ParamScale::uniform:
            return range.lo + (range.hi - range.lo) * rng.uniform();
        case ParamScale::log_uniform: {
            if (range.lo <= 0.0 || range.hi < range.lo)
                throw usage_error("search space: log-uniform range for '" + range.name +
                                  "' must satisfy 0 < lo <= hi");
            const double lo = std::log(range.lo);
            const double hi = std::log(range.hi);
            return std::exp(lo + (hi - lo) * rng.uniform());
        }
        case ParamScale::uniform_int: {
            const auto lo = static_cast<std::int64_t>(range.lo);
            const auto hi = static_cast<std::int64_t>(range.hi);
            if (hi < lo) throw usage_error("search space: empty integer range for '" + range.name + "'");
            return static_cast<double>(lo + static_cast<std::int64_t>(
                                                rng.below(static_cast<std::uint64_t>(hi - lo + 1))));
        }
    }
    throw usage_error("search space: unknown scale");
}

void apply_param(LearnerSpec& spec, const std::string& name, double value) {
    if (name == "l2") spec.l2 = value;
    else if (name == "learning_rate") spec.learning_rate = value;
    else if (name == "epochs") spec.epochs = static_cast<std::size_t>(value);
    else if (name == "batch_size") spec.batch_size = static_cast<std::size_t>(value);
    else throw usage_error("search space: unknown hyperparameter '" + name + "'");
}

double score_fold(const Matrix& x_train, const std::vector<double>& y_train, const Matrix& x_val,
                  const std::vector<double>& y_val, Task task, const LearnerSpec& spec,
                  Metric metric) {
    if (task == Task::classification) {
        std::vector<int> labels_train(y_train.size()), labels_val(y_val.size());
        for (std::size_t i = 0; i < y_train.size(); ++i) labels_train[i] = static_cast<int>(y_train[i]);
        for (std::size_t i = 0; i < y_val.size(); ++i) labels_val[i] = static_cast<int>(y_val[i]);
        const FittedModel model = fit_logistic(x_train, labels_train, spec);
        const ClassPrediction pred = predict_classification(model, x_val);
        int max_label = 0;
        for (int l : labels_val) max_label = std::max(max_label, l);
        const std::size_t k = std::max<std::size_t>(model.num_classes,
                                                    static_cast<std::size_t>(max_label) + 1);
        if (metric != Metric::accuracy)
            throw usage_error("random_search_cv: classification supports the accuracy metric only");
        return classification_metrics(labels_val, pred.labels, k).accuracy;
    }
    const FittedModel model = fit_ridge(x_train, y_train, spec.l2);
    const std::vector<double> pred = predict_regression(model, x_val);
    switch (metric) {
        case Metric::r2: return r2(y_val, pred);
        case Metric::mape: return mape(y_val, pred);
        default: throw usage_error("random_search_cv: regression supports r2 or mape metrics");
    }
}

}  // namespace

CvResult random_search_cv(const Matrix& x, const std::vector<double>& y, Task task,
                          LearnerKind kind, const SearchSpace& space, Metric metric,
                          std::uint64_t base_learner_seed) {
    if (x.rows() != y.size())
        throw usage_error("random_search_cv: " + std::to_string(y.size()) + " targets for " +
                          std::to_string(x.rows()) + " rows");
    if (space.n_samples < 1) throw usage_error("random_search_cv: n_samples must be >= 1");
    if (space.n_folds < 2) throw usage_error("random_search_cv: n_folds must be >= 2");
    if (space.params.empty()) throw usage_error("random_search_cv: empty search space");
    const std::size_t n = x.rows();
    if (n < space.n_folds)
        throw usage_error("random_search_cv: " + std::to_string(space.n_folds) + " folds need at least " +
                          std::to_string(space.n_folds) + " rows, got " + std::to_string(n));

    // Seeded fold assignment: shuffled rows dealt into folds round-robin, so
    // every fold is nonempty and the partition is exact.
    Rng fold_rng(derive_seed(space.seed, "cv-folds"));
    const std::vector<std::size_t> order = fold_rng.permutation(n);
    std::vector<std::vector<std::size_t>> folds(space.n_folds);
    for (std::size_t i = 0; i < n; ++i) folds[i % space.n_folds].push_back(order[i]);

    std::vector<std::vector<std::size_t>> train_parts(space.n_folds);
    for (std::size_t f = 0; f < space.n_folds; ++f) {
        for (std::size_t g = 0; g < space.n_folds; ++g)
            if (g != f) train_parts[f].insert(train_parts[f].end(), folds[g].begin(), folds[g].end());
    }

    Rng sample_rng(derive_seed(space.seed, "cv-sampling"));
    CvResult result;
    result.metric = metric;
    const bool maximize = metric != Metric::mape;

    for (std::size_t s = 0; s < space.n_samples; ++s) {
        CvCandidate candidate;
        candidate.index = s;
        candidate.spec.kind = kind;
        candidate.spec.seed = derive_seed(base_learner_seed, "cv-candidate-" + std::to_string(s));
        for (const auto& range : space.params)
            apply_param(candidate.spec, range.name, sample_param(range, sample_rng));

        double sum = 0.0;
        for (std::size_t f = 0; f < space.n_folds; ++f) {
            const Matrix x_train = x.select_rows(train_parts[f]);
            const Matrix x_val = x.select_rows(folds[f]);
            std::vector<double> y_train, y_val;
            y_train.reserve(train_parts[f].size());
            y_val.reserve(folds[f].size());
            for (std::size_t idx : train_parts[f]) y_train.push_back(y[idx]);
            for (std::size_t idx : folds[f]) y_val.push_back(y[idx]);
            const double score = score_fold(x_train, y_train, x_val, y_val, task, candidate.spec, metric);
            candidate.fold_scores.push_back(score);
            sum += score;
        }
        candidate.mean_score = sum / static_cast<double>(space.n_folds);
        result.table.push_back(std::move(candidate));
    }

    std::size_t best = 0;
    for (std::size_t s = 1; s < result.table.size(); ++s) {
        const double a = result.table[s].mean_score;
        const double b = result.table[best].mean_score;
        if (maximize ? a > b : a < b) best = s;
    }
    result.best = result.table[best].spec;
    result.best_index = best;
    return result;
}

void write_cv_table_csv(const CvResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lse::runtime_error("cannot write '" + path.string() + "'");
    const std::size_t n_folds = result.table.empty() ? 0 : result.table[0].fold_scores.size();
    out << "candidate,kind,l2,learning_rate,epochs,batch_size";
    for (std::size_t f = 0; f < n_folds; ++f) out << ",fold" << f;
    out << ",mean_" << metric_name(result.metric) << ",selected\n";
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& c : result.table) {
        out << c.index << ',' << learner_kind_name(c.spec.kind) << ',' << num(c.spec.l2) << ','
            << num(c.spec.learning_rate) << ',' << c.spec.epochs << ',' << c.spec.batch_size;
        for (double s : c.fold_scores) out << ',' << num(s);
        out << ',' << num(c.mean_score) << ',' << (c.index == result.best_index ? 1 : 0) << '\n';
    }
}

}  // namespace lse
