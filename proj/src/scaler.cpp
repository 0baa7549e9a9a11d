#include "lse/scaler.hpp"

#include <string>

#include "lse/error.hpp"

namespace lse {

ScalerParams fit_scaler(const Matrix& features, const std::vector<std::size_t>& train_idx) {
    if (train_idx.empty()) throw usage_error("fit_scaler: empty training index set");
    const std::size_t d = features.cols();
    ScalerParams scaler;
    scaler.mins.assign(d, 0.0);
    scaler.maxs.assign(d, 0.0);
    bool first = true;
    for (std::size_t idx : train_idx) {
        if (idx >= features.rows())
            throw usage_error("fit_scaler: row index " + std::to_string(idx) + " out of range");
        const double* row = features.row(idx);
        if (first) {
            for (std::size_t c = 0; c < d; ++c) scaler.mins[c] = scaler.maxs[c] = row[c];
            first = false;
            continue;
        }
        for (std::size_t c = 0; c < d; ++c) {
            if (row[c] < scaler.mins[c]) scaler.mins[c] = row[c];
            if (row[c] > scaler.maxs[c]) scaler.maxs[c] = row[c];
        }
    }
    return scaler;
}

ScalerParams fit_scaler(const Dataset& ds, const std::vector<std::size_t>& train_idx) {
    return fit_scaler(ds.features, train_idx);
}

namespace {

void check_dim(const Matrix& features, const ScalerParams& scaler, const char* op) {
    if (features.cols() != scaler.dim())
        throw usage_error(std::string(op) + ": scaler has " + std::to_string(scaler.dim()) +
                          " features, data has " + std::to_string(features.cols()));
}

}  // namespace

Matrix transform(const Matrix& features, const ScalerParams& scaler) {
    check_dim(features, scaler, "transform");
    Matrix out = features;
    const std::size_t d = scaler.dim();
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double* row = out.row(i);
        for (std::size_t c = 0; c < d; ++c) {
            const double range = scaler.maxs[c] - scaler.mins[c];
            row[c] = range > 0.0 ? (row[c] - scaler.mins[c]) / range : 0.0;
        }
    }
    return out;
}

Matrix inverse_transform(const Matrix& features, const ScalerParams& scaler) {
    check_dim(features, scaler, "inverse_transform");
    Matrix out = features;
    const std::size_t d = scaler.dim();
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double* row = out.row(i);
        for (std::size_t c = 0; c < d; ++c) {
            const double range = scaler.maxs[c] - scaler.mins[c];
            row[c] = range > 0.0 ? row[c] * range + scaler.mins[c] : scaler.mins[c];
        }
    }
    return out;
}

Dataset transform(const Dataset& ds, const ScalerParams& scaler) {
    Dataset out = ds;
    out.features = transform(ds.features, scaler);
    return out;
}

Dataset inverse_transform(const Dataset& ds, const ScalerParams& scaler) {
    Dataset out = ds;
    out.features = inverse_transform(ds.features, scaler);
    return out;
}

}  // namespace lse
