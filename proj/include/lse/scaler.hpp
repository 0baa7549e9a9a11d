#pragma once

#include <vector>

#include "lse/dataset.hpp"
#include "lse/matrix.hpp"

namespace lse {

// Per-feature min-max parameters, fitted on the training partition only.
struct ScalerParams {
    std::vector<double> mins;
    std::vector<double> maxs;

    std::size_t dim() const { return mins.size(); }
};

ScalerParams fit_scaler(const Matrix& features, const std::vector<std::size_t>& train_idx);
ScalerParams fit_scaler(const Dataset& ds, const std::vector<std::size_t>& train_idx);

// x' = (x - min) / (max - min). Constant features map to 0. Values outside
// the fitted range are not clipped.
Matrix transform(const Matrix& features, const ScalerParams& scaler);
Dataset transform(const Dataset& ds, const ScalerParams& scaler);

// Exact inverse for non-constant features; constant features come back as
// their fitted minimum.
Matrix inverse_transform(const Matrix& features, const ScalerParams& scaler);
Dataset inverse_transform(const Dataset& ds, const ScalerParams& scaler);

}  // namespace lse
