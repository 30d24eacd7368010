#pragma once

#include <span>
#include <vector>

#include "nfx/dataset.hpp"
#include "nfx/errors.hpp"
#include "nfx/linalg.hpp"

namespace nfx::ts {

/// Multiple-regression baseline: target fitted on [1, lags].
struct OlsModel {
    std::vector<double> coeffs;  // bias first

    double predict(std::span<const double> x) const {
        double y = coeffs[0];
        for (std::size_t j = 0; j < x.size(); ++j) y += coeffs[j + 1] * x[j];
        return y;
    }
};

inline OlsModel ols_baseline(const Dataset& train) {
    train.validate();
    const std::size_t d = train.input_dim();
    if (train.size() <= d + 1)
        throw ValidationError("ols_baseline: need more rows than inputs + 1");

    linalg::Matrix design(train.size(), d + 1);
    for (std::size_t k = 0; k < train.size(); ++k) {
        design(k, 0) = 1.0;
        for (std::size_t j = 0; j < d; ++j) design(k, j + 1) = train.inputs[k][j];
    }
    OlsModel model;
    model.coeffs = linalg::ridge_least_squares(design, train.targets, 1e-10);
    return model;
}

inline std::vector<double> predict_ols(const OlsModel& model, const Dataset& data) {
    std::vector<double> out;
    out.reserve(data.size());
    for (const auto& x : data.inputs) out.push_back(model.predict(x));
    return out;
}

}  // namespace nfx::ts
