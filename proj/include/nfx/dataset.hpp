#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nfx/errors.hpp"

namespace nfx {

/// Supervised regression sample set: rows of (input vector, scalar target).
struct Dataset {
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;

    std::size_t size() const noexcept { return targets.size(); }
    bool empty() const noexcept { return targets.empty(); }
    std::size_t input_dim() const noexcept { return inputs.empty() ? 0 : inputs.front().size(); }

    void validate() const {
        if (inputs.size() != targets.size())
            throw ValidationError("dataset: inputs/targets length mismatch");
        if (empty()) throw ValidationError("dataset: empty");
        const std::size_t dim = inputs.front().size();
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            if (inputs[i].size() != dim)
                throw ValidationError("dataset: inconsistent input dimension at row "
                                      + std::to_string(i));
            for (double v : inputs[i])
                if (!std::isfinite(v))
                    throw ValidationError("dataset: non-finite input at row " + std::to_string(i));
            if (!std::isfinite(targets[i]))
                throw ValidationError("dataset: non-finite target at row " + std::to_string(i));
        }
    }
};

/// Autoregressive windowing: `length` lagged values predict the value
/// `horizon` steps ahead.
struct WindowSpec {
    std::size_t length = 4;
    std::size_t horizon = 1;

    void validate() const {
        if (length < 1) throw ValidationError("window length must be >= 1");
        if (horizon < 1) throw ValidationError("window horizon must be >= 1");
    }
};

enum class NormKind { min_max, z_score };

inline std::string to_string(NormKind k) {
    return k == NormKind::min_max ? "min-max" : "z-score";
}

/// Invertible scaling fitted on one value population. min-max maps onto
/// [0,1]; z-score centers and scales to unit variance (population std).
struct NormalizationParams {
    NormKind kind = NormKind::min_max;
    double lo = 0.0;     // min (min-max)
    double hi = 1.0;     // max (min-max)
    double mean = 0.0;   // z-score
    double stddev = 1.0; // z-score

    double apply(double v) const {
        return kind == NormKind::min_max ? (v - lo) / (hi - lo) : (v - mean) / stddev;
    }
    double invert(double v) const {
        return kind == NormKind::min_max ? v * (hi - lo) + lo : v * stddev + mean;
    }
};

}  // namespace nfx
