#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nfx/csv.hpp"
#include "nfx/dataset.hpp"
#include "nfx/errors.hpp"

namespace nfx::ts {

/// A univariate series with strictly increasing timestamps. Timestamps are
/// kept as text; integer sequences compare numerically, anything else
/// (ISO-8601 dates) lexicographically.
struct TimeSeries {
    std::vector<std::string> timestamps;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }

    void validate() const {
        if (timestamps.size() != values.size())
            throw ValidationError("time series: timestamp/value length mismatch");
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!std::isfinite(values[i]))
                throw ValidationError("time series: non-finite value at row "
                                      + std::to_string(i + 1));
        bool numeric = true;
        std::vector<long long> as_int(timestamps.size());
        for (std::size_t i = 0; i < timestamps.size() && numeric; ++i) {
            try {
                std::size_t pos = 0;
                as_int[i] = std::stoll(timestamps[i], &pos);
                numeric = pos == timestamps[i].size();
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        for (std::size_t i = 1; i < timestamps.size(); ++i) {
            const bool ok = numeric ? as_int[i - 1] < as_int[i]
                                    : timestamps[i - 1] < timestamps[i];
            if (!ok)
                throw ValidationError("time series: timestamps not strictly increasing at row "
                                      + std::to_string(i + 1));
        }
    }
};

/// Loads a series from CSV by column names. Errors name the offending
/// 1-based data row.
inline TimeSeries load_csv(const std::string& path, const std::string& time_column,
                           const std::string& value_column) {
    const auto table = csv::read_file(path);
    const int tc = table.column(time_column);
    const int vc = table.column(value_column);
    if (tc < 0) throw ValidationError("missing column \"" + time_column + "\" in " + path);
    if (vc < 0) throw ValidationError("missing column \"" + value_column + "\" in " + path);

    TimeSeries series;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where =
            "row " + std::to_string(r + 1) + ", column " + value_column;
        if (static_cast<int>(row.size()) <= std::max(tc, vc))
            throw ValidationError("short row at row " + std::to_string(r + 1) + " in " + path);
        series.timestamps.push_back(row[tc]);
        series.values.push_back(csv::parse_number(row[vc], where));
    }
    series.validate();
    return series;
}

inline void save_csv(const std::string& path, const TimeSeries& series,
                     const std::string& time_column = "t",
                     const std::string& value_column = "value") {
    csv::Table table;
    table.header = {time_column, value_column};
    for (std::size_t i = 0; i < series.size(); ++i)
        table.rows.push_back({series.timestamps[i], csv::fmt17(series.values[i])});
    csv::write_file(path, table);
}

/// Sliding-window dataset: rows ([v_{t-p+1..t}], v_{t+h}); row count is
/// n - p - h + 1.
inline Dataset make_windows(std::span<const double> values, const WindowSpec& spec) {
    spec.validate();
    const std::size_t p = spec.length;
    const std::size_t h = spec.horizon;
    if (values.size() < p + h)
        throw ValidationError("series too short for windowing: need > "
                              + std::to_string(p + h - 1) + " points, have "
                              + std::to_string(values.size()));
    Dataset data;
    const std::size_t count = values.size() - p - h + 1;
    data.inputs.reserve(count);
    data.targets.reserve(count);
    for (std::size_t t = p - 1; t + h < values.size(); ++t) {
        data.inputs.emplace_back(values.begin() + (t - p + 1), values.begin() + t + 1);
        data.targets.push_back(values[t + h]);
    }
    return data;
}

inline Dataset make_windows(const TimeSeries& series, const WindowSpec& spec) {
    return make_windows(std::span<const double>(series.values), spec);
}

inline NormalizationParams fit_normalization(std::span<const double> values, NormKind kind) {
    if (values.empty()) throw ValidationError("normalize: empty input");
    NormalizationParams params;
    params.kind = kind;
    if (kind == NormKind::min_max) {
        double lo = values[0], hi = values[0];
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) throw ValidationError("normalize: constant series, min-max undefined");
        params.lo = lo;
        params.hi = hi;
    } else {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());  // population convention
        if (!(var > 0.0)) throw ValidationError("normalize: zero variance, z-score undefined");
        params.mean = mean;
        params.stddev = std::sqrt(var);
    }
    return params;
}

inline std::vector<double> apply_normalization(std::span<const double> values,
                                               const NormalizationParams& params) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = params.apply(values[i]);
    return out;
}

inline std::pair<std::vector<double>, NormalizationParams>
normalize(std::span<const double> values, NormKind kind) {
    auto params = fit_normalization(values, kind);
    return {apply_normalization(values, params), params};
}

inline std::vector<double> denormalize(std::span<const double> values,
                                       const NormalizationParams& params) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = params.invert(values[i]);
    return out;
}

/// Applies an already-fitted scaling to every lag and target of a windowed
/// dataset (one shared scale, since all cells live in series units).
inline Dataset apply_normalization(const Dataset& data, const NormalizationParams& params) {
    Dataset out = data;
    for (auto& row : out.inputs)
        for (double& v : row) v = params.apply(v);
    for (double& v : out.targets) v = params.apply(v);
    return out;
}

struct ChronoSplit {
    Dataset train, val, test;
};

/// Contiguous chronological train/val/test split. Sizes are floored with the
/// remainder assigned to train; every split must be non-empty.
inline ChronoSplit split_chrono(const Dataset& data, double train_fraction,
                                double val_fraction, double test_fraction) {
    if (!(train_fraction > 0.0) || !(val_fraction > 0.0) || !(test_fraction > 0.0))
        throw ValidationError("split: fractions must be positive");
    if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
        throw ValidationError("split: fractions must sum to 1");
    const std::size_t n = data.size();
    const auto n_val = static_cast<std::size_t>(std::floor(n * val_fraction));
    const auto n_test = static_cast<std::size_t>(std::floor(n * test_fraction));
    if (n_val == 0 || n_test == 0 || n_val + n_test >= n)
        throw ValidationError("split: a split would be empty");
    const std::size_t n_train = n - n_val - n_test;

    ChronoSplit split;
    auto copy_range = [&](std::size_t lo, std::size_t hi, Dataset& out) {
        out.inputs.assign(data.inputs.begin() + lo, data.inputs.begin() + hi);
        out.targets.assign(data.targets.begin() + lo, data.targets.begin() + hi);
    };
    copy_range(0, n_train, split.train);
    copy_range(n_train, n_train + n_val, split.val);
    copy_range(n_train + n_val, n, split.test);
    return split;
}

struct MetricsReport {
    double rmse = 0.0;
    double mae = 0.0;
    std::optional<double> mape;  // absent when any actual is zero
};

inline MetricsReport metrics(std::span<const double> predicted,
                             std::span<const double> actual) {
    if (predicted.size() != actual.size())
        throw ValidationError("metrics: length mismatch");
    if (predicted.empty()) throw ValidationError("metrics: empty input");
    MetricsReport report;
    double se = 0.0, ae = 0.0, ape = 0.0;
    bool mape_defined = true;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double e = predicted[i] - actual[i];
        se += e * e;
        ae += std::abs(e);
        if (actual[i] == 0.0)
            mape_defined = false;
        else
            ape += std::abs(e) / std::abs(actual[i]);
    }
    const auto n = static_cast<double>(predicted.size());
    report.rmse = std::sqrt(se / n);
    report.mae = ae / n;
    if (mape_defined) report.mape = ape / n * 100.0;
    return report;
}

inline double rmse(std::span<const double> predicted, std::span<const double> actual) {
    return metrics(predicted, actual).rmse;
}

/// Population standard deviation, the project-wide convention.
inline double population_std(std::span<const double> values) {
    if (values.empty()) throw ValidationError("population_std: empty input");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(values.size()));
}

}  // namespace nfx::ts
