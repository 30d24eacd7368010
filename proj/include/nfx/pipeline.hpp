#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "nfx/anfis.hpp"
#include "nfx/dataset.hpp"
#include "nfx/errors.hpp"
#include "nfx/fcm.hpp"
#include "nfx/mlp.hpp"
#include "nfx/timeseries.hpp"
#include "nfx/train.hpp"

namespace nfx::pipeline {

enum class AggregatorMode { anfis, fallback_blend };

inline std::string to_string(AggregatorMode m) {
    return m == AggregatorMode::anfis ? "anfis" : "fallback-blend";
}

inline AggregatorMode aggregator_mode_from_string(const std::string& s) {
    if (s == "anfis") return AggregatorMode::anfis;
    if (s == "fallback-blend") return AggregatorMode::fallback_blend;
    throw ValidationError("unknown aggregator mode: " + s);
}

struct AdequacyVerdict {
    bool pass = false;
    double validation_relative_rmse = 0.0;
    double threshold = 0.0;
};

/// One-step RMSE over the validation split divided by the population
/// standard deviation of the validation targets; passes at or under the
/// threshold. A mean predictor scores about 1 under this metric.
inline AdequacyVerdict verify_forecast(const mlp::MlpModel& model,
                                       const NormalizationParams& norm,
                                       const Dataset& validation, double threshold) {
    if (!(threshold > 0.0)) throw ValidationError("verify_forecast: threshold must be > 0");
    validation.validate();
    const double spread = ts::population_std(validation.targets);
    if (!(spread > 0.0))
        throw ValidationError("verify_forecast: validation targets have zero spread");

    std::vector<double> predicted;
    predicted.reserve(validation.size());
    for (const auto& row : validation.inputs) {
        std::vector<double> x(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) x[i] = norm.apply(row[i]);
        predicted.push_back(norm.invert(mlp::mlp_predict_scalar(model, x)));
    }
    AdequacyVerdict verdict;
    verdict.threshold = threshold;
    verdict.validation_relative_rmse = ts::rmse(predicted, validation.targets) / spread;
    verdict.pass = verdict.validation_relative_rmse <= threshold;
    return verdict;
}

/// Aggregator ANFIS plus the min-max scaling of its three inputs
/// (dl forecast, fcm activation, consonance).
struct AggregatorModel {
    fuzzy::AnfisModel model;
    std::array<NormalizationParams, 3> input_norm;

    double predict(double dl, double activation, double consonance) const {
        const std::array<double, 3> x{input_norm[0].apply(dl),
                                      input_norm[1].apply(activation),
                                      input_norm[2].apply(consonance)};
        return fuzzy::predict(model, x);
    }
};

struct AggregatorSample {
    double dl_forecast = 0.0;
    double fcm_activation = 0.0;
    double consonance = 0.0;
    double actual = 0.0;
};

/// Fits the 3-input aggregator (2 gaussian terms per input, grid rules) on
/// historical (dl, fcm, consonance) -> actual rows by hybrid training. Rows
/// are brought into a canonical order first, so the fit does not depend on
/// how the history was assembled.
inline AggregatorModel build_aggregator(std::vector<AggregatorSample> history) {
    if (history.size() < 20)
        throw ValidationError("build_aggregator: need at least 20 history rows, have "
                              + std::to_string(history.size()));
    std::sort(history.begin(), history.end(), [](const auto& a, const auto& b) {
        return std::tie(a.dl_forecast, a.fcm_activation, a.consonance, a.actual)
               < std::tie(b.dl_forecast, b.fcm_activation, b.consonance, b.actual);
    });

    AggregatorModel agg;
    std::array<std::vector<double>, 3> columns;
    for (const auto& row : history) {
        columns[0].push_back(row.dl_forecast);
        columns[1].push_back(row.fcm_activation);
        columns[2].push_back(row.consonance);
    }
    for (std::size_t c = 0; c < 3; ++c)
        agg.input_norm[c] = ts::fit_normalization(columns[c], NormKind::min_max);

    Dataset data;
    for (const auto& row : history) {
        data.inputs.push_back({agg.input_norm[0].apply(row.dl_forecast),
                               agg.input_norm[1].apply(row.fcm_activation),
                               agg.input_norm[2].apply(row.consonance)});
        data.targets.push_back(row.actual);
    }

    auto model = fuzzy::init_from_data(data, {2, 2, 2});
    train::TrainConfig config;
    config.max_epochs = 30;
    config.learning_rate = 0.005;
    config.lr_decay = 1.0;
    config.target_rmse = 0.0;
    auto [trained, report] = train::train_hybrid(model, data, config);
    (void)report;
    agg.model = std::move(trained);
    return agg;
}

/// Joins the branch outputs into the final forecast. With both branches and
/// an aggregator: the aggregator decides. With both but no aggregator: the
/// consonance-weighted blend (1-c)*dl + c*level, where level is the FCM
/// activation mapped into series units through `series_scale`. A single
/// surviving value passes through unchanged.
inline double aggregate(const std::optional<double>& dl,
                        const std::optional<fcm::FcmForecast>& fcm_forecast,
                        const AggregatorModel* aggregator,
                        const NormalizationParams& series_scale) {
    if (!dl && !fcm_forecast)
        throw ValidationError("aggregate: no branch produced a value");
    if (dl && !fcm_forecast) return *dl;
    const double level = series_scale.invert(fcm_forecast->activation);
    if (!dl) return level;
    if (aggregator)
        return aggregator->predict(*dl, fcm_forecast->activation, fcm_forecast->consonance);
    const double c = fcm_forecast->consonance;
    return (1.0 - c) * *dl + c * level;
}

enum class ModuleStatus { ok, failed, skipped };

inline std::string to_string(ModuleStatus s) {
    switch (s) {
        case ModuleStatus::ok: return "ok";
        case ModuleStatus::failed: return "failed";
        default: return "skipped";
    }
}

struct ForecastReport {
    std::optional<double> quantitative;
    std::optional<AdequacyVerdict> adequacy;
    std::optional<fcm::FcmForecast> fcm_forecast;
    double final_forecast = 0.0;
    ModuleStatus dl_status = ModuleStatus::skipped;
    ModuleStatus verify_status = ModuleStatus::skipped;
    ModuleStatus fcm_status = ModuleStatus::skipped;
    ModuleStatus aggregate_status = ModuleStatus::skipped;
    bool degraded = false;
    std::string dl_error;   // diagnostics, not serialized
    std::string fcm_error;
};

inline nlohmann::json to_json(const ForecastReport& report) {
    nlohmann::json j;
    if (report.quantitative) j["quantitative"] = *report.quantitative;
    if (report.adequacy)
        j["adequacy"] = {{"pass", report.adequacy->pass},
                         {"relative_rmse", report.adequacy->validation_relative_rmse},
                         {"threshold", report.adequacy->threshold}};
    if (report.fcm_forecast)
        j["fcm"] = {{"activation", report.fcm_forecast->activation},
                    {"consonance", report.fcm_forecast->consonance}};
    j["final"] = report.final_forecast;
    j["status"] = {{"dl", to_string(report.dl_status)},
                   {"verify", to_string(report.verify_status)},
                   {"fcm", to_string(report.fcm_status)},
                   {"aggregate", to_string(report.aggregate_status)}};
    j["degraded"] = report.degraded;
    return j;
}

struct PipelineConfig {
    double adequacy_threshold = 0.5;
    bool enable_dl = true;
    bool enable_fcm = true;
    bool strict_adequacy = false;
    AggregatorMode aggregator_mode = AggregatorMode::fallback_blend;
    WindowSpec window{4, 1};
    double val_fraction = 0.25;
    std::uint32_t seed = 0;

    std::vector<std::size_t> mlp_hidden{8};
    std::size_t mlp_epochs = 300;
    double mlp_learning_rate = 0.05;
    double mlp_momentum = 0.9;
    std::size_t mlp_batch_size = 16;

    std::optional<fcm::ConceptMap> fcm_map;
    std::string fcm_target;
    std::size_t fcm_max_iters = 100;
    double fcm_eps = 1e-6;

    std::optional<AggregatorModel> aggregator;

    void validate() const {
        if (!(adequacy_threshold > 0.0))
            throw ValidationError("pipeline: adequacy threshold must be > 0");
        if (!(val_fraction > 0.0 && val_fraction < 1.0))
            throw ValidationError("pipeline: val_fraction must be in (0,1)");
        window.validate();
    }
};

/// Reads the JSON mirror of PipelineConfig. Unknown keys are ignored; the
/// map and aggregator referenced by *_path entries are loaded by the CLI,
/// not here.
inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig config;
    config.adequacy_threshold = j.value("adequacy_threshold", config.adequacy_threshold);
    config.enable_dl = j.value("enable_dl", config.enable_dl);
    config.enable_fcm = j.value("enable_fcm", config.enable_fcm);
    config.strict_adequacy = j.value("strict_adequacy", config.strict_adequacy);
    if (j.contains("aggregator_mode"))
        config.aggregator_mode =
            aggregator_mode_from_string(j.at("aggregator_mode").get<std::string>());
    if (j.contains("window")) {
        config.window.length = j.at("window").value("length", config.window.length);
        config.window.horizon = j.at("window").value("horizon", config.window.horizon);
    }
    config.val_fraction = j.value("val_fraction", config.val_fraction);
    config.seed = j.value("seed", config.seed);
    if (j.contains("mlp")) {
        const auto& m = j.at("mlp");
        config.mlp_hidden = m.value("hidden", config.mlp_hidden);
        config.mlp_epochs = m.value("epochs", config.mlp_epochs);
        config.mlp_learning_rate = m.value("learning_rate", config.mlp_learning_rate);
        config.mlp_momentum = m.value("momentum", config.mlp_momentum);
        config.mlp_batch_size = m.value("batch_size", config.mlp_batch_size);
    }
    if (j.contains("fcm")) {
        const auto& f = j.at("fcm");
        config.fcm_target = f.value("target", config.fcm_target);
        config.fcm_max_iters = f.value("max_iters", config.fcm_max_iters);
        config.fcm_eps = f.value("eps", config.fcm_eps);
    }
    return config;
}

namespace detail {

struct DlBranch {
    double forecast = 0.0;
    AdequacyVerdict verdict;
    NormalizationParams norm;
};

inline DlBranch run_dl_branch(const ts::TimeSeries& series, const PipelineConfig& config) {
    // One-step windows for fitting and adequacy; the report forecast uses
    // the configured horizon.
    const WindowSpec fit_window{config.window.length, 1};
    auto windows = ts::make_windows(series, fit_window);

    const std::size_t n = windows.size();
    const auto n_val = static_cast<std::size_t>(std::floor(n * config.val_fraction));
    if (n_val == 0 || n_val >= n)
        throw ValidationError("pipeline: series too short for a train/validation split");
    const std::size_t n_train = n - n_val;

    Dataset train_raw, val_raw;
    train_raw.inputs.assign(windows.inputs.begin(), windows.inputs.begin() + n_train);
    train_raw.targets.assign(windows.targets.begin(), windows.targets.begin() + n_train);
    val_raw.inputs.assign(windows.inputs.begin() + n_train, windows.inputs.end());
    val_raw.targets.assign(windows.targets.begin() + n_train, windows.targets.end());

    // Scale fitted on the training period only.
    std::vector<double> train_values;
    for (const auto& row : train_raw.inputs)
        train_values.insert(train_values.end(), row.begin(), row.end());
    train_values.insert(train_values.end(), train_raw.targets.begin(), train_raw.targets.end());
    DlBranch branch;
    branch.norm = ts::fit_normalization(train_values, NormKind::min_max);

    auto train_set = mlp::to_trainset(ts::apply_normalization(train_raw, branch.norm));

    std::vector<std::size_t> sizes;
    sizes.push_back(config.window.length);
    for (std::size_t h : config.mlp_hidden) sizes.push_back(h);
    sizes.push_back(1);
    auto net = mlp::mlp_init(sizes, mlp::Activation::tanh, config.seed);

    mlp::SgdConfig sgd;
    sgd.learning_rate = config.mlp_learning_rate;
    sgd.momentum = config.mlp_momentum;
    sgd.batch_size = config.mlp_batch_size;
    sgd.epochs = config.mlp_epochs;
    sgd.seed = config.seed;
    auto [trained, history] = mlp::sgd_train(std::move(net), train_set, sgd);
    (void)history;

    branch.verdict = verify_forecast(trained, branch.norm, val_raw, config.adequacy_threshold);
    branch.forecast =
        mlp::forecast_series(trained, series.values, config.window, branch.norm).back();
    return branch;
}

}  // namespace detail

using EventList = std::vector<std::pair<std::string, double>>;

/// Runs the quantitative and qualitative branches independently, verifies
/// the quantitative forecast, and aggregates whatever survived. A branch
/// failure is recorded in its status and never propagates to the other
/// branch; only the loss of both branches raises PipelineError. Events come
/// through a callable so that a broken event source degrades the FCM branch
/// like any other in-branch fault.
inline ForecastReport run_pipeline(const ts::TimeSeries& series,
                                   const std::function<EventList()>& event_source,
                                   const PipelineConfig& config) {
    series.validate();
    config.validate();

    ForecastReport report;
    std::optional<double> dl_value;
    std::optional<NormalizationParams> series_scale;

    if (config.enable_dl) {
        try {
            auto branch = detail::run_dl_branch(series, config);
            report.dl_status = ModuleStatus::ok;
            report.quantitative = branch.forecast;
            report.adequacy = branch.verdict;
            report.verify_status =
                branch.verdict.pass ? ModuleStatus::ok : ModuleStatus::failed;
            series_scale = branch.norm;
            if (branch.verdict.pass || !config.strict_adequacy)
                dl_value = branch.forecast;
        } catch (const std::exception& e) {
            report.dl_status = ModuleStatus::failed;
            report.verify_status = ModuleStatus::skipped;
            report.dl_error = e.what();
        }
    }

    std::optional<fcm::FcmForecast> fcm_value;
    if (config.enable_fcm) {
        try {
            if (!config.fcm_map)
                throw ValidationError("pipeline: FCM branch enabled but no concept map given");
            if (config.fcm_target.empty())
                throw ValidationError("pipeline: FCM branch enabled but no target concept");
            fcm_value = fcm::forecast(*config.fcm_map, event_source(), config.fcm_target,
                                      config.fcm_max_iters, config.fcm_eps);
            report.fcm_status = ModuleStatus::ok;
            report.fcm_forecast = fcm_value;
        } catch (const std::exception& e) {
            report.fcm_status = ModuleStatus::failed;
            report.fcm_error = e.what();
        }
    }

    if (!dl_value && !fcm_value) {
        const auto describe = [](ModuleStatus status, const std::string& error,
                                 const char* suppressed) {
            if (status == ModuleStatus::skipped) return std::string("disabled");
            if (!error.empty()) return error;
            return std::string(suppressed);
        };
        throw PipelineError(
            describe(report.dl_status, report.dl_error, "forecast suppressed by adequacy gate"),
            describe(report.fcm_status, report.fcm_error, "no forecast"));
    }

    if (!series_scale) {
        // FCM-only path: map activations over the full observed range.
        double lo = series.values.front(), hi = series.values.front();
        for (double v : series.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        NormalizationParams scale;
        scale.kind = NormKind::min_max;
        scale.lo = lo;
        scale.hi = hi > lo ? hi : lo + 1.0;
        series_scale = scale;
    }

    const AggregatorModel* aggregator = nullptr;
    if (config.aggregator_mode == AggregatorMode::anfis && config.aggregator)
        aggregator = &*config.aggregator;
    try {
        report.final_forecast = aggregate(dl_value, fcm_value, aggregator, *series_scale);
        report.aggregate_status = ModuleStatus::ok;
    } catch (const std::exception&) {
        // Keep the report usable: fall back to the blend path.
        report.final_forecast = aggregate(dl_value, fcm_value, nullptr, *series_scale);
        report.aggregate_status = ModuleStatus::failed;
    }

    report.degraded = report.dl_status == ModuleStatus::failed
                      || report.verify_status == ModuleStatus::failed
                      || report.fcm_status == ModuleStatus::failed
                      || report.aggregate_status == ModuleStatus::failed;
    return report;
}

inline ForecastReport run_pipeline(const ts::TimeSeries& series, const EventList& events,
                                   const PipelineConfig& config) {
    return run_pipeline(
        series, std::function<EventList()>([&events] { return events; }), config);
}

// --- aggregator serialization ----------------------------------------------

inline nlohmann::json to_json(const AggregatorModel& agg) {
    nlohmann::json j;
    j["model"] = fuzzy::to_json(agg.model);
    j["input_norm"] = nlohmann::json::array();
    for (const auto& p : agg.input_norm)
        j["input_norm"].push_back({{"lo", p.lo}, {"hi", p.hi}});
    return j;
}

inline AggregatorModel aggregator_from_json(const nlohmann::json& j) {
    AggregatorModel agg;
    agg.model = fuzzy::model_from_json(j.at("model"));
    const auto& norms = j.at("input_norm");
    if (norms.size() != 3) throw ValidationError("aggregator json: expected 3 input norms");
    for (std::size_t i = 0; i < 3; ++i) {
        agg.input_norm[i].kind = NormKind::min_max;
        agg.input_norm[i].lo = norms.at(i).at("lo").get<double>();
        agg.input_norm[i].hi = norms.at(i).at("hi").get<double>();
    }
    return agg;
}

}  // namespace nfx::pipeline
