#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "nfx/pipeline.hpp"
#include "nfx/synth.hpp"
#include "test_helpers.hpp"

using namespace nfx;
using namespace nfx::pipeline;

namespace {

fcm::ConceptMap demo_map() {
    fcm::ConceptMap map;
    map.concepts = {"growth", "volatility", "sentiment", "price"};
    map.weights = linalg::Matrix(4, 4);
    map.weights(0, 3) = 0.8;   // growth supports price
    map.weights(2, 3) = 0.4;   // sentiment supports price
    map.weights(1, 3) = -0.3;  // volatility works against it
    map.weights(2, 0) = 0.5;
    map.steepness = 1.0;
    map.self_memory = 1.0;
    return map;
}

PipelineConfig fast_config() {
    PipelineConfig config;
    config.window = WindowSpec{4, 1};
    config.mlp_hidden = {8};
    config.mlp_epochs = 120;
    config.mlp_learning_rate = 0.05;
    config.seed = 7;
    config.fcm_map = demo_map();
    config.fcm_target = "price";
    return config;
}

}  // namespace

TEST_CASE("verify_forecast grades models against the target spread", "[pipeline]") {
    // A "model" that reproduces its target exactly: identity on one lag.
    auto identity = mlp::mlp_init({1, 1}, mlp::Activation::tanh, 1);
    identity.weights[0](0, 0) = 1.0;
    identity.biases[0][0] = 0.0;

    NormalizationParams norm;
    norm.lo = 0.0;
    norm.hi = 1.0;

    Dataset validation;
    for (double v : {0.1, 0.4, 0.7, 0.9, 0.2, 0.6}) {
        validation.inputs.push_back({v});
        validation.targets.push_back(v);
    }
    const auto verdict = verify_forecast(identity, norm, validation, 0.5);
    CHECK(verdict.pass);
    CHECK(verdict.validation_relative_rmse == Approx(0.0).margin(1e-12));
    CHECK(verdict.threshold == 0.5);

    // Predicting the mean scores about 1 and fails at tau = 0.5.
    double mean = 0.0;
    for (double t : validation.targets) mean += t;
    mean /= validation.targets.size();
    auto mean_model = mlp::mlp_init({1, 1}, mlp::Activation::tanh, 1);
    mean_model.weights[0](0, 0) = 0.0;
    mean_model.biases[0][0] = mean;
    const auto mean_verdict = verify_forecast(mean_model, norm, validation, 0.5);
    CHECK(mean_verdict.validation_relative_rmse == Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(mean_verdict.pass);

    Dataset constant;
    for (int i = 0; i < 5; ++i) {
        constant.inputs.push_back({0.5});
        constant.targets.push_back(2.0);
    }
    CHECK_THROWS_AS(verify_forecast(identity, norm, constant, 0.5), ValidationError);
}

TEST_CASE("aggregator reproduces the dl forecast on identity history", "[pipeline]") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> value(1.0, 3.0);
    std::uniform_real_distribution<double> act(0.0, 1.0);
    std::vector<AggregatorSample> history;
    for (int k = 0; k < 60; ++k) {
        AggregatorSample row;
        row.dl_forecast = value(rng);
        row.fcm_activation = act(rng);
        row.consonance = act(rng);
        row.actual = row.dl_forecast;  // the dl branch is already right
        history.push_back(row);
    }
    const auto agg = build_aggregator(history);

    double se = 0.0, norm = 0.0;
    for (const auto& row : history) {
        const double p = agg.predict(row.dl_forecast, row.fcm_activation, row.consonance);
        se += (p - row.actual) * (p - row.actual);
        norm += row.actual * row.actual;
    }
    CHECK(std::sqrt(se / history.size()) / std::sqrt(norm / history.size()) < 0.05);
}

TEST_CASE("aggregator training needs twenty rows and ignores row order", "[pipeline]") {
    std::vector<AggregatorSample> short_history(19);
    CHECK_THROWS_AS(build_aggregator(short_history), ValidationError);

    std::mt19937 rng(13);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::vector<AggregatorSample> history;
    for (int k = 0; k < 30; ++k) {
        AggregatorSample row;
        row.dl_forecast = value(rng);
        row.fcm_activation = value(rng);
        row.consonance = value(rng);
        row.actual = 0.7 * row.dl_forecast + 0.3 * row.fcm_activation;
        history.push_back(row);
    }
    const auto a = build_aggregator(history);
    auto shuffled = history;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto b = build_aggregator(shuffled);
    CHECK(fuzzy::to_json(a.model).dump() == fuzzy::to_json(b.model).dump());
}

TEST_CASE("an installed aggregator takes over the final forecast", "[pipeline]") {
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::vector<AggregatorSample> history;
    for (int k = 0; k < 40; ++k) {
        AggregatorSample row;
        row.dl_forecast = value(rng);
        row.fcm_activation = value(rng);
        row.consonance = value(rng);
        row.actual = 0.5 * row.dl_forecast + 0.2 * row.fcm_activation + 0.1;
        history.push_back(row);
    }
    const auto agg = build_aggregator(history);

    fcm::FcmForecast f;
    f.target = "price";
    f.activation = 0.4;
    f.consonance = 0.7;
    NormalizationParams scale;
    scale.lo = 0.0;
    scale.hi = 1.0;
    const double out = aggregate(0.6, f, &agg, scale);
    CHECK(out == agg.predict(0.6, 0.4, 0.7));

    // JSON round trip preserves predictions bit-exactly.
    const auto text = to_json(agg).dump();
    const auto back = aggregator_from_json(nlohmann::json::parse(text));
    CHECK(back.predict(0.6, 0.4, 0.7) == agg.predict(0.6, 0.4, 0.7));
    CHECK(to_json(back).dump() == text);
}

TEST_CASE("anfis aggregator mode is used by the pipeline when installed", "[pipeline]") {
    const auto series = ts::synth_mackey_glass(400, 7);
    auto config = fast_config();

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> value(0.5, 1.5);
    std::uniform_real_distribution<double> act(0.0, 1.0);
    std::vector<AggregatorSample> history;
    for (int k = 0; k < 30; ++k) {
        AggregatorSample row;
        row.dl_forecast = value(rng);
        row.fcm_activation = act(rng);
        row.consonance = act(rng);
        row.actual = row.dl_forecast;
        history.push_back(row);
    }
    config.aggregator = build_aggregator(history);
    config.aggregator_mode = AggregatorMode::anfis;

    const auto report = run_pipeline(series, {{"sentiment", 0.9}}, config);
    CHECK(report.aggregate_status == ModuleStatus::ok);
    REQUIRE(report.quantitative.has_value());
    REQUIRE(report.fcm_forecast.has_value());
    const double expected = config.aggregator->predict(
        *report.quantitative, report.fcm_forecast->activation,
        report.fcm_forecast->consonance);
    CHECK(report.final_forecast == expected);
}

TEST_CASE("the fallback blend is a convex combination", "[pipeline]") {
    NormalizationParams scale;
    scale.lo = 10.0;
    scale.hi = 20.0;

    fcm::FcmForecast f;
    f.target = "price";
    f.activation = 0.6;  // level = 16

    f.consonance = 0.0;
    CHECK(aggregate(12.0, f, nullptr, scale) == 12.0);
    f.consonance = 1.0;
    CHECK(aggregate(12.0, f, nullptr, scale) == 16.0);

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        f.activation = unit(rng);
        f.consonance = unit(rng);
        const double dl = 10.0 + 10.0 * unit(rng);
        const double level = scale.invert(f.activation);
        const double out = aggregate(dl, f, nullptr, scale);
        CHECK(out >= std::min(dl, level) - 1e-12);
        CHECK(out <= std::max(dl, level) + 1e-12);
    }

    CHECK(aggregate(12.5, std::nullopt, nullptr, scale) == 12.5);
    CHECK(aggregate(std::nullopt, f, nullptr, scale) == Approx(scale.invert(f.activation)));
    CHECK_THROWS_AS(aggregate(std::nullopt, std::nullopt, nullptr, scale), ValidationError);
}

TEST_CASE("healthy pipeline run reports every module ok", "[pipeline]") {
    const auto series = ts::synth_mackey_glass(400, 7);
    const auto config = fast_config();
    const auto report =
        run_pipeline(series, {{"sentiment", 0.9}, {"volatility", 0.2}}, config);

    CHECK(report.dl_status == ModuleStatus::ok);
    CHECK(report.verify_status == ModuleStatus::ok);
    CHECK(report.fcm_status == ModuleStatus::ok);
    CHECK(report.aggregate_status == ModuleStatus::ok);
    CHECK_FALSE(report.degraded);
    REQUIRE(report.quantitative.has_value());
    REQUIRE(report.adequacy.has_value());
    CHECK(report.adequacy->pass);
    REQUIRE(report.fcm_forecast.has_value());
    CHECK(report.fcm_forecast->activation >= 0.0);
    CHECK(report.fcm_forecast->activation <= 1.0);

    const auto j = to_json(report);
    CHECK(j.contains("quantitative"));
    CHECK(j.at("adequacy").contains("pass"));
    CHECK(j.at("adequacy").contains("relative_rmse"));
    CHECK(j.at("adequacy").contains("threshold"));
    CHECK(j.at("fcm").contains("activation"));
    CHECK(j.at("fcm").contains("consonance"));
    CHECK(j.contains("final"));
    CHECK(j.at("status").at("dl") == "ok");
    CHECK(j.at("status").at("verify") == "ok");
    CHECK(j.at("status").at("fcm") == "ok");
    CHECK(j.at("status").at("aggregate") == "ok");
    CHECK(j.at("degraded") == false);
}

TEST_CASE("fcm fault degrades the run and passes the dl value through", "[pipeline]") {
    const auto series = ts::synth_mackey_glass(400, 7);
    auto config = fast_config();

    const auto healthy =
        run_pipeline(series, {{"sentiment", 0.9}, {"volatility", 0.2}}, config);
    const auto degraded = run_pipeline(series, {{"no-such-concept", 0.5}}, config);

    CHECK(degraded.fcm_status == ModuleStatus::failed);
    CHECK(degraded.degraded);
    REQUIRE(degraded.quantitative.has_value());
    // The final forecast falls back to the dl branch bit-for-bit, and the
    // dl branch itself is untouched by the fcm fault.
    CHECK(degraded.final_forecast == *degraded.quantitative);
    CHECK(*degraded.quantitative == *healthy.quantitative);
    CHECK(degraded.adequacy->validation_relative_rmse
          == healthy.adequacy->validation_relative_rmse);
}

TEST_CASE("dl fault leaves the fcm branch intact", "[pipeline]") {
    // Series too short for the window: the dl branch fails structurally.
    ts::TimeSeries tiny;
    for (int i = 0; i < 5; ++i) {
        tiny.timestamps.push_back(std::to_string(i));
        tiny.values.push_back(1.0 + 0.1 * i);
    }
    auto config = fast_config();
    const auto report = run_pipeline(tiny, {{"sentiment", 0.9}}, config);
    CHECK(report.dl_status == ModuleStatus::failed);
    CHECK(report.verify_status == ModuleStatus::skipped);
    CHECK(report.fcm_status == ModuleStatus::ok);
    CHECK(report.degraded);

    const auto series = ts::synth_mackey_glass(400, 7);
    const auto healthy = run_pipeline(series, {{"sentiment", 0.9}}, config);
    REQUIRE(report.fcm_forecast.has_value());
    CHECK(report.fcm_forecast->activation == healthy.fcm_forecast->activation);
    CHECK(report.fcm_forecast->consonance == healthy.fcm_forecast->consonance);
}

TEST_CASE("dual failure raises a pipeline error carrying both causes", "[pipeline]") {
    ts::TimeSeries tiny;
    for (int i = 0; i < 5; ++i) {
        tiny.timestamps.push_back(std::to_string(i));
        tiny.values.push_back(1.0 + 0.1 * i);
    }
    auto config = fast_config();
    try {
        run_pipeline(tiny, {{"no-such-concept", 0.5}}, config);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK_FALSE(e.dl_error().empty());
        CHECK_FALSE(e.fcm_error().empty());
    }
}

TEST_CASE("disabled branches are reported as skipped", "[pipeline]") {
    const auto series = ts::synth_mackey_glass(400, 7);
    auto config = fast_config();
    config.enable_fcm = false;
    const auto report = run_pipeline(series, EventList{}, config);
    CHECK(report.fcm_status == ModuleStatus::skipped);
    CHECK_FALSE(report.degraded);
    REQUIRE(report.quantitative.has_value());
    CHECK(report.final_forecast == *report.quantitative);
}

TEST_CASE("pipeline runs are bit-deterministic per seed", "[pipeline]") {
    const auto series = ts::synth_mackey_glass(400, 7);
    const auto config = fast_config();
    const auto a = run_pipeline(series, {{"sentiment", 0.8}}, config);
    const auto b = run_pipeline(series, {{"sentiment", 0.8}}, config);
    CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("report invariants hold across fault combinations", "[pipeline]") {
    const auto series = ts::synth_mackey_glass(400, 7);
    auto config = fast_config();
    const std::vector<pipeline::EventList> event_sets{
        {{"sentiment", 0.9}}, {{"no-such-concept", 0.1}}, {}};
    for (const auto& events : event_sets) {
        const auto report = run_pipeline(series, events, config);
        const bool any_failed = report.dl_status == ModuleStatus::failed
                                || report.verify_status == ModuleStatus::failed
                                || report.fcm_status == ModuleStatus::failed
                                || report.aggregate_status == ModuleStatus::failed;
        CHECK(report.degraded == any_failed);
        CHECK(std::isfinite(report.final_forecast));
    }
}

TEST_CASE("config json mirror picks up every field", "[pipeline]") {
    const auto j = nlohmann::json::parse(R"({
        "adequacy_threshold": 0.4,
        "enable_dl": true,
        "enable_fcm": false,
        "strict_adequacy": true,
        "aggregator_mode": "anfis",
        "window": {"length": 6, "horizon": 2},
        "val_fraction": 0.3,
        "seed": 99,
        "mlp": {"hidden": [4, 4], "epochs": 50, "learning_rate": 0.01,
                 "momentum": 0.5, "batch_size": 8},
        "fcm": {"target": "price", "max_iters": 64, "eps": 1e-7}
    })");
    const auto config = config_from_json(j);
    CHECK(config.adequacy_threshold == 0.4);
    CHECK_FALSE(config.enable_fcm);
    CHECK(config.strict_adequacy);
    CHECK(config.aggregator_mode == AggregatorMode::anfis);
    CHECK(config.window.length == 6);
    CHECK(config.window.horizon == 2);
    CHECK(config.val_fraction == 0.3);
    CHECK(config.seed == 99);
    CHECK(config.mlp_hidden == std::vector<std::size_t>{4, 4});
    CHECK(config.mlp_epochs == 50);
    CHECK(config.fcm_target == "price");
    CHECK(config.fcm_max_iters == 64);
    CHECK_THROWS_AS(aggregator_mode_from_string("nope"), ValidationError);
}
