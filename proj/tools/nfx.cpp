// Command-line front end for the forecasting toolkit.
//
// Exit codes: 0 success (including degraded pipeline runs), 1 usage error,
// 2 data/validation error, 3 every pipeline branch failed.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nfx/nfx.hpp"
#include "nfx/version.hpp"

namespace {

bool g_quiet = false;

void say(const std::string& line) {
    if (!g_quiet) std::cout << line << "\n";
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw nfx::ValidationError("cannot open file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw nfx::ValidationError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw nfx::ValidationError("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

nfx::pipeline::EventList load_events_file(const std::string& path) {
    const auto j = load_json_file(path);
    if (!j.is_object())
        throw nfx::ValidationError("events file must be a JSON object of concept: intensity");
    nfx::pipeline::EventList events;
    for (const auto& [name, value] : j.items()) {
        if (!value.is_number())
            throw nfx::ValidationError("event intensity for \"" + name + "\" is not a number");
        events.emplace_back(name, value.get<double>());
    }
    return events;
}

struct SeriesOptions {
    std::string path;
    std::string time_column = "t";
    std::string value_column = "value";

    nfx::ts::TimeSeries load() const {
        return nfx::ts::load_csv(path, time_column, value_column);
    }
};

void add_series_options(CLI::App* cmd, SeriesOptions& opts) {
    cmd->add_option("--data", opts.path, "input series CSV")->required();
    cmd->add_option("--time-col", opts.time_column, "timestamp column name");
    cmd->add_option("--value-col", opts.value_column, "value column name");
}

std::vector<nfx::ts::CompareSpec> parse_model_list(const std::string& list,
                                                   std::size_t iterations,
                                                   std::uint32_t seed) {
    std::vector<nfx::ts::CompareSpec> specs;
    std::string token;
    std::istringstream in(list);
    while (std::getline(in, token, ',')) {
        if (token.empty()) continue;
        nfx::ts::CompareSpec spec;
        spec.model = token;
        spec.iterations = iterations;
        spec.seed = seed;
        specs.push_back(std::move(spec));
    }
    if (specs.empty()) throw nfx::ValidationError("no models given");
    return specs;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"nfx - hybrid neuro-fuzzy time-series forecasting toolkit"};
    app.require_subcommand(1);
    std::uint32_t global_seed = 0;
    app.add_option("--seed", global_seed, "default seed for all subcommands");
    app.add_flag("--quiet", g_quiet, "suppress informational output");
    app.set_version_flag("--version", nfx::kVersion);

    // --- synth ---------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark series");
    std::string synth_kind = "mackey-glass";
    std::size_t synth_n = 1000;
    double synth_noise = 0.05;
    std::uint32_t synth_seed = 0;
    std::string synth_out;
    synth->add_option("--kind", synth_kind, "mackey-glass | sine")
        ->check(CLI::IsMember({"mackey-glass", "sine"}));
    synth->add_option("--n", synth_n, "number of samples");
    synth->add_option("--noise", synth_noise, "noise sigma (sine only)");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output CSV path")->required();
    synth->callback([&] {
        if (!synth->count("--seed")) synth_seed = global_seed;
        const auto series = synth_kind == "mackey-glass"
                                ? nfx::ts::synth_mackey_glass(synth_n, synth_seed)
                                : nfx::ts::synth_sine_noise(synth_n, synth_noise, synth_seed);
        nfx::ts::save_csv(synth_out, series);
        say("wrote " + std::to_string(series.size()) + " samples to " + synth_out);
    });

    // --- train-anfis -----------------------------------------------------
    auto* train_anfis = app.add_subcommand("train-anfis", "train an ANFIS forecaster");
    SeriesOptions ta_series;
    add_series_options(train_anfis, ta_series);
    std::size_t ta_terms = 2;
    std::string ta_trainer = "hybrid";
    std::size_t ta_epochs = 100;
    std::uint32_t ta_seed = 0;
    double ta_lr = 0.01;
    double ta_target = 0.0;
    std::size_t ta_window = 4, ta_horizon = 1;
    std::string ta_out, ta_report_csv, ta_report_json;
    train_anfis->add_option("--terms", ta_terms, "membership terms per input");
    train_anfis->add_option("--trainer", ta_trainer, "hybrid | pso | clonal")
        ->check(CLI::IsMember({"hybrid", "pso", "clonal"}));
    train_anfis->add_option("--epochs", ta_epochs, "epochs / iterations / generations");
    train_anfis->add_option("--seed", ta_seed, "trainer seed");
    train_anfis->add_option("--learning-rate", ta_lr, "hybrid gradient step size");
    train_anfis->add_option("--target-rmse", ta_target, "early-stop RMSE target");
    train_anfis->add_option("--window", ta_window, "lag window length");
    train_anfis->add_option("--horizon", ta_horizon, "forecast horizon");
    train_anfis->add_option("--out", ta_out, "output model JSON")->required();
    train_anfis->add_option("--report-csv", ta_report_csv, "per-epoch RMSE CSV");
    train_anfis->add_option("--report-json", ta_report_json, "training summary JSON");
    train_anfis->callback([&] {
        if (!train_anfis->count("--seed")) ta_seed = global_seed;
        const auto series = ta_series.load();
        const auto data =
            nfx::ts::make_windows(series, nfx::WindowSpec{ta_window, ta_horizon});
        const auto base = nfx::fuzzy::init_from_data(
            data, std::vector<std::size_t>(data.input_dim(), ta_terms));

        nfx::fuzzy::AnfisModel model;
        nfx::train::TrainReport report;
        if (ta_trainer == "hybrid") {
            nfx::train::TrainConfig config;
            config.max_epochs = ta_epochs;
            config.learning_rate = ta_lr;
            config.lr_decay = 0.98;
            config.target_rmse = ta_target;
            config.seed = ta_seed;
            std::tie(model, report) = nfx::train::train_hybrid(base, data, config);
        } else if (ta_trainer == "pso") {
            nfx::train::PsoConfig config;
            config.max_iters = ta_epochs;
            config.seed = ta_seed;
            std::tie(model, report) = nfx::train::train_pso_lse(base, data, config);
        } else {
            nfx::train::ClonalConfig config;
            config.generations = ta_epochs;
            config.seed = ta_seed;
            std::tie(model, report) = nfx::train::train_clonal(base, data, config);
        }

        auto j = nfx::fuzzy::to_json(model);
        j["window"] = {{"length", ta_window}, {"horizon", ta_horizon}};
        write_json_file(ta_out, j);
        if (!ta_report_csv.empty()) nfx::train::write_report_csv(report, ta_report_csv);
        if (!ta_report_json.empty())
            write_json_file(ta_report_json, nfx::train::report_summary_json(report));
        say("trained " + ta_trainer + " ANFIS: best rmse "
            + nfx::csv::fmt17(report.best_rmse) + " ("
            + nfx::train::to_string(report.stop_reason) + "), model -> " + ta_out);
    });

    // --- train-mlp -------------------------------------------------------
    auto* train_mlp = app.add_subcommand("train-mlp", "train the MLP forecaster");
    SeriesOptions tm_series;
    add_series_options(train_mlp, tm_series);
    std::vector<std::size_t> tm_hidden{8};
    std::size_t tm_epochs = 200;
    std::uint32_t tm_seed = 0;
    double tm_lr = 0.05, tm_momentum = 0.9, tm_corruption = 0.0;
    std::size_t tm_batch = 16, tm_pretrain = 0;
    std::size_t tm_window = 4, tm_horizon = 1;
    std::string tm_out, tm_history_csv;
    train_mlp->add_option("--hidden", tm_hidden, "hidden layer sizes");
    train_mlp->add_option("--epochs", tm_epochs, "training epochs");
    train_mlp->add_option("--seed", tm_seed, "init/shuffle seed");
    train_mlp->add_option("--learning-rate", tm_lr, "SGD learning rate");
    train_mlp->add_option("--momentum", tm_momentum, "SGD momentum");
    train_mlp->add_option("--batch", tm_batch, "mini-batch size");
    train_mlp->add_option("--pretrain-epochs", tm_pretrain,
                          "autoencoder pretraining epochs per hidden layer");
    train_mlp->add_option("--corruption", tm_corruption, "masking noise probability");
    train_mlp->add_option("--window", tm_window, "lag window length");
    train_mlp->add_option("--horizon", tm_horizon, "forecast horizon");
    train_mlp->add_option("--out", tm_out, "output model JSON")->required();
    train_mlp->add_option("--history-csv", tm_history_csv, "per-epoch loss CSV");
    train_mlp->callback([&] {
        if (!train_mlp->count("--seed")) tm_seed = global_seed;
        const auto series = tm_series.load();
        const auto raw =
            nfx::ts::make_windows(series, nfx::WindowSpec{tm_window, tm_horizon});
        std::vector<double> pool;
        for (const auto& row : raw.inputs) pool.insert(pool.end(), row.begin(), row.end());
        pool.insert(pool.end(), raw.targets.begin(), raw.targets.end());
        const auto norm = nfx::ts::fit_normalization(pool, nfx::NormKind::min_max);
        const auto data = nfx::ts::apply_normalization(raw, norm);
        const auto train_set = nfx::mlp::to_trainset(data);

        std::vector<std::size_t> sizes{tm_window};
        sizes.insert(sizes.end(), tm_hidden.begin(), tm_hidden.end());
        sizes.push_back(1);

        nfx::mlp::MlpModel net;
        if (tm_pretrain > 0) {
            nfx::mlp::AeConfig ae;
            ae.epochs_per_layer = tm_pretrain;
            ae.corruption = tm_corruption;
            net = nfx::mlp::pretrain_stacked_autoencoders(sizes, nfx::mlp::Activation::tanh,
                                                          train_set.inputs, ae, tm_seed);
        } else {
            net = nfx::mlp::mlp_init(sizes, nfx::mlp::Activation::tanh, tm_seed);
        }

        nfx::mlp::SgdConfig sgd;
        sgd.learning_rate = tm_lr;
        sgd.momentum = tm_momentum;
        sgd.batch_size = tm_batch;
        sgd.epochs = tm_epochs;
        sgd.seed = tm_seed;
        auto [trained, history] = nfx::mlp::sgd_train(std::move(net), train_set, sgd);

        auto j = nfx::mlp::to_json(trained);
        j["normalization"] = {{"kind", nfx::to_string(norm.kind)},
                              {"lo", norm.lo},
                              {"hi", norm.hi}};
        j["window"] = {{"length", tm_window}, {"horizon", tm_horizon}};
        write_json_file(tm_out, j);
        if (!tm_history_csv.empty()) {
            nfx::csv::Table table;
            table.header = {"epoch", "mse"};
            for (std::size_t i = 0; i < history.size(); ++i)
                table.rows.push_back({std::to_string(i + 1), nfx::csv::fmt17(history[i])});
            nfx::csv::write_file(tm_history_csv, table);
        }
        say("trained MLP: final mse " + nfx::csv::fmt17(history.back()) + ", model -> "
            + tm_out);
    });

    // --- fcm-learn -------------------------------------------------------
    auto* fcm_learn = app.add_subcommand("fcm-learn",
                                         "learn concept-map weights from transitions");
    std::string fl_transitions, fl_out, fl_concepts;
    nfx::fcm::GaConfig fl_config;
    double fl_lambda = 1.0, fl_k_self = 1.0;
    fcm_learn->add_option("--transitions", fl_transitions, "state transitions CSV")
        ->required();
    fcm_learn->add_option("--concepts", fl_concepts,
                          "comma list of concept names (overrides the CSV header)");
    fcm_learn->add_option("--out", fl_out, "output map JSON")->required();
    fcm_learn->add_option("--population", fl_config.population_size, "GA population");
    fcm_learn->add_option("--generations", fl_config.generations, "GA generations");
    fcm_learn->add_option("--tournament", fl_config.tournament_size, "tournament size");
    fcm_learn->add_option("--crossover-rate", fl_config.crossover_rate, "crossover rate");
    fcm_learn->add_option("--mutation-sigma", fl_config.mutation_sigma, "mutation sigma");
    fcm_learn->add_option("--elitism", fl_config.elitism_count, "elites kept per generation");
    fcm_learn->add_option("--seed", fl_config.seed, "GA seed");
    fcm_learn->add_option("--lambda", fl_lambda, "steepness stored in the output map");
    fcm_learn->add_option("--k-self", fl_k_self, "self-memory stored in the output map");
    fcm_learn->callback([&] {
        if (!fcm_learn->count("--seed")) fl_config.seed = global_seed;
        auto [concepts, data] = nfx::fcm::load_transitions_csv(fl_transitions);
        if (!fl_concepts.empty()) {
            std::vector<std::string> names;
            std::istringstream in(fl_concepts);
            std::string token;
            while (std::getline(in, token, ','))
                if (!token.empty()) names.push_back(token);
            if (names.size() != concepts.size())
                throw nfx::ValidationError("--concepts lists " + std::to_string(names.size())
                                           + " names, the CSV has "
                                           + std::to_string(concepts.size()) + " columns");
            concepts = std::move(names);
        }
        auto map = nfx::fcm::ga_learn(concepts, data, fl_config);
        map.steepness = fl_lambda;
        map.self_memory = fl_k_self;
        map.validate();
        write_json_file(fl_out, nfx::fcm::to_json(map));
        say("learned map over " + std::to_string(concepts.size()) + " concepts -> " + fl_out);
    });

    // --- pipeline-run ----------------------------------------------------
    auto* pipeline_run = app.add_subcommand("pipeline-run", "run the modular forecast");
    SeriesOptions pr_series;
    add_series_options(pipeline_run, pr_series);
    std::string pr_events, pr_config, pr_out;
    pipeline_run->add_option("--events", pr_events, "events JSON (concept: intensity)")
        ->required();
    pipeline_run->add_option("--config", pr_config, "pipeline config JSON")->required();
    pipeline_run->add_option("--out", pr_out, "output report JSON")->required();
    pipeline_run->callback([&] {
        const auto series = pr_series.load();
        const auto config_doc = load_json_file(pr_config);
        auto config = nfx::pipeline::config_from_json(config_doc);
        if (app.count("--seed")) config.seed = global_seed;

        if (config_doc.contains("fcm") && config_doc.at("fcm").contains("map_path"))
            config.fcm_map = nfx::fcm::map_from_json(
                load_json_file(config_doc.at("fcm").at("map_path").get<std::string>()));
        if (config_doc.contains("aggregator_path"))
            config.aggregator = nfx::pipeline::aggregator_from_json(
                load_json_file(config_doc.at("aggregator_path").get<std::string>()));

        const std::string events_path = pr_events;
        const auto report = nfx::pipeline::run_pipeline(
            series, [events_path] { return load_events_file(events_path); }, config);
        write_json_file(pr_out, nfx::pipeline::to_json(report));
        say(std::string("pipeline finished") + (report.degraded ? " (degraded)" : "")
            + ", final forecast " + nfx::csv::fmt17(report.final_forecast) + " -> " + pr_out);
        if (report.degraded && !g_quiet) {
            if (!report.dl_error.empty()) std::cerr << "dl branch: " << report.dl_error << "\n";
            if (!report.fcm_error.empty())
                std::cerr << "fcm branch: " << report.fcm_error << "\n";
        }
    });

    // --- compare ---------------------------------------------------------
    auto* compare = app.add_subcommand("compare", "train and score several model kinds");
    SeriesOptions cp_series;
    add_series_options(compare, cp_series);
    std::string cp_models = "ols,anfis-hybrid";
    std::string cp_out;
    std::size_t cp_epochs = 100;
    std::uint32_t cp_seed = 0;
    std::size_t cp_window = 4, cp_horizon = 1;
    compare->add_option("--models", cp_models,
                        "comma list of ols|mlp|anfis-hybrid|anfis-pso|anfis-clonal");
    compare->add_option("--epochs", cp_epochs, "budget per model");
    compare->add_option("--seed", cp_seed, "seed per model");
    compare->add_option("--window", cp_window, "lag window length");
    compare->add_option("--horizon", cp_horizon, "forecast horizon");
    compare->add_option("--out", cp_out, "output CSV path");
    compare->callback([&] {
        if (!compare->count("--seed")) cp_seed = global_seed;
        const auto series = cp_series.load();
        const auto data =
            nfx::ts::make_windows(series, nfx::WindowSpec{cp_window, cp_horizon});
        const auto split = nfx::ts::split_chrono(data, 0.6, 0.2, 0.2);
        const auto rows = nfx::ts::compare(split.train, split.test,
                                           parse_model_list(cp_models, cp_epochs, cp_seed));
        std::cout << nfx::ts::render_compare_table(rows);
        if (!cp_out.empty()) nfx::ts::write_compare_csv(cp_out, rows);
        for (const auto& row : rows)
            if (!row.rmse && !g_quiet)
                std::cerr << row.model << " failed: " << row.error << "\n";
    });

    // --- evaluate --------------------------------------------------------
    auto* evaluate = app.add_subcommand("evaluate", "score a stored model on a series");
    SeriesOptions ev_series;
    add_series_options(evaluate, ev_series);
    std::string ev_model;
    evaluate->add_option("--model", ev_model, "model JSON from train-anfis or train-mlp")
        ->required();
    evaluate->callback([&] {
        const auto series = ev_series.load();
        const auto doc = load_json_file(ev_model);
        nfx::WindowSpec window;
        if (doc.contains("window")) {
            window.length = doc.at("window").value("length", window.length);
            window.horizon = doc.at("window").value("horizon", window.horizon);
        }
        const auto data = nfx::ts::make_windows(series, window);

        std::vector<double> predicted;
        predicted.reserve(data.size());
        if (doc.contains("rules")) {
            const auto model = nfx::fuzzy::model_from_json(doc);
            for (const auto& x : data.inputs)
                predicted.push_back(nfx::fuzzy::predict(model, x));
        } else if (doc.contains("sizes")) {
            const auto model = nfx::mlp::mlp_from_json(doc);
            nfx::NormalizationParams norm;
            if (doc.contains("normalization")) {
                norm.lo = doc.at("normalization").value("lo", 0.0);
                norm.hi = doc.at("normalization").value("hi", 1.0);
            }
            for (const auto& row : data.inputs) {
                std::vector<double> x(row.size());
                for (std::size_t i = 0; i < row.size(); ++i) x[i] = norm.apply(row[i]);
                predicted.push_back(norm.invert(nfx::mlp::mlp_predict_scalar(model, x)));
            }
        } else {
            throw nfx::ValidationError("unrecognized model file: " + ev_model);
        }

        const auto report = nfx::ts::metrics(predicted, data.targets);
        std::cout << "rmse " << nfx::csv::fmt17(report.rmse) << "\n";
        std::cout << "mae " << nfx::csv::fmt17(report.mae) << "\n";
        if (report.mape)
            std::cout << "mape " << nfx::csv::fmt17(*report.mape) << "\n";
        else
            std::cout << "mape n/a (zero actuals)\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage problems map to exit 1
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const nfx::PipelineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
