#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nfx/anfis.hpp"
#include "nfx/baselines.hpp"
#include "nfx/clonal.hpp"
#include "nfx/csv.hpp"
#include "nfx/dataset.hpp"
#include "nfx/errors.hpp"
#include "nfx/mlp.hpp"
#include "nfx/pso.hpp"
#include "nfx/timeseries.hpp"
#include "nfx/train.hpp"

namespace nfx::ts {

struct CompareSpec {
    std::string model;  // ols | mlp | anfis-hybrid | anfis-pso | anfis-clonal
    std::size_t anfis_terms = 2;
    std::size_t iterations = 100;  // epochs / swarm iterations / generations
    std::vector<std::size_t> mlp_hidden{8};
    std::uint32_t seed = 0;
};

struct CompareRow {
    std::string model;
    std::optional<std::size_t> rules;  // n/a for the non-fuzzy models
    std::size_t iterations = 0;
    std::optional<double> rmse;  // absent when the model failed to train
    std::string error;
};

namespace detail {

inline CompareRow run_compare_spec(const CompareSpec& spec, const Dataset& train,
                                   const Dataset& test) {
    CompareRow row;
    row.model = spec.model;
    row.iterations = spec.iterations;

    if (spec.model == "ols") {
        row.iterations = 1;
        const auto model = ols_baseline(train);
        row.rmse = rmse(predict_ols(model, test), test.targets);
        return row;
    }
    if (spec.model == "mlp") {
        std::vector<double> pool;
        for (const auto& r : train.inputs) pool.insert(pool.end(), r.begin(), r.end());
        pool.insert(pool.end(), train.targets.begin(), train.targets.end());
        const auto norm = fit_normalization(pool, NormKind::min_max);

        std::vector<std::size_t> sizes{train.input_dim()};
        for (std::size_t h : spec.mlp_hidden) sizes.push_back(h);
        sizes.push_back(1);
        mlp::SgdConfig sgd;
        sgd.epochs = spec.iterations;
        sgd.learning_rate = 0.05;
        sgd.momentum = 0.9;
        sgd.batch_size = 16;
        sgd.seed = spec.seed;
        auto [net, history] = mlp::sgd_train(
            mlp::mlp_init(sizes, mlp::Activation::tanh, spec.seed),
            mlp::to_trainset(apply_normalization(train, norm)), sgd);
        row.iterations = history.size();

        std::vector<double> predicted;
        predicted.reserve(test.size());
        for (const auto& r : test.inputs) {
            std::vector<double> x(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) x[i] = norm.apply(r[i]);
            predicted.push_back(norm.invert(mlp::mlp_predict_scalar(net, x)));
        }
        row.rmse = rmse(predicted, test.targets);
        return row;
    }

    const auto base = fuzzy::init_from_data(
        train, std::vector<std::size_t>(train.input_dim(), spec.anfis_terms));
    row.rules = base.num_rules();

    fuzzy::AnfisModel trained;
    if (spec.model == "anfis-hybrid") {
        train::TrainConfig config;
        config.max_epochs = spec.iterations;
        config.learning_rate = 0.01;
        config.lr_decay = 0.98;
        config.seed = spec.seed;
        auto [model, report] = train::train_hybrid(base, train, config);
        trained = std::move(model);
        row.iterations = report.rmse_history.size();
    } else if (spec.model == "anfis-pso") {
        train::PsoConfig config;
        config.max_iters = spec.iterations;
        config.seed = spec.seed;
        auto [model, report] = train::train_pso_lse(base, train, config);
        trained = std::move(model);
        row.iterations = report.rmse_history.size() - 1;
    } else if (spec.model == "anfis-clonal") {
        train::ClonalConfig config;
        config.generations = spec.iterations;
        config.seed = spec.seed;
        auto [model, report] = train::train_clonal(base, train, config);
        trained = std::move(model);
        row.iterations = report.rmse_history.size() - 1;
    } else {
        throw ValidationError("unknown model spec: " + spec.model);
    }

    std::vector<double> predicted;
    predicted.reserve(test.size());
    for (const auto& x : test.inputs) predicted.push_back(fuzzy::predict(trained, x));
    row.rmse = rmse(predicted, test.targets);
    return row;
}

}  // namespace detail

/// Trains every spec on the train split and scores it on the test split.
/// A model that throws becomes a FAILED row; the other rows are unaffected.
inline std::vector<CompareRow> compare(const Dataset& train, const Dataset& test,
                                       const std::vector<CompareSpec>& specs) {
    if (specs.empty()) throw ValidationError("compare: no model specs");
    train.validate();
    test.validate();
    std::vector<CompareRow> rows;
    rows.reserve(specs.size());
    for (const auto& spec : specs) {
        try {
            rows.push_back(detail::run_compare_spec(spec, train, test));
        } catch (const std::exception& e) {
            CompareRow row;
            row.model = spec.model;
            row.error = e.what();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline std::string render_compare_table(const std::vector<CompareRow>& rows) {
    std::vector<std::array<std::string, 4>> cells;
    cells.push_back({"MODEL", "RULES", "ITERATIONS", "RMSE"});
    for (const auto& row : rows) {
        cells.push_back({row.model, row.rules ? std::to_string(*row.rules) : "n/a",
                         std::to_string(row.iterations),
                         row.rmse ? csv::fmt17(*row.rmse) : "FAILED"});
    }
    std::array<std::size_t, 4> width{};
    for (const auto& line : cells)
        for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], line[c].size());

    std::ostringstream out;
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < 4; ++c) {
            out << line[c];
            if (c + 1 < 4) out << std::string(width[c] - line[c].size() + 2, ' ');
        }
        out << '\n';
    }
    return out.str();
}

inline void write_compare_csv(const std::string& path, const std::vector<CompareRow>& rows) {
    csv::Table table;
    table.header = {"MODEL", "RULES", "ITERATIONS", "RMSE"};
    for (const auto& row : rows)
        table.rows.push_back({row.model, row.rules ? std::to_string(*row.rules) : "n/a",
                              std::to_string(row.iterations),
                              row.rmse ? csv::fmt17(*row.rmse) : "FAILED"});
    csv::write_file(path, table);
}

}  // namespace nfx::ts
