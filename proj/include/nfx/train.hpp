#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nfx/anfis.hpp"
#include "nfx/csv.hpp"
#include "nfx/dataset.hpp"
#include "nfx/errors.hpp"
#include "nfx/linalg.hpp"

namespace nfx::train {

struct TrainConfig {
    std::size_t max_epochs = 100;
    double target_rmse = 0.0;
    double learning_rate = 0.01;
    double lr_decay = 1.0;  // multiplicative, applied per epoch
    std::uint32_t seed = 0;

    void validate() const {
        if (max_epochs < 1) throw ValidationError("train: max_epochs must be >= 1");
        if (target_rmse < 0.0) throw ValidationError("train: target_rmse must be >= 0");
        if (!(learning_rate >= 0.0)) throw ValidationError("train: negative learning rate");
        if (!(lr_decay > 0.0 && lr_decay <= 1.0))
            throw ValidationError("train: lr_decay must be in (0,1]");
    }
};

enum class StopReason { target_reached, epoch_budget, stalled };

inline std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::target_reached: return "target-reached";
        case StopReason::epoch_budget: return "epoch-budget";
        default: return "stalled";
    }
}

struct TrainReport {
    std::vector<double> rmse_history;  // one entry per epoch (or iteration)
    double best_rmse = 0.0;
    StopReason stop_reason = StopReason::epoch_budget;
    int rank_warnings = 0;
};

inline void write_report_csv(const TrainReport& report, const std::string& path) {
    csv::Table table;
    table.header = {"epoch", "rmse"};
    for (std::size_t i = 0; i < report.rmse_history.size(); ++i)
        table.rows.push_back({std::to_string(i + 1), csv::fmt17(report.rmse_history[i])});
    csv::write_file(path, table);
}

inline nlohmann::json report_summary_json(const TrainReport& report) {
    return nlohmann::json{{"best_rmse", report.best_rmse},
                          {"epochs", report.rmse_history.size()},
                          {"stop_reason", to_string(report.stop_reason)}};
}

inline double evaluate_mse(const fuzzy::AnfisModel& model, const Dataset& data) {
    fuzzy::ForwardTrace trace;
    double se = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        fuzzy::forward_into(model, data.inputs[k], trace);
        const double e = trace.output - data.targets[k];
        se += e * e;
    }
    return se / static_cast<double>(data.size());
}

inline double evaluate_rmse(const fuzzy::AnfisModel& model, const Dataset& data) {
    return std::sqrt(evaluate_mse(model, data));
}

struct LseInfo {
    int rank_warnings = 0;
};

/// Stage one of the hybrid procedure: re-estimates every rule's consequent
/// coefficients by ridge least squares (lambda = 1e-8) over the design whose
/// row k concatenates, rule by rule, normalized_firing_i(x_k) * [1, x_k].
/// Antecedents are untouched. Should the ridge solution come out marginally
/// worse on the raw training MSE than the incoming coefficients (possible
/// only through the shrinkage term), the incoming ones are kept, so the
/// post-stage MSE never exceeds the pre-stage MSE.
inline fuzzy::AnfisModel lse_consequents(const fuzzy::AnfisModel& model, const Dataset& data,
                                         LseInfo* info = nullptr) {
    model.validate();
    data.validate();
    if (data.input_dim() != model.num_inputs())
        throw ValidationError("lse_consequents: dataset dimension mismatch");

    const std::size_t n = model.num_inputs();
    const std::size_t m = model.num_rules();
    const std::size_t width = m * (n + 1);

    linalg::Matrix design(data.size(), width);
    fuzzy::ForwardTrace trace;
    for (std::size_t k = 0; k < data.size(); ++k) {
        fuzzy::forward_into(model, data.inputs[k], trace);
        for (std::size_t r = 0; r < m; ++r) {
            const double wbar = trace.normalized[r];
            double* cell = &design.data()[k * width + r * (n + 1)];
            cell[0] = wbar;
            for (std::size_t j = 0; j < n; ++j) cell[j + 1] = wbar * data.inputs[k][j];
        }
    }

    int warnings = 0;
    auto coeffs = linalg::ridge_least_squares(design, data.targets, 1e-8, &warnings);
    if (info) info->rank_warnings = warnings;

    fuzzy::AnfisModel tuned = model;
    for (std::size_t r = 0; r < m; ++r)
        tuned.rules[r].consequent.assign(coeffs.begin() + r * (n + 1),
                                         coeffs.begin() + (r + 1) * (n + 1));

    if (evaluate_mse(tuned, data) > evaluate_mse(model, data)) return model;
    return tuned;
}

/// Exact analytic gradients of the training MSE with respect to every
/// antecedent membership parameter, in the flat `antecedent_params` order.
/// Returns {mse, gradients}. Samples whose firing strengths all underflow
/// contribute nothing: in that regime the output no longer depends on the
/// antecedents. Triangular kinks use the right one-sided derivative.
inline std::pair<double, std::vector<double>> loss_and_gradients(const fuzzy::AnfisModel& model,
                                                                 const Dataset& data) {
    model.validate();
    data.validate();
    if (data.input_dim() != model.num_inputs())
        throw ValidationError("loss_and_gradients: dataset dimension mismatch");

    const std::size_t n = model.num_inputs();
    const std::size_t m = model.num_rules();
    const auto refs = fuzzy::antecedent_param_refs(model);

    // Flat offset of each (variable, term) parameter block.
    std::vector<std::vector<std::size_t>> offset(n);
    {
        std::size_t k = 0;
        for (std::size_t v = 0; v < n; ++v) {
            offset[v].resize(model.variables[v].terms.size());
            for (std::size_t t = 0; t < model.variables[v].terms.size(); ++t) {
                offset[v][t] = k;
                k += fuzzy::param_count(model.variables[v].terms[t]);
            }
        }
    }

    std::vector<double> grad(refs.size(), 0.0);
    double se = 0.0;
    const auto count = static_cast<double>(data.size());

    fuzzy::ForwardTrace trace;
    std::vector<double> rule_values(m);
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto& x = data.inputs[k];
        fuzzy::forward_into(model, x, trace);
        const double err = trace.output - data.targets[k];
        se += err * err;
        if (trace.degenerate) continue;

        double total = 0.0;
        for (double w : trace.firing) total += w;
        for (std::size_t r = 0; r < m; ++r)
            rule_values[r] = model.rules[r].consequent_value(x);

        const double dloss = 2.0 * err / count;
        for (std::size_t r = 0; r < m; ++r) {
            const double dy_dw = (rule_values[r] - trace.output) / total;
            for (std::size_t v = 0; v < n; ++v) {
                // d w_r / d mu_(v,term) = product of the other factors.
                double others = 1.0;
                for (std::size_t u = 0; u < n; ++u)
                    if (u != v) others *= trace.memberships[u][model.rules[r].antecedent[u]];
                const std::size_t term = model.rules[r].antecedent[v];
                const auto& mf = model.variables[v].terms[term];
                const auto mf_grad = fuzzy::param_gradients(mf, x[v]);
                const double base = dloss * dy_dw * others;
                const std::size_t off = offset[v][term];
                for (std::size_t i = 0; i < fuzzy::param_count(mf); ++i)
                    grad[off + i] += base * mf_grad[i];
            }
        }
    }
    return {se / count, std::move(grad)};
}

struct EpochResult {
    fuzzy::AnfisModel model;   // after both stages
    fuzzy::AnfisModel tuned;   // after the LSE stage only
    double rmse = 0.0;         // training RMSE measured after LSE, before the step
    double mse_before = 0.0;   // training MSE entering the epoch
    double mse_after = 0.0;    // training MSE right after the LSE stage
    int rank_warnings = 0;
};

/// One two-stage pass: least squares on the consequents, then a single
/// gradient step of size `learning_rate` on the antecedent parameters,
/// clamped back into the membership invariants.
inline EpochResult hybrid_epoch(const fuzzy::AnfisModel& model, const Dataset& data,
                                const TrainConfig& config) {
    config.validate();
    EpochResult result;
    result.mse_before = evaluate_mse(model, data);

    LseInfo info;
    result.tuned = lse_consequents(model, data, &info);
    result.rank_warnings = info.rank_warnings;
    result.mse_after = evaluate_mse(result.tuned, data);
    result.rmse = std::sqrt(result.mse_after);

    result.model = result.tuned;
    if (config.learning_rate > 0.0) {
        auto [mse, grad] = loss_and_gradients(result.tuned, data);
        (void)mse;
        auto params = fuzzy::antecedent_params(result.tuned);
        for (std::size_t i = 0; i < params.size(); ++i)
            params[i] -= config.learning_rate * grad[i];
        fuzzy::set_antecedent_params(result.model, params);
    }
    return result;
}

/// Full hybrid training loop. The learning rate decays multiplicatively per
/// epoch; the reported model is the best post-LSE model seen, not the last.
/// Stops on target RMSE, the epoch budget, or 10 epochs without an
/// improvement of at least 1e-9.
inline std::pair<fuzzy::AnfisModel, TrainReport> train_hybrid(const fuzzy::AnfisModel& model,
                                                              const Dataset& data,
                                                              const TrainConfig& config) {
    config.validate();
    TrainReport report;
    fuzzy::AnfisModel current = model;
    fuzzy::AnfisModel best = model;
    double best_rmse = std::numeric_limits<double>::infinity();
    std::size_t epochs_since_improvement = 0;
    double lr = config.learning_rate;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        TrainConfig step = config;
        step.learning_rate = lr;
        auto outcome = hybrid_epoch(current, data, step);
        report.rmse_history.push_back(outcome.rmse);
        report.rank_warnings += outcome.rank_warnings;

        if (outcome.rmse < best_rmse - 1e-9) {
            epochs_since_improvement = 0;
        } else {
            ++epochs_since_improvement;
        }
        if (outcome.rmse < best_rmse) {
            best_rmse = outcome.rmse;
            best = outcome.tuned;
        }

        if (outcome.rmse <= config.target_rmse) {
            report.stop_reason = StopReason::target_reached;
            break;
        }
        if (epochs_since_improvement >= 10) {
            report.stop_reason = StopReason::stalled;
            break;
        }
        report.stop_reason = StopReason::epoch_budget;
        current = std::move(outcome.model);
        lr *= config.lr_decay;
    }

    report.best_rmse = best_rmse;
    return {std::move(best), std::move(report)};
}

namespace detail {

/// Fitness of an antecedent candidate: training RMSE after the consequents
/// are re-fit by least squares on the instantiated model.
inline double anfis_candidate_rmse(const fuzzy::AnfisModel& tmpl,
                                   std::span<const double> antecedents,
                                   const Dataset& data) {
    fuzzy::AnfisModel candidate = tmpl;
    fuzzy::set_antecedent_params(candidate, antecedents);
    return evaluate_rmse(lse_consequents(candidate, data), data);
}

}  // namespace detail

/// Search box per antecedent parameter for the metaheuristic trainers:
/// position-like parameters (centers, triangular vertices) range over an
/// interval 1.5x the observed input range, width-like ones over
/// [1e-3, 1] x range, bell slopes over [0.1, 10].
inline std::vector<std::pair<double, double>> antecedent_bounds(const fuzzy::AnfisModel& model,
                                                                const Dataset& data) {
    data.validate();
    if (data.input_dim() != model.num_inputs())
        throw ValidationError("antecedent_bounds: dataset dimension mismatch");

    std::vector<std::pair<double, double>> column_range(model.num_inputs());
    for (std::size_t v = 0; v < model.num_inputs(); ++v) {
        double lo = data.inputs[0][v], hi = data.inputs[0][v];
        for (const auto& row : data.inputs) {
            lo = std::min(lo, row[v]);
            hi = std::max(hi, row[v]);
        }
        if (!(hi > lo))
            throw ValidationError("antecedent_bounds: input column " + std::to_string(v)
                                  + " is constant");
        column_range[v] = {lo, hi};
    }

    std::vector<std::pair<double, double>> bounds;
    for (const auto& ref : fuzzy::antecedent_param_refs(model)) {
        const auto [lo, hi] = column_range[ref.variable];
        const double mid = (lo + hi) / 2.0;
        const double range = hi - lo;
        const auto& mf = model.variables[ref.variable].terms[ref.term];
        const std::pair<double, double> center_box{mid - 0.75 * range, mid + 0.75 * range};
        const std::pair<double, double> width_box{1e-3 * range, range};
        if (std::holds_alternative<fuzzy::Gaussian>(mf)) {
            bounds.push_back(ref.index == 0 ? center_box : width_box);
        } else if (std::holds_alternative<fuzzy::GeneralizedBell>(mf)) {
            if (ref.index == 0)
                bounds.push_back(width_box);
            else if (ref.index == 1)
                bounds.push_back({0.1, 10.0});
            else
                bounds.push_back(center_box);
        } else {
            bounds.push_back(center_box);
        }
    }
    return bounds;
}

}  // namespace nfx::train
