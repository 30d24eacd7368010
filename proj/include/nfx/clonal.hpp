#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nfx/anfis.hpp"
#include "nfx/dataset.hpp"
#include "nfx/errors.hpp"
#include "nfx/train.hpp"

namespace nfx::train {

struct ClonalConfig {
    std::size_t population_size = 20;
    std::size_t generations = 60;
    double clone_factor = 0.5;        // beta
    std::size_t selection_count = 5;
    double mutation_scale = 0.15;
    double replacement_fraction = 0.1;
    std::uint32_t seed = 0;

    void validate() const {
        if (population_size < 2) throw ValidationError("clonal: population_size must be >= 2");
        if (!(clone_factor > 0.0)) throw ValidationError("clonal: clone_factor must be > 0");
        if (selection_count < 1 || selection_count > population_size)
            throw ValidationError("clonal: selection_count must be in [1, population]");
        if (!(mutation_scale > 0.0)) throw ValidationError("clonal: mutation_scale must be > 0");
        if (replacement_fraction < 0.0 || replacement_fraction >= 1.0)
            throw ValidationError("clonal: replacement_fraction must be in [0,1)");
    }
};

/// Affinity of an antibody against the training antigens; strictly
/// decreasing in the post-LSE training RMSE.
inline double affinity_from_rmse(double rmse) { return 1.0 / (1.0 + rmse); }

/// Clonal-selection tuning of the antecedent parameters: antibodies are
/// antecedent vectors, the antigen is the training set. Each generation the
/// fittest antibodies are cloned in proportion to their rank, the clones are
/// hypermutated with noise that shrinks as affinity grows, every lineage
/// keeps its best member, and the weakest fraction of the population is
/// replaced with fresh random antibodies. The global best is never lost.
inline std::pair<fuzzy::AnfisModel, TrainReport> train_clonal(const fuzzy::AnfisModel& tmpl,
                                                              const Dataset& data,
                                                              const ClonalConfig& config) {
    tmpl.validate();
    config.validate();
    const auto bounds = antecedent_bounds(tmpl, data);
    const std::size_t dims = bounds.size();
    const std::size_t count = config.population_size;

    std::mt19937 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_antibody = [&] {
        std::vector<double> p(dims);
        for (std::size_t d = 0; d < dims; ++d)
            p[d] = bounds[d].first + unit(rng) * (bounds[d].second - bounds[d].first);
        return p;
    };

    auto rmse_of = [&](const std::vector<double>& antibody) {
        return detail::anfis_candidate_rmse(tmpl, antibody, data);
    };

    std::vector<std::vector<double>> population(count);
    std::vector<double> rmse(count);
    population[0] = fuzzy::antecedent_params(tmpl);
    for (std::size_t d = 0; d < dims; ++d)
        population[0][d] = std::clamp(population[0][d], bounds[d].first, bounds[d].second);
    for (std::size_t i = 1; i < count; ++i) population[i] = random_antibody();
    for (std::size_t i = 0; i < count; ++i) rmse[i] = rmse_of(population[i]);

    auto best_index = [&] {
        std::size_t b = 0;
        for (std::size_t i = 1; i < count; ++i)
            if (rmse[i] < rmse[b]) b = i;
        return b;
    };

    TrainReport report;
    report.rmse_history.push_back(rmse[best_index()]);

    for (std::size_t gen = 0; gen < config.generations; ++gen) {
        // Rank 1 = highest affinity = lowest RMSE; ties broken by index.
        std::vector<std::size_t> order(count);
        for (std::size_t i = 0; i < count; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return rmse[a] < rmse[b]; });

        double aff_min = affinity_from_rmse(rmse[order[count - 1]]);
        double aff_max = affinity_from_rmse(rmse[order[0]]);
        auto normalized_affinity = [&](double r) {
            if (!(aff_max > aff_min)) return 1.0;
            return (affinity_from_rmse(r) - aff_min) / (aff_max - aff_min);
        };

        for (std::size_t s = 0; s < config.selection_count; ++s) {
            const std::size_t idx = order[s];
            const std::size_t rank = s + 1;
            const auto clones = static_cast<std::size_t>(
                std::ceil(config.clone_factor * static_cast<double>(count)
                          / static_cast<double>(rank)));
            const double scale = config.mutation_scale * (1.0 - normalized_affinity(rmse[idx]));

            std::vector<double> lineage_best = population[idx];
            double lineage_rmse = rmse[idx];
            for (std::size_t c = 0; c < clones; ++c) {
                std::vector<double> clone = population[idx];
                for (std::size_t d = 0; d < dims; ++d) {
                    const double width = bounds[d].second - bounds[d].first;
                    clone[d] = std::clamp(clone[d] + gauss(rng) * scale * width,
                                          bounds[d].first, bounds[d].second);
                }
                const double clone_rmse = rmse_of(clone);
                if (clone_rmse < lineage_rmse) {
                    lineage_rmse = clone_rmse;
                    lineage_best = std::move(clone);
                }
            }
            population[idx] = std::move(lineage_best);
            rmse[idx] = lineage_rmse;
        }

        // Replace the weakest antibodies, never the global best.
        const auto replaced = static_cast<std::size_t>(
            std::floor(config.replacement_fraction * static_cast<double>(count)));
        if (replaced > 0) {
            std::vector<std::size_t> by_rmse(count);
            for (std::size_t i = 0; i < count; ++i) by_rmse[i] = i;
            std::stable_sort(by_rmse.begin(), by_rmse.end(),
                             [&](std::size_t a, std::size_t b) { return rmse[a] > rmse[b]; });
            const std::size_t best = best_index();
            std::size_t done = 0;
            for (std::size_t w = 0; w < count && done < replaced; ++w) {
                const std::size_t i = by_rmse[w];
                if (i == best) continue;
                population[i] = random_antibody();
                rmse[i] = rmse_of(population[i]);
                ++done;
            }
        }

        report.rmse_history.push_back(rmse[best_index()]);
    }

    const std::size_t best = best_index();
    report.best_rmse = *std::min_element(report.rmse_history.begin(), report.rmse_history.end());
    report.stop_reason = StopReason::epoch_budget;

    fuzzy::AnfisModel model = tmpl;
    fuzzy::set_antecedent_params(model, population[best]);
    LseInfo info;
    model = lse_consequents(model, data, &info);
    report.rank_warnings = info.rank_warnings;
    return {std::move(model), std::move(report)};
}

}  // namespace nfx::train
