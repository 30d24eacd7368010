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

struct PsoConfig {
    std::size_t swarm_size = 20;
    std::size_t max_iters = 60;
    double inertia_min = 0.4;
    double inertia_max = 0.9;
    double cognitive = 1.49445;  // c1
    double social = 1.49445;     // c2
    double diversity_threshold = 0.05;
    std::uint32_t seed = 0;

    void validate() const {
        if (swarm_size < 2) throw ValidationError("pso: swarm_size must be >= 2");
        if (!(inertia_min <= inertia_max))
            throw ValidationError("pso: inertia_min must be <= inertia_max");
        if (diversity_threshold < 0.0)
            throw ValidationError("pso: diversity_threshold must be >= 0");
    }
};

namespace detail {

/// Mean distance of the particles to their centroid, measured in
/// box-normalized coordinates so heterogeneous parameter scales compare.
inline double swarm_diversity(const std::vector<std::vector<double>>& positions,
                              const std::vector<std::pair<double, double>>& bounds) {
    const std::size_t count = positions.size();
    const std::size_t dims = bounds.size();
    std::vector<double> centroid(dims, 0.0);
    for (const auto& p : positions)
        for (std::size_t d = 0; d < dims; ++d) centroid[d] += p[d];
    for (double& c : centroid) c /= static_cast<double>(count);

    double mean_dist = 0.0;
    for (const auto& p : positions) {
        double sq = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            const double width = std::max(bounds[d].second - bounds[d].first, 1e-300);
            const double z = (p[d] - centroid[d]) / width;
            sq += z * z;
        }
        mean_dist += std::sqrt(sq);
    }
    return mean_dist / static_cast<double>(count);
}

}  // namespace detail

/// PSO over the antecedent parameters with the consequents handled by least
/// squares inside every fitness evaluation. The inertia decays linearly from
/// inertia_max to inertia_min; whenever the swarm collapses below the
/// diversity threshold the decay restarts from inertia_max and the worst 10%
/// of particles are re-seeded at random inside the search box, pushing the
/// swarm away from a premature consensus. One particle starts at the
/// template's own antecedents.
inline std::pair<fuzzy::AnfisModel, TrainReport> train_pso_lse(const fuzzy::AnfisModel& tmpl,
                                                               const Dataset& data,
                                                               const PsoConfig& config) {
    tmpl.validate();
    config.validate();
    const auto bounds = antecedent_bounds(tmpl, data);
    const std::size_t dims = bounds.size();
    const std::size_t count = config.swarm_size;

    std::mt19937 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_position = [&] {
        std::vector<double> p(dims);
        for (std::size_t d = 0; d < dims; ++d)
            p[d] = bounds[d].first + unit(rng) * (bounds[d].second - bounds[d].first);
        return p;
    };
    auto clamp_to_bounds = [&](std::vector<double>& p) {
        for (std::size_t d = 0; d < dims; ++d)
            p[d] = std::clamp(p[d], bounds[d].first, bounds[d].second);
    };

    std::vector<std::vector<double>> position(count), velocity(count), best_position(count);
    std::vector<double> fitness(count), best_fitness(count);

    position[0] = fuzzy::antecedent_params(tmpl);
    clamp_to_bounds(position[0]);
    for (std::size_t i = 1; i < count; ++i) position[i] = random_position();
    for (std::size_t i = 0; i < count; ++i) {
        velocity[i].assign(dims, 0.0);
        fitness[i] = detail::anfis_candidate_rmse(tmpl, position[i], data);
        best_position[i] = position[i];
        best_fitness[i] = fitness[i];
    }

    std::size_t global = 0;
    for (std::size_t i = 1; i < count; ++i)
        if (best_fitness[i] < best_fitness[global]) global = i;
    std::vector<double> global_position = best_position[global];
    double global_fitness = best_fitness[global];

    TrainReport report;
    report.rmse_history.push_back(global_fitness);

    std::size_t schedule_start = 0;
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        const double span = static_cast<double>(std::max<std::size_t>(config.max_iters, 2) - 1);
        const double progress =
            std::min(1.0, static_cast<double>(iter - schedule_start) / span);
        const double inertia =
            config.inertia_max - (config.inertia_max - config.inertia_min) * progress;

        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t d = 0; d < dims; ++d) {
                const double r1 = unit(rng);
                const double r2 = unit(rng);
                velocity[i][d] = inertia * velocity[i][d]
                                 + config.cognitive * r1 * (best_position[i][d] - position[i][d])
                                 + config.social * r2 * (global_position[d] - position[i][d]);
                position[i][d] += velocity[i][d];
            }
            clamp_to_bounds(position[i]);
            fitness[i] = detail::anfis_candidate_rmse(tmpl, position[i], data);
            if (fitness[i] < best_fitness[i]) {
                best_fitness[i] = fitness[i];
                best_position[i] = position[i];
            }
            if (fitness[i] < global_fitness) {
                global_fitness = fitness[i];
                global_position = position[i];
            }
        }

        if (detail::swarm_diversity(position, bounds) < config.diversity_threshold) {
            schedule_start = iter + 1;
            const auto worst_count =
                static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(count)));
            std::vector<std::size_t> order(count);
            for (std::size_t i = 0; i < count; ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return best_fitness[a] > best_fitness[b];
            });
            for (std::size_t w = 0; w < worst_count; ++w) {
                const std::size_t i = order[w];
                position[i] = random_position();
                velocity[i].assign(dims, 0.0);
                fitness[i] = detail::anfis_candidate_rmse(tmpl, position[i], data);
                best_position[i] = position[i];
                best_fitness[i] = fitness[i];
                if (fitness[i] < global_fitness) {
                    global_fitness = fitness[i];
                    global_position = position[i];
                }
            }
        }

        report.rmse_history.push_back(global_fitness);
    }

    report.best_rmse = global_fitness;
    report.stop_reason = StopReason::epoch_budget;

    fuzzy::AnfisModel best = tmpl;
    fuzzy::set_antecedent_params(best, global_position);
    LseInfo info;
    best = lse_consequents(best, data, &info);
    report.rank_warnings = info.rank_warnings;
    return {std::move(best), std::move(report)};
}

}  // namespace nfx::train
