#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nfx/errors.hpp"
#include "nfx/fcm.hpp"

namespace nfx::fcm {

struct GaConfig {
    std::size_t population_size = 60;
    std::size_t generations = 150;
    std::size_t tournament_size = 3;
    double crossover_rate = 0.9;
    double mutation_sigma = 0.05;
    std::size_t elitism_count = 2;
    std::uint32_t seed = 0;

    void validate() const {
        if (population_size < 2) throw ValidationError("ga: population_size must be >= 2");
        if (tournament_size < 1 || tournament_size > population_size)
            throw ValidationError("ga: tournament_size must be in [1, population]");
        if (crossover_rate < 0.0 || crossover_rate > 1.0)
            throw ValidationError("ga: crossover_rate must be in [0,1]");
        if (!(mutation_sigma > 0.0)) throw ValidationError("ga: mutation_sigma must be > 0");
        if (elitism_count < 1 || elitism_count >= population_size)
            throw ValidationError("ga: elitism_count must be in [1, population)");
    }
};

/// Optional trace of a GA run, mainly for tests and reporting.
struct GaTrace {
    std::vector<double> best_fitness_history;  // per generation, incl. the initial one
};

namespace detail {

/// Chromosome layout: off-diagonal weights row by row, diagonal skipped.
inline ConceptMap chromosome_to_map(const std::vector<std::string>& concepts,
                                    const std::vector<double>& genes, double steepness,
                                    double self_memory) {
    const std::size_t n = concepts.size();
    ConceptMap map;
    map.concepts = concepts;
    map.weights = linalg::Matrix(n, n);
    map.steepness = steepness;
    map.self_memory = self_memory;
    std::size_t g = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) map.weights(i, j) = genes[g++];
    return map;
}

/// Negated mean one-step prediction error over all observed transitions
/// (teacher forcing); higher is better, 0 is a perfect fit.
inline double ga_fitness(const ConceptMap& map, const TransitionData& data) {
    double total = 0.0;
    std::size_t pairs = 0;
    for (const auto& states : data.sequences) {
        for (std::size_t t = 0; t + 1 < states.size(); ++t) {
            const auto predicted = step(map, states[t]);
            double sq = 0.0;
            for (std::size_t i = 0; i < predicted.size(); ++i) {
                const double e = predicted[i] - states[t + 1][i];
                sq += e * e;
            }
            total += sq;
            ++pairs;
        }
    }
    return -total / static_cast<double>(pairs);
}

}  // namespace detail

/// Learns the off-diagonal weights of a map over a fixed concept set from
/// observed state transitions: tournament selection, blend crossover with
/// 10% interval inflation, gaussian mutation, elitism. Genes live in [-1,1].
/// The returned map carries the default steepness and self-memory (1, 1).
inline ConceptMap ga_learn(const std::vector<std::string>& concepts,
                           const TransitionData& data, const GaConfig& config,
                           GaTrace* trace = nullptr) {
    config.validate();
    if (concepts.size() < 2) throw ValidationError("ga_learn: need at least 2 concepts");
    data.validate(concepts.size());

    constexpr double kSteepness = 1.0;
    constexpr double kSelfMemory = 1.0;
    const std::size_t genes = concepts.size() * (concepts.size() - 1);
    const std::size_t count = config.population_size;

    std::mt19937 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> weight_range(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto fitness_of = [&](const std::vector<double>& chromo) {
        return detail::ga_fitness(
            detail::chromosome_to_map(concepts, chromo, kSteepness, kSelfMemory), data);
    };

    std::vector<std::vector<double>> population(count);
    std::vector<double> fitness(count);
    for (std::size_t i = 0; i < count; ++i) {
        population[i].resize(genes);
        for (double& g : population[i]) g = weight_range(rng);
        fitness[i] = fitness_of(population[i]);
    }

    auto ranked = [&] {
        std::vector<std::size_t> order(count);
        for (std::size_t i = 0; i < count; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });
        return order;
    };

    if (trace) {
        trace->best_fitness_history.clear();
        trace->best_fitness_history.push_back(fitness[ranked()[0]]);
    }

    auto tournament = [&]() -> const std::vector<double>& {
        std::size_t best = std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
        for (std::size_t k = 1; k < config.tournament_size; ++k) {
            const std::size_t i = std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
            if (fitness[i] > fitness[best]) best = i;
        }
        return population[best];
    };

    for (std::size_t gen = 0; gen < config.generations; ++gen) {
        const auto order = ranked();
        std::vector<std::vector<double>> next;
        next.reserve(count);
        for (std::size_t e = 0; e < config.elitism_count; ++e)
            next.push_back(population[order[e]]);

        while (next.size() < count) {
            const auto& a = tournament();
            const auto& b = tournament();
            std::vector<double> child(genes);
            if (unit(rng) < config.crossover_rate) {
                for (std::size_t g = 0; g < genes; ++g) {
                    const double lo = std::min(a[g], b[g]);
                    const double hi = std::max(a[g], b[g]);
                    const double pad = 0.1 * (hi - lo);
                    child[g] = lo - pad + unit(rng) * ((hi + pad) - (lo - pad));
                }
            } else {
                child = a;
            }
            for (double& g : child)
                g = std::clamp(g + config.mutation_sigma * gauss(rng), -1.0, 1.0);
            next.push_back(std::move(child));
        }

        population = std::move(next);
        for (std::size_t i = 0; i < count; ++i) fitness[i] = fitness_of(population[i]);
        if (trace) trace->best_fitness_history.push_back(fitness[ranked()[0]]);
    }

    return detail::chromosome_to_map(concepts, population[ranked()[0]], kSteepness,
                                     kSelfMemory);
}

}  // namespace nfx::fcm
