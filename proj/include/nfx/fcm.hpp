#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nfx/csv.hpp"
#include "nfx/errors.hpp"
#include "nfx/linalg.hpp"

namespace nfx::fcm {

/// Concept activations, each in [0,1].
using FcmState = std::vector<double>;

/// Signed weighted digraph of concepts. weights(s, t) is the influence of
/// concept s on concept t, in [-1,1] with a zero diagonal; self-influence is
/// modeled only through the memory term k_self.
struct ConceptMap {
    std::vector<std::string> concepts;
    linalg::Matrix weights;
    double steepness = 1.0;  // lambda
    double self_memory = 1.0;  // k_self

    std::size_t size() const noexcept { return concepts.size(); }

    int concept_index(const std::string& name) const {
        for (std::size_t i = 0; i < concepts.size(); ++i)
            if (concepts[i] == name) return static_cast<int>(i);
        return -1;
    }

    void validate() const {
        if (concepts.size() < 2) throw ValidationError("fcm: need at least 2 concepts");
        if (weights.rows() != concepts.size() || weights.cols() != concepts.size())
            throw ValidationError("fcm: weight matrix shape mismatch");
        if (!(steepness > 0.0)) throw ValidationError("fcm: steepness must be > 0");
        if (self_memory < 0.0 || self_memory > 1.0)
            throw ValidationError("fcm: self_memory must be in [0,1]");
        for (std::size_t i = 0; i < concepts.size(); ++i)
            for (std::size_t j = 0; j < concepts.size(); ++j) {
                const double w = weights(i, j);
                if (i == j && w != 0.0)
                    throw ValidationError("fcm: diagonal must be zero (" + concepts[i] + ")");
                if (w < -1.0 || w > 1.0)
                    throw ValidationError("fcm: weight out of [-1,1] at " + concepts[i]
                                          + " -> " + concepts[j]);
            }
    }
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// One synchronous update: A_i' = sigmoid(lambda * (sum_{j!=i} w_ji A_j +
/// k_self * A_i)).
inline FcmState step(const ConceptMap& map, const FcmState& state) {
    const std::size_t n = map.size();
    if (state.size() != n)
        throw ValidationError("fcm step: state dimension mismatch");
    FcmState next(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = map.self_memory * state[i];
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) s += map.weights(j, i) * state[j];
        next[i] = sigmoid(map.steepness * s);
    }
    return next;
}

enum class FcmClass { fixed_point, limit_cycle, budget_exhausted };

inline std::string to_string(FcmClass c) {
    switch (c) {
        case FcmClass::fixed_point: return "fixed-point";
        case FcmClass::limit_cycle: return "limit-cycle";
        default: return "budget-exhausted";
    }
}

struct FcmRunResult {
    std::vector<FcmState> trajectory;  // trajectory[0] is the initial state
    FcmState terminal;
    FcmClass classification = FcmClass::budget_exhausted;
    std::size_t cycle_length = 0;  // 0 unless limit-cycle
};

inline double max_abs_diff(const FcmState& a, const FcmState& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

/// Iterates the map until a fixed point (successive states within eps in the
/// max norm), a recurrence of any earlier state (limit cycle), or the
/// iteration budget runs out.
inline FcmRunResult run(const ConceptMap& map, const FcmState& initial,
                        std::size_t max_iters, double eps) {
    if (max_iters < 1) throw ValidationError("fcm run: max_iters must be >= 1");
    if (!(eps > 0.0)) throw ValidationError("fcm run: eps must be > 0");

    FcmRunResult result;
    result.trajectory.push_back(initial);
    for (std::size_t t = 1; t <= max_iters; ++t) {
        FcmState next = step(map, result.trajectory.back());
        if (max_abs_diff(next, result.trajectory.back()) < eps) {
            result.trajectory.push_back(std::move(next));
            result.classification = FcmClass::fixed_point;
            result.terminal = result.trajectory.back();
            return result;
        }
        for (std::size_t k = 0; k + 1 < result.trajectory.size(); ++k) {
            if (max_abs_diff(next, result.trajectory[k]) < eps) {
                result.cycle_length = t - k;
                result.trajectory.push_back(std::move(next));
                result.classification = FcmClass::limit_cycle;
                result.terminal = result.trajectory.back();
                return result;
            }
        }
        result.trajectory.push_back(std::move(next));
    }
    result.classification = FcmClass::budget_exhausted;
    result.terminal = result.trajectory.back();
    return result;
}

/// Evidence balance behind the target's terminal activation: with
/// P = sum of positive incoming weight * source activation and N likewise
/// for negative weights, the consonance is |P-N|/(P+N), or 0 when there is
/// no incoming evidence at all. 1 means every active influence agrees, 0
/// perfectly contradictory (or absent) evidence.
inline double consonance(const ConceptMap& map, const FcmRunResult& result,
                         const std::string& target) {
    const int t = map.concept_index(target);
    if (t < 0) throw ValidationError("fcm consonance: unknown concept \"" + target + "\"");
    const auto ti = static_cast<std::size_t>(t);
    double positive = 0.0, negative = 0.0;
    for (std::size_t j = 0; j < map.size(); ++j) {
        if (j == ti) continue;
        const double w = map.weights(j, ti);
        if (w > 0.0) positive += w * result.terminal[j];
        else if (w < 0.0) negative += -w * result.terminal[j];
    }
    const double total = positive + negative;
    if (!(total > 0.0)) return 0.0;
    return std::abs(positive - negative) / total;
}

/// Qualitative-branch output: predicted activation of a target concept plus
/// the consonance attached to it.
struct FcmForecast {
    std::string target;
    double activation = 0.0;
    double consonance = 0.0;
};

/// Turns a sparse list of (concept, intensity) events into a full state:
/// named concepts take their intensity, everything else rests at the
/// neutral 0.5.
inline FcmState event_encode(const ConceptMap& map,
                             const std::vector<std::pair<std::string, double>>& events) {
    FcmState state(map.size(), 0.5);
    for (const auto& [name, intensity] : events) {
        const int idx = map.concept_index(name);
        if (idx < 0) throw ValidationError("fcm events: unknown concept \"" + name + "\"");
        if (intensity < 0.0 || intensity > 1.0)
            throw ValidationError("fcm events: intensity for \"" + name
                                  + "\" outside [0,1]");
        state[static_cast<std::size_t>(idx)] = intensity;
    }
    return state;
}

/// Encode events, iterate to quiescence, read off the target's activation
/// and its consonance.
inline FcmForecast forecast(const ConceptMap& map,
                            const std::vector<std::pair<std::string, double>>& events,
                            const std::string& target, std::size_t max_iters = 100,
                            double eps = 1e-6) {
    const int idx = map.concept_index(target);
    if (idx < 0) throw ValidationError("fcm forecast: unknown concept \"" + target + "\"");
    const auto initial = event_encode(map, events);
    const auto result = run(map, initial, max_iters, eps);
    FcmForecast f;
    f.target = target;
    f.activation = result.terminal[static_cast<std::size_t>(idx)];
    f.consonance = consonance(map, result, target);
    return f;
}

// --- serialization ----------------------------------------------------------

inline nlohmann::json to_json(const ConceptMap& map) {
    nlohmann::json j;
    j["concepts"] = map.concepts;
    j["weights"] = nlohmann::json::array();
    for (std::size_t i = 0; i < map.size(); ++i) {
        std::vector<double> row(map.size());
        for (std::size_t k = 0; k < map.size(); ++k) row[k] = map.weights(i, k);
        j["weights"].push_back(row);
    }
    j["lambda"] = map.steepness;
    j["k_self"] = map.self_memory;
    return j;
}

inline ConceptMap map_from_json(const nlohmann::json& j) {
    ConceptMap map;
    map.concepts = j.at("concepts").get<std::vector<std::string>>();
    const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    if (rows.size() != map.concepts.size())
        throw ValidationError("fcm json: weights row count mismatch");
    map.weights = linalg::Matrix(map.size(), map.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != map.concepts.size())
            throw ValidationError("fcm json: weights column count mismatch");
        for (std::size_t k = 0; k < rows[i].size(); ++k) map.weights(i, k) = rows[i][k];
    }
    map.steepness = j.at("lambda").get<double>();
    map.self_memory = j.at("k_self").get<double>();
    map.validate();
    return map;
}

/// Observed concept states for learning: one or more sequences, each a run
/// of consecutive observations. Within a sequence, adjoining rows are
/// treated as one-step transitions; separate sequences let the training data
/// restart from fresh states (a single trajectory rarely excites every
/// weight).
struct TransitionData {
    std::vector<std::vector<FcmState>> sequences;

    static TransitionData from_sequence(std::vector<FcmState> states) {
        TransitionData data;
        data.sequences.push_back(std::move(states));
        return data;
    }

    std::size_t pair_count() const {
        std::size_t pairs = 0;
        for (const auto& seq : sequences)
            if (seq.size() >= 2) pairs += seq.size() - 1;
        return pairs;
    }

    void validate(std::size_t dimension) const {
        if (pair_count() == 0)
            throw ValidationError("transition data: need at least 2 states in a sequence");
        for (std::size_t s = 0; s < sequences.size(); ++s) {
            if (sequences[s].size() < 2)
                throw ValidationError("transition data: sequence " + std::to_string(s + 1)
                                      + " has fewer than 2 states");
            for (std::size_t i = 0; i < sequences[s].size(); ++i) {
                if (sequences[s][i].size() != dimension)
                    throw ValidationError("transition data: dimension mismatch at sequence "
                                          + std::to_string(s + 1) + ", row "
                                          + std::to_string(i + 1));
                for (double v : sequences[s][i])
                    if (v < 0.0 || v > 1.0)
                        throw ValidationError(
                            "transition data: activation outside [0,1] at sequence "
                            + std::to_string(s + 1) + ", row " + std::to_string(i + 1));
            }
        }
    }
};

/// CSV with one concept per column (names in the header) and one state per
/// row. An optional leading "seq" column groups rows into sequences; without
/// it the whole file is one sequence. Returns the concept names alongside
/// the states.
inline std::pair<std::vector<std::string>, TransitionData>
load_transitions_csv(const std::string& path) {
    const auto table = csv::read_file(path);
    const bool has_seq = !table.header.empty() && table.header.front() == "seq";
    const std::size_t first_concept = has_seq ? 1 : 0;
    if (table.header.size() < first_concept + 2)
        throw ValidationError("transition CSV needs at least 2 concept columns: " + path);
    const std::vector<std::string> concepts(table.header.begin() + first_concept,
                                            table.header.end());

    TransitionData data;
    std::string current_tag;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size())
            throw ValidationError("transition CSV: ragged row " + std::to_string(r + 1));
        if (data.sequences.empty() || (has_seq && row[0] != current_tag)) {
            data.sequences.emplace_back();
            if (has_seq) current_tag = row[0];
        }
        FcmState state(concepts.size());
        for (std::size_t c = 0; c < concepts.size(); ++c)
            state[c] = csv::parse_number(row[first_concept + c],
                                         "row " + std::to_string(r + 1) + ", column "
                                             + concepts[c]);
        data.sequences.back().push_back(std::move(state));
    }
    data.validate(concepts.size());
    return {concepts, data};
}

inline void save_transitions_csv(const std::string& path,
                                 const std::vector<std::string>& concepts,
                                 const TransitionData& data) {
    csv::Table table;
    const bool multi = data.sequences.size() > 1;
    if (multi) table.header.push_back("seq");
    table.header.insert(table.header.end(), concepts.begin(), concepts.end());
    for (std::size_t s = 0; s < data.sequences.size(); ++s)
        for (const auto& state : data.sequences[s]) {
            std::vector<std::string> row;
            if (multi) row.push_back(std::to_string(s + 1));
            for (double v : state) row.push_back(csv::fmt17(v));
            table.rows.push_back(std::move(row));
        }
    csv::write_file(path, table);
}

}  // namespace nfx::fcm
