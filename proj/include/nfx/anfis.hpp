#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfx/dataset.hpp"
#include "nfx/errors.hpp"
#include "nfx/membership.hpp"

namespace nfx::fuzzy {

/// A linguistic input variable: named, ranged, with one membership function
/// per term.
struct FuzzyVariable {
    std::string name;
    std::vector<MembershipFunction> terms;
    double range_lo = 0.0;
    double range_hi = 1.0;

    void validate() const {
        if (terms.empty()) throw ValidationError("variable " + name + ": no terms");
        if (!(range_lo < range_hi))
            throw ValidationError("variable " + name + ": empty range");
        for (const auto& term : terms) fuzzy::validate(term);
    }
};

/// One Sugeno rule: a term index per input variable plus first-order
/// consequent coefficients [p0, p1..pn] (bias first).
struct Rule {
    std::vector<std::size_t> antecedent;
    std::vector<double> consequent;

    double consequent_value(std::span<const double> x) const {
        double y = consequent[0];
        for (std::size_t j = 0; j < x.size(); ++j) y += consequent[j + 1] * x[j];
        return y;
    }
};

/// Per-layer record of one forward evaluation.
struct ForwardTrace {
    std::vector<std::vector<double>> memberships;  // layer 1, per variable per term
    std::vector<double> firing;                    // layer 2
    std::vector<double> normalized;                // layer 3
    std::vector<double> contributions;             // layer 4, normalized_i * f_i(x)
    double output = 0.0;                           // layer 5
    bool degenerate = false;                       // every firing strength underflowed
};

/// Product T-norm over antecedent degrees.
inline double product_tnorm(std::span<const double> degrees) {
    double w = 1.0;
    for (double d : degrees) w *= d;
    return w;
}

/// First-order Sugeno fuzzy system in network form: fuzzification,
/// product-firing, normalization, rule consequents, weighted sum.
struct AnfisModel {
    std::vector<FuzzyVariable> variables;
    std::vector<Rule> rules;

    std::size_t num_inputs() const noexcept { return variables.size(); }
    std::size_t num_rules() const noexcept { return rules.size(); }

    void validate() const {
        if (variables.empty()) throw ValidationError("anfis: no input variables");
        if (rules.empty()) throw ValidationError("anfis: no rules");
        for (const auto& var : variables) var.validate();
        for (std::size_t r = 0; r < rules.size(); ++r) {
            const auto& rule = rules[r];
            if (rule.antecedent.size() != variables.size())
                throw ValidationError("anfis: rule " + std::to_string(r)
                                      + " antecedent arity mismatch");
            for (std::size_t v = 0; v < variables.size(); ++v)
                if (rule.antecedent[v] >= variables[v].terms.size())
                    throw ValidationError("anfis: rule " + std::to_string(r)
                                          + " references invalid term of variable "
                                          + variables[v].name);
            if (rule.consequent.size() != variables.size() + 1)
                throw ValidationError("anfis: rule " + std::to_string(r)
                                      + " consequent length mismatch");
        }
    }
};

/// Firing strengths below this are treated as a total underflow and the
/// normalized weights fall back to uniform, so that training over poorly
/// placed membership functions keeps moving instead of throwing.
inline constexpr double kFiringFloor = 1e-12;

inline void forward_into(const AnfisModel& model, std::span<const double> x,
                         ForwardTrace& trace) {
    const std::size_t n = model.variables.size();
    const std::size_t m = model.rules.size();
    if (x.size() != n)
        throw ValidationError("anfis forward: expected " + std::to_string(n)
                              + " inputs, got " + std::to_string(x.size()));

    trace.memberships.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        const auto& terms = model.variables[v].terms;
        trace.memberships[v].resize(terms.size());
        for (std::size_t t = 0; t < terms.size(); ++t)
            trace.memberships[v][t] = eval(terms[t], x[v]);
    }

    trace.firing.resize(m);
    double total = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        double w = 1.0;
        for (std::size_t v = 0; v < n; ++v)
            w *= trace.memberships[v][model.rules[r].antecedent[v]];
        trace.firing[r] = w;
        total += w;
    }

    trace.degenerate = total < kFiringFloor;
    trace.normalized.resize(m);
    if (trace.degenerate) {
        const double uniform = 1.0 / static_cast<double>(m);
        for (auto& w : trace.normalized) w = uniform;
    } else {
        for (std::size_t r = 0; r < m; ++r) trace.normalized[r] = trace.firing[r] / total;
    }

    trace.contributions.resize(m);
    trace.output = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        trace.contributions[r] = trace.normalized[r] * model.rules[r].consequent_value(x);
        trace.output += trace.contributions[r];
    }
}

inline ForwardTrace forward(const AnfisModel& model, std::span<const double> x) {
    ForwardTrace trace;
    forward_into(model, x, trace);
    return trace;
}

inline double predict(const AnfisModel& model, std::span<const double> x) {
    return forward(model, x).output;
}

/// Builds a model over the given variables. Without a subset the rule base
/// is the full Cartesian product of terms; a subset picks explicit
/// antecedent combinations (an inference network does not have to use every
/// grid cell). Consequents start at zero.
inline AnfisModel build_grid_model(
    std::vector<FuzzyVariable> variables,
    const std::optional<std::vector<std::vector<std::size_t>>>& rule_subset = std::nullopt) {
    if (variables.empty()) throw ValidationError("build_grid_model: no variables");
    for (const auto& var : variables) var.validate();

    AnfisModel model;
    model.variables = std::move(variables);
    const std::size_t n = model.variables.size();

    if (rule_subset) {
        for (const auto& antecedent : *rule_subset) {
            if (antecedent.size() != n)
                throw ValidationError("build_grid_model: subset arity mismatch");
            for (std::size_t v = 0; v < n; ++v)
                if (antecedent[v] >= model.variables[v].terms.size())
                    throw ValidationError("build_grid_model: invalid term index in subset");
            model.rules.push_back({antecedent, std::vector<double>(n + 1, 0.0)});
        }
        if (model.rules.empty())
            throw ValidationError("build_grid_model: empty rule subset");
        return model;
    }

    std::vector<std::size_t> counter(n, 0);
    while (true) {
        model.rules.push_back({counter, std::vector<double>(n + 1, 0.0)});
        std::size_t v = 0;
        for (; v < n; ++v) {
            if (++counter[v] < model.variables[v].terms.size()) break;
            counter[v] = 0;
        }
        if (v == n) break;
    }
    return model;
}

/// Data-driven starting model: per input, gaussian centers evenly spaced
/// over the observed [min, max] with sigma = range / (2 * max(1, terms-1)),
/// full grid rule base, zero consequents.
inline AnfisModel init_from_data(const Dataset& data, const std::vector<std::size_t>& terms_per_input) {
    data.validate();
    const std::size_t n = data.input_dim();
    if (terms_per_input.size() != n)
        throw ValidationError("init_from_data: terms_per_input size mismatch");
    for (std::size_t c : terms_per_input)
        if (c < 1) throw ValidationError("init_from_data: term counts must be >= 1");

    std::vector<FuzzyVariable> variables(n);
    for (std::size_t v = 0; v < n; ++v) {
        double lo = data.inputs[0][v], hi = data.inputs[0][v];
        for (const auto& row : data.inputs) {
            lo = std::min(lo, row[v]);
            hi = std::max(hi, row[v]);
        }
        if (!(hi > lo))
            throw ValidationError("init_from_data: input column " + std::to_string(v)
                                  + " is constant");
        auto& var = variables[v];
        var.name = "x" + std::to_string(v + 1);
        var.range_lo = lo;
        var.range_hi = hi;
        const std::size_t k = terms_per_input[v];
        const double range = hi - lo;
        const double sigma = range / (2.0 * static_cast<double>(std::max<std::size_t>(1, k - 1)));
        for (std::size_t t = 0; t < k; ++t) {
            const double center =
                k == 1 ? (lo + hi) / 2.0
                       : lo + range * static_cast<double>(t) / static_cast<double>(k - 1);
            var.terms.push_back(Gaussian{center, sigma});
        }
    }
    return build_grid_model(std::move(variables));
}

// --- antecedent parameter vector ------------------------------------------
//
// The trainers treat all membership parameters as one flat vector in a fixed
// order: variables in declaration order, terms in order, parameters in each
// family's declaration order.

struct ParamRef {
    std::size_t variable;
    std::size_t term;
    std::size_t index;  // parameter slot within the membership function
};

inline std::vector<ParamRef> antecedent_param_refs(const AnfisModel& model) {
    std::vector<ParamRef> refs;
    for (std::size_t v = 0; v < model.variables.size(); ++v)
        for (std::size_t t = 0; t < model.variables[v].terms.size(); ++t)
            for (std::size_t i = 0; i < param_count(model.variables[v].terms[t]); ++i)
                refs.push_back({v, t, i});
    return refs;
}

inline std::size_t antecedent_param_count(const AnfisModel& model) {
    std::size_t count = 0;
    for (const auto& var : model.variables)
        for (const auto& term : var.terms) count += param_count(term);
    return count;
}

inline std::vector<double> antecedent_params(const AnfisModel& model) {
    std::vector<double> params;
    params.reserve(antecedent_param_count(model));
    for (const auto& var : model.variables)
        for (const auto& term : var.terms)
            for (std::size_t i = 0; i < param_count(term); ++i)
                params.push_back(get_param(term, i));
    return params;
}

/// Writes a flat parameter vector back into the model and re-imposes the
/// membership invariants by clamping.
inline void set_antecedent_params(AnfisModel& model, std::span<const double> params) {
    std::size_t k = 0;
    for (auto& var : model.variables)
        for (auto& term : var.terms) {
            for (std::size_t i = 0; i < param_count(term); ++i) {
                if (k >= params.size())
                    throw ValidationError("set_antecedent_params: vector too short");
                set_param(term, i, params[k++]);
            }
            clamp_invariants(term);
        }
    if (k != params.size())
        throw ValidationError("set_antecedent_params: vector too long");
}

// --- JSON serialization -----------------------------------------------------

inline nlohmann::json to_json(const MembershipFunction& mf) {
    nlohmann::json j;
    j["kind"] = kind_name(mf);
    std::vector<double> params;
    for (std::size_t i = 0; i < param_count(mf); ++i) params.push_back(get_param(mf, i));
    j["params"] = params;
    return j;
}

inline MembershipFunction mf_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const auto params = j.at("params").get<std::vector<double>>();
    MembershipFunction mf;
    if (kind == "gaussian") {
        if (params.size() != 2) throw ValidationError("gaussian: expected 2 params");
        mf = Gaussian{params[0], params[1]};
    } else if (kind == "generalized-bell") {
        if (params.size() != 3) throw ValidationError("generalized-bell: expected 3 params");
        mf = GeneralizedBell{params[0], params[1], params[2]};
    } else if (kind == "triangular") {
        if (params.size() != 3) throw ValidationError("triangular: expected 3 params");
        mf = Triangular{params[0], params[1], params[2]};
    } else {
        throw ValidationError("unknown membership kind: " + kind);
    }
    validate(mf);
    return mf;
}

inline nlohmann::json to_json(const AnfisModel& model) {
    nlohmann::json j;
    j["variables"] = nlohmann::json::array();
    for (const auto& var : model.variables) {
        nlohmann::json jv;
        jv["name"] = var.name;
        jv["range"] = {var.range_lo, var.range_hi};
        jv["terms"] = nlohmann::json::array();
        for (const auto& term : var.terms) jv["terms"].push_back(to_json(term));
        j["variables"].push_back(std::move(jv));
    }
    j["rules"] = nlohmann::json::array();
    for (const auto& rule : model.rules) {
        nlohmann::json jr;
        jr["antecedent"] = rule.antecedent;
        jr["consequent"] = rule.consequent;
        j["rules"].push_back(std::move(jr));
    }
    return j;
}

inline AnfisModel model_from_json(const nlohmann::json& j) {
    AnfisModel model;
    for (const auto& jv : j.at("variables")) {
        FuzzyVariable var;
        var.name = jv.at("name").get<std::string>();
        var.range_lo = jv.at("range").at(0).get<double>();
        var.range_hi = jv.at("range").at(1).get<double>();
        for (const auto& jt : jv.at("terms")) var.terms.push_back(mf_from_json(jt));
        model.variables.push_back(std::move(var));
    }
    for (const auto& jr : j.at("rules")) {
        Rule rule;
        rule.antecedent = jr.at("antecedent").get<std::vector<std::size_t>>();
        rule.consequent = jr.at("consequent").get<std::vector<double>>();
        model.rules.push_back(std::move(rule));
    }
    model.validate();
    return model;
}

}  // namespace nfx::fuzzy
