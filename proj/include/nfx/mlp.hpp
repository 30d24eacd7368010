#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfx/dataset.hpp"
#include "nfx/errors.hpp"
#include "nfx/linalg.hpp"

namespace nfx::mlp {

enum class Activation { tanh, relu };

inline std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

inline Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "relu") return Activation::relu;
    throw ValidationError("unknown activation: " + s);
}

inline double activate(Activation a, double z) {
    return a == Activation::tanh ? std::tanh(z) : std::max(z, 0.0);
}

inline double activate_derivative(Activation a, double z) {
    if (a == Activation::tanh) {
        const double t = std::tanh(z);
        return 1.0 - t * t;
    }
    return z > 0.0 ? 1.0 : 0.0;
}

/// Fully connected feedforward net; hidden layers share one activation, the
/// output layer is identity.
struct MlpModel {
    std::vector<std::size_t> sizes;
    std::vector<linalg::Matrix> weights;        // weights[l]: sizes[l+1] x sizes[l]
    std::vector<std::vector<double>> biases;    // biases[l]: sizes[l+1]
    Activation activation = Activation::tanh;

    std::size_t num_layers() const noexcept { return weights.size(); }

    void validate() const {
        if (sizes.size() < 2) throw ValidationError("mlp: need at least input and output layer");
        if (weights.size() != sizes.size() - 1 || biases.size() != sizes.size() - 1)
            throw ValidationError("mlp: layer count mismatch");
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            if (weights[l].rows() != sizes[l + 1] || weights[l].cols() != sizes[l])
                throw ValidationError("mlp: weight shape mismatch at layer "
                                      + std::to_string(l));
            if (biases[l].size() != sizes[l + 1])
                throw ValidationError("mlp: bias shape mismatch at layer " + std::to_string(l));
        }
    }

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Glorot-uniform weights, zero biases, reproducible per seed.
inline MlpModel mlp_init(std::vector<std::size_t> sizes, Activation activation,
                         std::uint32_t seed) {
    if (sizes.size() < 2) throw ValidationError("mlp_init: need at least input and output layer");
    for (std::size_t s : sizes)
        if (s == 0) throw ValidationError("mlp_init: zero-width layer");

    MlpModel model;
    model.sizes = std::move(sizes);
    model.activation = activation;
    std::mt19937 rng(seed);
    for (std::size_t l = 0; l + 1 < model.sizes.size(); ++l) {
        const std::size_t fan_in = model.sizes[l];
        const std::size_t fan_out = model.sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> uniform(-limit, limit);
        linalg::Matrix w(fan_out, fan_in);
        for (auto& v : w.data()) v = uniform(rng);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }
    return model;
}

/// Per-layer activations of one evaluation; activations[0] is the input,
/// activations.back() the network output. Pre-activations are kept for the
/// backward pass.
struct ForwardCache {
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> pre_activations;

    const std::vector<double>& output() const { return activations.back(); }
};

inline ForwardCache mlp_forward(const MlpModel& model, std::span<const double> x) {
    if (x.size() != model.sizes.front())
        throw ValidationError("mlp_forward: expected " + std::to_string(model.sizes.front())
                              + " inputs, got " + std::to_string(x.size()));
    ForwardCache cache;
    cache.activations.emplace_back(x.begin(), x.end());
    for (std::size_t l = 0; l < model.num_layers(); ++l) {
        const auto& w = model.weights[l];
        const auto& prev = cache.activations.back();
        std::vector<double> z(w.rows());
        for (std::size_t i = 0; i < w.rows(); ++i) {
            double s = model.biases[l][i];
            for (std::size_t j = 0; j < w.cols(); ++j) s += w(i, j) * prev[j];
            z[i] = s;
        }
        const bool is_output = l + 1 == model.num_layers();
        std::vector<double> a(z.size());
        for (std::size_t i = 0; i < z.size(); ++i)
            a[i] = is_output ? z[i] : activate(model.activation, z[i]);
        cache.pre_activations.push_back(std::move(z));
        cache.activations.push_back(std::move(a));
    }
    return cache;
}

inline double mlp_predict_scalar(const MlpModel& model, std::span<const double> x) {
    const auto cache = mlp_forward(model, x);
    if (cache.output().size() != 1)
        throw ValidationError("mlp_predict_scalar: model output is not scalar");
    return cache.output()[0];
}

struct Gradients {
    std::vector<linalg::Matrix> weights;
    std::vector<std::vector<double>> biases;
};

inline Gradients zero_gradients(const MlpModel& model) {
    Gradients g;
    for (std::size_t l = 0; l < model.num_layers(); ++l) {
        g.weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
        g.biases.emplace_back(model.biases[l].size(), 0.0);
    }
    return g;
}

/// Exact gradients of the batch MSE, loss = mean over samples of the summed
/// squared output error (so a single linear neuron on one sample yields
/// 2*(y_hat - t)*x for the weight and 2*(y_hat - t) for the bias).
inline std::pair<double, Gradients> mlp_backward(
    const MlpModel& model, std::span<const std::vector<double>> inputs,
    std::span<const std::vector<double>> targets) {
    if (inputs.size() != targets.size() || inputs.empty())
        throw ValidationError("mlp_backward: batch shape mismatch");

    Gradients grads = zero_gradients(model);
    const auto count = static_cast<double>(inputs.size());
    double loss = 0.0;

    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const auto cache = mlp_forward(model, inputs[k]);
        const auto& out = cache.output();
        if (targets[k].size() != out.size())
            throw ValidationError("mlp_backward: target dimension mismatch");

        std::vector<double> delta(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double e = out[i] - targets[k][i];
            loss += e * e / count;
            delta[i] = 2.0 * e / count;  // identity output layer
        }

        for (std::size_t l = model.num_layers(); l-- > 0;) {
            const auto& prev = cache.activations[l];
            auto& gw = grads.weights[l];
            auto& gb = grads.biases[l];
            for (std::size_t i = 0; i < delta.size(); ++i) {
                gb[i] += delta[i];
                for (std::size_t j = 0; j < prev.size(); ++j) gw(i, j) += delta[i] * prev[j];
            }
            if (l == 0) break;
            const auto& w = model.weights[l];
            std::vector<double> next_delta(model.sizes[l], 0.0);
            for (std::size_t j = 0; j < next_delta.size(); ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < delta.size(); ++i) s += w(i, j) * delta[i];
                next_delta[j] =
                    s * activate_derivative(model.activation, cache.pre_activations[l - 1][j]);
            }
            delta = std::move(next_delta);
        }
    }
    return {loss, std::move(grads)};
}

struct SgdConfig {
    double learning_rate = 0.01;
    double momentum = 0.0;
    std::size_t batch_size = 32;
    std::size_t epochs = 100;
    std::uint32_t seed = 0;

    void validate() const {
        if (!(learning_rate >= 0.0)) throw ValidationError("sgd: negative learning rate");
        if (momentum < 0.0 || momentum >= 1.0)
            throw ValidationError("sgd: momentum must be in [0,1)");
        if (batch_size < 1) throw ValidationError("sgd: batch_size must be >= 1");
        if (epochs < 1) throw ValidationError("sgd: epochs must be >= 1");
    }
};

/// Vector-target training set (the regression Dataset covers the scalar
/// case; autoencoders need full vectors).
struct TrainSet {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> targets;
};

inline TrainSet to_trainset(const Dataset& data) {
    TrainSet set;
    set.inputs = data.inputs;
    set.targets.reserve(data.size());
    for (double t : data.targets) set.targets.push_back({t});
    return set;
}

inline double mlp_mse(const MlpModel& model, const TrainSet& set) {
    double loss = 0.0;
    for (std::size_t k = 0; k < set.inputs.size(); ++k) {
        const auto cache = mlp_forward(model, set.inputs[k]);
        for (std::size_t i = 0; i < cache.output().size(); ++i) {
            const double e = cache.output()[i] - set.targets[k][i];
            loss += e * e;
        }
    }
    return loss / static_cast<double>(set.inputs.size());
}

/// Seeded mini-batch SGD with classical momentum. Batches are drawn from a
/// fresh shuffle each epoch but accumulated in ascending row order, so the
/// full-batch case reduces to one deterministic full-gradient step. The
/// history records the epoch-end MSE over the whole set.
inline std::pair<MlpModel, std::vector<double>> sgd_train(MlpModel model, const TrainSet& set,
                                                          const SgdConfig& config) {
    config.validate();
    model.validate();
    if (set.inputs.empty() || set.inputs.size() != set.targets.size())
        throw ValidationError("sgd_train: bad training set");

    std::mt19937 rng(config.seed);
    Gradients velocity = zero_gradients(model);
    std::vector<std::size_t> order(set.inputs.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> history;

    std::vector<std::vector<double>> batch_x, batch_y;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(start + config.batch_size, order.size());
            std::vector<std::size_t> batch(order.begin() + start, order.begin() + stop);
            std::sort(batch.begin(), batch.end());
            batch_x.clear();
            batch_y.clear();
            for (std::size_t idx : batch) {
                batch_x.push_back(set.inputs[idx]);
                batch_y.push_back(set.targets[idx]);
            }
            auto [loss, grads] = mlp_backward(model, batch_x, batch_y);
            (void)loss;
            for (std::size_t l = 0; l < model.num_layers(); ++l) {
                auto& vw = velocity.weights[l].data();
                const auto& gw = grads.weights[l].data();
                auto& w = model.weights[l].data();
                for (std::size_t i = 0; i < w.size(); ++i) {
                    vw[i] = config.momentum * vw[i] - config.learning_rate * gw[i];
                    w[i] += vw[i];
                }
                auto& vb = velocity.biases[l];
                const auto& gb = grads.biases[l];
                auto& b = model.biases[l];
                for (std::size_t i = 0; i < b.size(); ++i) {
                    vb[i] = config.momentum * vb[i] - config.learning_rate * gb[i];
                    b[i] += vb[i];
                }
            }
        }
        history.push_back(mlp_mse(model, set));
    }
    return {std::move(model), std::move(history)};
}

struct AeConfig {
    std::size_t epochs_per_layer = 20;
    double corruption = 0.0;  // masking probability, in [0,1)
    double learning_rate = 0.05;
    std::size_t batch_size = 32;

    void validate() const {
        if (corruption < 0.0 || corruption >= 1.0)
            throw ValidationError("autoencoder: corruption must be in [0,1)");
        if (!(learning_rate > 0.0))
            throw ValidationError("autoencoder: learning rate must be > 0");
        if (batch_size < 1) throw ValidationError("autoencoder: batch_size must be >= 1");
    }
};

struct AutoencoderResult {
    linalg::Matrix encoder_w;
    std::vector<double> encoder_b;
    linalg::Matrix decoder_w;
    std::vector<double> decoder_b;
    double initial_mse = 0.0;  // clean-input reconstruction error before training
    double final_mse = 0.0;    // and after
};

/// Trains one denoising autoencoder (masking noise, plain SGD) on the given
/// codes. The encoder may start from existing weights so that zero epochs
/// of pretraining leave a surrounding network untouched.
inline AutoencoderResult train_denoising_autoencoder(
    const std::vector<std::vector<double>>& codes, std::size_t hidden, Activation activation,
    const AeConfig& config, std::uint32_t seed, const linalg::Matrix* encoder_init = nullptr,
    const std::vector<double>* encoder_bias_init = nullptr) {
    config.validate();
    if (codes.empty()) throw ValidationError("autoencoder: empty input");
    const std::size_t dim = codes.front().size();

    MlpModel ae = mlp_init({dim, hidden, dim}, activation, seed);
    if (encoder_init) {
        ae.weights[0] = *encoder_init;
        ae.biases[0] = *encoder_bias_init;
    }

    TrainSet clean;
    clean.inputs = codes;
    clean.targets = codes;
    AutoencoderResult result;
    result.initial_mse = mlp_mse(ae, clean);

    std::mt19937 rng(seed + 0x9e3779b9u);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> order(codes.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<std::vector<double>> batch_x, batch_y;
    for (std::size_t epoch = 0; epoch < config.epochs_per_layer; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(start + config.batch_size, order.size());
            std::vector<std::size_t> batch(order.begin() + start, order.begin() + stop);
            std::sort(batch.begin(), batch.end());
            batch_x.clear();
            batch_y.clear();
            for (std::size_t idx : batch) {
                auto corrupted = codes[idx];
                if (config.corruption > 0.0)
                    for (double& v : corrupted)
                        if (unit(rng) < config.corruption) v = 0.0;
                batch_x.push_back(std::move(corrupted));
                batch_y.push_back(codes[idx]);
            }
            auto [loss, grads] = mlp_backward(ae, batch_x, batch_y);
            (void)loss;
            for (std::size_t l = 0; l < ae.num_layers(); ++l) {
                auto& w = ae.weights[l].data();
                const auto& gw = grads.weights[l].data();
                for (std::size_t i = 0; i < w.size(); ++i)
                    w[i] -= config.learning_rate * gw[i];
                for (std::size_t i = 0; i < ae.biases[l].size(); ++i)
                    ae.biases[l][i] -= config.learning_rate * grads.biases[l][i];
            }
        }
    }

    result.final_mse = mlp_mse(ae, clean);
    result.encoder_w = ae.weights[0];
    result.encoder_b = ae.biases[0];
    result.decoder_w = ae.weights[1];
    result.decoder_b = ae.biases[1];
    return result;
}

/// Greedy layerwise pretraining: each hidden layer is refined as a denoising
/// autoencoder over the codes produced by the layers before it; the output
/// layer keeps its mlp_init weights. With zero pretraining epochs this is
/// exactly mlp_init.
inline MlpModel pretrain_stacked_autoencoders(std::vector<std::size_t> sizes,
                                              Activation activation,
                                              const std::vector<std::vector<double>>& inputs,
                                              const AeConfig& config, std::uint32_t seed) {
    config.validate();
    if (sizes.size() < 3)
        throw ValidationError("pretrain: need at least one hidden layer");
    if (inputs.empty()) throw ValidationError("pretrain: empty dataset");

    MlpModel model = mlp_init(std::move(sizes), activation, seed);
    std::vector<std::vector<double>> codes = inputs;

    for (std::size_t l = 0; l + 2 < model.sizes.size(); ++l) {
        if (config.epochs_per_layer > 0) {
            const auto ae = train_denoising_autoencoder(
                codes, model.sizes[l + 1], activation, config,
                seed + static_cast<std::uint32_t>(l + 1), &model.weights[l], &model.biases[l]);
            model.weights[l] = ae.encoder_w;
            model.biases[l] = ae.encoder_b;
        }
        std::vector<std::vector<double>> next;
        next.reserve(codes.size());
        for (const auto& row : codes) {
            std::vector<double> z(model.sizes[l + 1]);
            for (std::size_t i = 0; i < z.size(); ++i) {
                double s = model.biases[l][i];
                for (std::size_t j = 0; j < row.size(); ++j) s += model.weights[l](i, j) * row[j];
                z[i] = activate(activation, s);
            }
            next.push_back(std::move(z));
        }
        codes = std::move(next);
    }
    return model;
}

/// Recursive autoregressive forecasting: the last `length` values are
/// normalized, fed through the net, denormalized, appended, and the cycle
/// repeats for `horizon` steps. Returns all `horizon` forecasts in order.
inline std::vector<double> forecast_series(const MlpModel& model,
                                           std::span<const double> series,
                                           const WindowSpec& window,
                                           const NormalizationParams& norm) {
    window.validate();
    model.validate();
    if (model.sizes.front() != window.length)
        throw ValidationError("forecast_series: model input width != window length");
    if (series.size() < window.length)
        throw ValidationError("forecast_series: series shorter than the window");

    std::vector<double> working(series.end() - window.length, series.end());
    std::vector<double> forecasts;
    forecasts.reserve(window.horizon);
    for (std::size_t step = 0; step < window.horizon; ++step) {
        std::vector<double> x(window.length);
        for (std::size_t i = 0; i < window.length; ++i)
            x[i] = norm.apply(working[working.size() - window.length + i]);
        const double y = norm.invert(mlp_predict_scalar(model, x));
        forecasts.push_back(y);
        working.push_back(y);
    }
    return forecasts;
}

// --- JSON serialization -----------------------------------------------------

inline nlohmann::json to_json(const MlpModel& model) {
    nlohmann::json j;
    j["sizes"] = model.sizes;
    j["activation"] = to_string(model.activation);
    j["weights"] = nlohmann::json::array();
    for (const auto& w : model.weights) j["weights"].push_back(w.data());  // row-major
    j["biases"] = model.biases;
    return j;
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
    MlpModel model;
    model.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    model.activation = activation_from_string(j.at("activation").get<std::string>());
    if (model.sizes.size() < 2) throw ValidationError("mlp json: bad sizes");
    const auto weights = j.at("weights");
    const auto biases = j.at("biases").get<std::vector<std::vector<double>>>();
    if (weights.size() != model.sizes.size() - 1 || biases.size() != weights.size())
        throw ValidationError("mlp json: layer count mismatch");
    for (std::size_t l = 0; l + 1 < model.sizes.size(); ++l) {
        linalg::Matrix w(model.sizes[l + 1], model.sizes[l]);
        const auto flat = weights.at(l).get<std::vector<double>>();
        if (flat.size() != w.data().size()) throw ValidationError("mlp json: weight size");
        w.data() = flat;
        model.weights.push_back(std::move(w));
        model.biases.push_back(biases[l]);
    }
    model.validate();
    return model;
}

}  // namespace nfx::mlp
