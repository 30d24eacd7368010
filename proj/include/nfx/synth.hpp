#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "nfx/errors.hpp"
#include "nfx/timeseries.hpp"

namespace nfx::ts {

namespace detail {

inline double mackey_glass_rhs(double x, double x_delayed) {
    const double p = std::pow(x_delayed, 10.0);
    return 0.2 * x_delayed / (1.0 + p) - 0.1 * x;
}

}  // namespace detail

/// Mackey-Glass benchmark series: fourth-order Runge-Kutta on
/// dx/dt = 0.2 x(t-17) / (1 + x(t-17)^10) - 0.1 x(t), unit step, constant
/// initial history 1.2, first 200 samples discarded. The generator is fully
/// deterministic; `seed` is accepted for interface uniformity with the other
/// generators and does not affect the output.
inline TimeSeries synth_mackey_glass(std::size_t n, std::uint32_t seed = 0) {
    (void)seed;
    if (n < 100) throw ValidationError("synth_mackey_glass: n must be >= 100");

    constexpr std::size_t tau = 17;
    constexpr std::size_t burn_in = 200;
    const std::size_t total = n + burn_in;

    std::vector<double> x;
    x.reserve(total + 1);
    x.push_back(1.2);

    // x(s) = 1.2 for s <= 0; linear interpolation for the half-step stage.
    auto delayed = [&](double t) {
        if (t <= static_cast<double>(tau)) return 1.2;
        const double s = t - static_cast<double>(tau);
        const auto i = static_cast<std::size_t>(std::floor(s));
        const double frac = s - static_cast<double>(i);
        if (frac == 0.0) return x[i];
        return x[i] * (1.0 - frac) + x[i + 1] * frac;
    };

    for (std::size_t t = 0; t + 1 <= total; ++t) {
        const double xt = x[t];
        const double d0 = delayed(static_cast<double>(t));
        const double dh = delayed(static_cast<double>(t) + 0.5);
        const double d1 = delayed(static_cast<double>(t) + 1.0);
        const double k1 = detail::mackey_glass_rhs(xt, d0);
        const double k2 = detail::mackey_glass_rhs(xt + 0.5 * k1, dh);
        const double k3 = detail::mackey_glass_rhs(xt + 0.5 * k2, dh);
        const double k4 = detail::mackey_glass_rhs(xt + k3, d1);
        x.push_back(xt + (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0);
    }

    TimeSeries series;
    series.timestamps.reserve(n);
    series.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        series.timestamps.push_back(std::to_string(i));
        series.values.push_back(x[burn_in + i]);
    }
    return series;
}

/// sin(2*pi*t/50) plus seeded gaussian noise. With zero noise the values
/// repeat exactly every 50 samples (the phase is reduced mod 50 first).
inline TimeSeries synth_sine_noise(std::size_t n, double noise_sigma, std::uint32_t seed) {
    if (n < 100) throw ValidationError("synth_sine_noise: n must be >= 100");
    if (noise_sigma < 0.0) throw ValidationError("synth_sine_noise: negative noise");

    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    TimeSeries series;
    series.timestamps.reserve(n);
    series.values.reserve(n);
    constexpr std::size_t period = 50;
    for (std::size_t t = 0; t < n; ++t) {
        const double phase = static_cast<double>(t % period) / static_cast<double>(period);
        double v = std::sin(2.0 * std::numbers::pi * phase);
        if (noise_sigma > 0.0) v += noise_sigma * noise(rng);
        series.timestamps.push_back(std::to_string(t));
        series.values.push_back(v);
    }
    return series;
}

}  // namespace nfx::ts
