#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <variant>

#include "nfx/errors.hpp"

namespace nfx::fuzzy {

/// exp(-(x-c)^2 / (2 sigma^2)). Smooth everywhere; the recommended family
/// for gradient training.
struct Gaussian {
    double center = 0.0;
    double sigma = 1.0;
};

/// 1 / (1 + |(x-c)/a|^(2b)).
struct GeneralizedBell {
    double width = 1.0;   // a
    double slope = 2.0;   // b
    double center = 0.0;  // c
};

/// Piecewise-linear hat over [left, right] peaking at `peak`; zero outside.
struct Triangular {
    double left = 0.0;
    double peak = 0.5;
    double right = 1.0;
};

using MembershipFunction = std::variant<Gaussian, GeneralizedBell, Triangular>;

inline std::size_t param_count(const MembershipFunction& mf) {
    return std::holds_alternative<Gaussian>(mf) ? 2 : 3;
}

inline std::string kind_name(const MembershipFunction& mf) {
    if (std::holds_alternative<Gaussian>(mf)) return "gaussian";
    if (std::holds_alternative<GeneralizedBell>(mf)) return "generalized-bell";
    return "triangular";
}

inline void validate(const MembershipFunction& mf) {
    if (const auto* g = std::get_if<Gaussian>(&mf)) {
        if (!(g->sigma > 0.0)) throw ValidationError("gaussian: sigma must be > 0");
    } else if (const auto* b = std::get_if<GeneralizedBell>(&mf)) {
        if (!(b->width > 0.0)) throw ValidationError("generalized-bell: width must be > 0");
        if (!(b->slope > 0.0)) throw ValidationError("generalized-bell: slope must be > 0");
    } else {
        const auto& t = std::get<Triangular>(mf);
        if (!(t.left <= t.peak && t.peak <= t.right))
            throw ValidationError("triangular: requires left <= peak <= right");
        if (!(t.left < t.right))
            throw ValidationError("triangular: requires left < right");
    }
}

/// Membership degree in [0,1].
inline double eval(const MembershipFunction& mf, double x) {
    if (const auto* g = std::get_if<Gaussian>(&mf)) {
        const double z = (x - g->center) / g->sigma;
        return std::exp(-0.5 * z * z);
    }
    if (const auto* b = std::get_if<GeneralizedBell>(&mf)) {
        const double u = std::abs((x - b->center) / b->width);
        return 1.0 / (1.0 + std::pow(u, 2.0 * b->slope));
    }
    const auto& t = std::get<Triangular>(mf);
    if (x < t.left || x > t.right) return 0.0;
    if (x == t.peak) return 1.0;
    if (x < t.peak) return (x - t.left) / (t.peak - t.left);
    return (t.right - x) / (t.right - t.peak);
}

/// Partial derivatives of the degree with respect to the parameters, in
/// declaration order (gaussian: center, sigma; bell: width, slope, center;
/// triangular: left, peak, right). Triangular kinks take the one-sided
/// derivative from the right.
inline std::array<double, 3> param_gradients(const MembershipFunction& mf, double x) {
    std::array<double, 3> grad{0.0, 0.0, 0.0};
    if (const auto* g = std::get_if<Gaussian>(&mf)) {
        const double diff = x - g->center;
        const double s2 = g->sigma * g->sigma;
        const double mu = std::exp(-0.5 * diff * diff / s2);
        grad[0] = mu * diff / s2;                       // d/d center
        grad[1] = mu * diff * diff / (s2 * g->sigma);   // d/d sigma
        return grad;
    }
    if (const auto* b = std::get_if<GeneralizedBell>(&mf)) {
        const double diff = x - b->center;
        const double u = std::abs(diff / b->width);
        const double t = std::pow(u, 2.0 * b->slope);
        const double mu = 1.0 / (1.0 + t);
        const double mu2t = mu * mu * t;
        grad[0] = 2.0 * b->slope * mu2t / b->width;                 // d/d width
        grad[1] = (u > 0.0) ? -2.0 * mu2t * std::log(u) : 0.0;      // d/d slope
        grad[2] = (diff != 0.0) ? 2.0 * b->slope * mu2t / diff : 0.0;  // d/d center
        return grad;
    }
    const auto& t = std::get<Triangular>(mf);
    if (x < t.left || x >= t.right) return grad;
    if (x >= t.peak) {  // falling segment (right-sided at the peak)
        const double den = (t.right - t.peak) * (t.right - t.peak);
        grad[1] = (t.right - x) / den;  // d/d peak
        grad[2] = (x - t.peak) / den;   // d/d right
        return grad;
    }
    const double den = (t.peak - t.left) * (t.peak - t.left);
    grad[0] = (x - t.peak) / den;   // d/d left
    grad[1] = -(x - t.left) / den;  // d/d peak
    return grad;
}

/// Parameter access by flat index, used by the trainers.
inline double get_param(const MembershipFunction& mf, std::size_t i) {
    if (const auto* g = std::get_if<Gaussian>(&mf)) return i == 0 ? g->center : g->sigma;
    if (const auto* b = std::get_if<GeneralizedBell>(&mf))
        return i == 0 ? b->width : (i == 1 ? b->slope : b->center);
    const auto& t = std::get<Triangular>(mf);
    return i == 0 ? t.left : (i == 1 ? t.peak : t.right);
}

inline void set_param(MembershipFunction& mf, std::size_t i, double v) {
    if (auto* g = std::get_if<Gaussian>(&mf)) {
        (i == 0 ? g->center : g->sigma) = v;
        return;
    }
    if (auto* b = std::get_if<GeneralizedBell>(&mf)) {
        (i == 0 ? b->width : (i == 1 ? b->slope : b->center)) = v;
        return;
    }
    auto& t = std::get<Triangular>(mf);
    (i == 0 ? t.left : (i == 1 ? t.peak : t.right)) = v;
}

/// Re-imposes the family invariants after an unconstrained parameter update:
/// positive widths are floored at 1e-6 and triangular vertices re-ordered.
inline void clamp_invariants(MembershipFunction& mf) {
    constexpr double floor = 1e-6;
    if (auto* g = std::get_if<Gaussian>(&mf)) {
        g->sigma = std::max(g->sigma, floor);
        return;
    }
    if (auto* b = std::get_if<GeneralizedBell>(&mf)) {
        b->width = std::max(b->width, floor);
        b->slope = std::max(b->slope, floor);
        return;
    }
    auto& t = std::get<Triangular>(mf);
    if (t.peak < t.left) std::swap(t.peak, t.left);
    if (t.right < t.peak) std::swap(t.right, t.peak);
    if (t.peak < t.left) std::swap(t.peak, t.left);
    if (t.right - t.left < floor) t.right = t.left + floor;
    t.peak = std::min(std::max(t.peak, t.left), t.right);
}

}  // namespace nfx::fuzzy
