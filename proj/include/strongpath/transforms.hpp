#pragma once

// Diffusions written as Y_t = f(t, Z_rho(t)) for a Bessel process Z: time change, space map,
// transported +-eps bounds and the precision variable.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "strongpath/core_types.hpp"
#include "strongpath/errors.hpp"
#include "strongpath/quadrature.hpp"
#include "strongpath/skeletons.hpp"

namespace strongpath {

enum class TransformKind { cir, inhomogeneous_cir, cev, custom };

[[nodiscard]] inline const char* to_string(TransformKind k) {
    switch (k) {
        case TransformKind::cir: return "cir";
        case TransformKind::inhomogeneous_cir: return "inhomogeneous_cir";
        case TransformKind::cev: return "cev";
        case TransformKind::custom: return "custom";
    }
    return "unknown";
}

// dX = k (theta - X) dt + sigma sqrt(X) dW, X_0 = x0.
struct CirParams {
    double k = 0.0;
    double theta = 0.0;
    double sigma = 0.0;
    double x0 = 0.0;

    void validate() const {
        if (!(k * theta > 0.0) || !std::isfinite(k * theta)) throw DomainError("CIR needs k * theta > 0");
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("CIR needs sigma > 0");
        if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("CIR needs x0 >= 0");
    }

    [[nodiscard]] double dimension() const { return 4.0 * k * theta / (sigma * sigma); }
};

using SpaceMap = std::function<double(double, double)>;
using TimeMap = std::function<double(double)>;

struct TransformSpec {
    TransformKind kind = TransformKind::custom;
    SpaceMap f;         // (t, x) -> y
    TimeMap rho;        // strictly increasing, rho(0) = 0
    TimeMap rho_inv;
    TimeMap rho_prime;  // may be empty
    double delta = 0.0;
    double y0 = 0.0;
    bool monotone_in_x = false;
    std::optional<CirParams> cir;

    // The Bessel process to simulate for this model, at precision eps.
    [[nodiscard]] BesselSpec bessel_spec(double eps) const {
        return make_bessel_spec(delta, y0, eps, std::floor(delta) == delta);
    }
};

// Solves rho(t) = s for t >= 0 by bracketing, bisection and a guarded Newton polish.
[[nodiscard]] inline double invert_time_change(const TimeMap& rho, const TimeMap& rho_prime, double s,
                                               double tol = 1e-12) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("time change inverse needs s >= 0");
    if (s == 0.0) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    for (int k = 0; rho(hi) < s; ++k) {
        if (k > 200) throw HorizonError("time change does not reach s = " + std::to_string(s));
        lo = hi;
        hi *= 2.0;
    }
    const double coarse = rho_prime ? 1e-6 : tol;
    while (hi - lo > coarse * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (rho(mid) < s) lo = mid; else hi = mid;
    }
    double t = 0.5 * (lo + hi);
    if (!rho_prime) return t;
    for (int it = 0; it < 50; ++it) {
        const double g = rho(t) - s;
        if (g < 0.0) lo = t; else hi = t;
        const double d = rho_prime(t);
        double next = d > 0.0 ? t - g / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= tol * std::max(1.0, t)) return next;
        t = next;
    }
    return t;
}

// f(t, x) = e^{-kt} x^2, rho(t) = (sigma^2 / 4k)(e^{kt} - 1), delta = 4 k theta / sigma^2, y0 = sqrt(x0).
[[nodiscard]] inline TransformSpec cir_transform(const CirParams& p) {
    p.validate();
    TransformSpec spec;
    spec.kind = TransformKind::cir;
    spec.cir = p;
    const double k = p.k;
    const double s2 = p.sigma * p.sigma;
    spec.f = [k](double t, double x) { return std::exp(-k * t) * x * x; };
    spec.rho = [k, s2](double t) { return s2 / (4.0 * k) * std::expm1(k * t); };
    spec.rho_prime = [k, s2](double t) { return s2 / 4.0 * std::exp(k * t); };
    spec.rho_inv = [k, s2](double s) {
        const double arg = 4.0 * k * s / s2;
        if (!(arg > -1.0)) throw HorizonError("time change bounded above: s = " + std::to_string(s) + " is out of reach");
        return std::log1p(arg) / k;
    };
    spec.delta = p.dimension();
    spec.y0 = std::sqrt(p.x0);
    spec.monotone_in_x = true;
    return spec;
}

// dX = (a - lambda(t) X) dt + sigma sqrt(X) dW. With Lambda(t) = int_0^t lambda:
// rho(t) = (sigma^2/4) int_0^t e^{Lambda(s)} ds, f(t, x) = e^{-Lambda(t)} x^2, delta = 4a / sigma^2.
[[nodiscard]] inline TransformSpec inhomogeneous_cir_transform(double a, double sigma, std::function<double(double)> lambda,
                                                               double x0, const Quadrature& quad = {1e-10, 15}) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("inhomogeneous CIR needs a > 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("inhomogeneous CIR needs sigma > 0");
    if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("inhomogeneous CIR needs x0 >= 0");
    if (!lambda) throw DomainError("inhomogeneous CIR needs a rate function");
    const double s2 = sigma * sigma;
    auto big_lambda = [lambda, quad](double t) {
        if (t < 0.0) throw DomainError("time must be >= 0");
        return integrate_smooth(lambda, 0.0, t, quad);
    };
    TransformSpec spec;
    spec.kind = TransformKind::inhomogeneous_cir;
    spec.f = [big_lambda](double t, double x) { return std::exp(-big_lambda(t)) * x * x; };
    spec.rho_prime = [big_lambda, s2](double t) { return s2 / 4.0 * std::exp(big_lambda(t)); };
    spec.rho = [big_lambda, s2, quad](double t) {
        if (t < 0.0) throw DomainError("time must be >= 0");
        return s2 / 4.0 * integrate_smooth([&](double s) { return std::exp(big_lambda(s)); }, 0.0, t, quad);
    };
    spec.rho_inv = [rho = spec.rho, rp = spec.rho_prime](double s) { return invert_time_change(rho, rp, s); };
    spec.delta = 4.0 * a / s2;
    spec.y0 = std::sqrt(x0);
    spec.monotone_in_x = true;
    return spec;
}

// dS = mu S dt + sigma S^{1+beta} dW with beta <= -1. Z = e^{mu beta t} S^{-beta} run on the clock
// rho(t) = beta^2 sigma^2 (e^{2 mu beta t} - 1) / (2 mu beta) is a Bessel process of dimension
// 2 + 1/beta in [1, 2), so S_t = e^{mu t} Z^{-1/beta}. Valid up to the first zero of S.
[[nodiscard]] inline TransformSpec cev_transform(double mu, double sigma, double beta, double x0) {
    if (!std::isfinite(mu)) throw DomainError("CEV needs a finite drift");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("CEV needs sigma > 0");
    if (!(beta <= -1.0) || !std::isfinite(beta)) throw DomainError("CEV mapping is supported for beta <= -1");
    if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("CEV needs x0 >= 0");
    const double power = -1.0 / beta;
    const double c = beta * beta * sigma * sigma;
    const double rate = 2.0 * mu * beta;
    TransformSpec spec;
    spec.kind = TransformKind::cev;
    spec.f = [mu, power](double t, double x) { return std::exp(mu * t) * std::pow(x, power); };
    if (rate == 0.0) {
        spec.rho = [c](double t) { return c * t; };
        spec.rho_prime = [c](double) { return c; };
        spec.rho_inv = [c](double s) { return s / c; };
    } else {
        spec.rho = [c, rate](double t) { return c * std::expm1(rate * t) / rate; };
        spec.rho_prime = [c, rate](double t) { return c * std::exp(rate * t); };
        spec.rho_inv = [c, rate](double s) {
            const double arg = rate * s / c;
            if (!(arg > -1.0)) throw HorizonError("time change bounded above: s = " + std::to_string(s) + " is out of reach");
            return std::log1p(arg) / rate;
        };
    }
    spec.delta = 2.0 + 1.0 / beta;
    spec.y0 = std::pow(x0, -beta);
    spec.monotone_in_x = true;
    return spec;
}

// Any model given directly by (f, rho). A missing inverse is computed numerically.
[[nodiscard]] inline TransformSpec custom_transform(SpaceMap f, TimeMap rho, double delta, double y0, bool monotone_in_x,
                                                    TimeMap rho_inv = {}, TimeMap rho_prime = {}) {
    if (!f || !rho) throw DomainError("custom transform needs f and rho");
    TransformSpec spec;
    spec.kind = TransformKind::custom;
    spec.f = std::move(f);
    spec.rho = std::move(rho);
    spec.rho_prime = std::move(rho_prime);
    spec.rho_inv = rho_inv ? std::move(rho_inv)
                           : TimeMap([r = spec.rho, rp = spec.rho_prime](double s) { return invert_time_change(r, rp, s); });
    spec.delta = delta;
    spec.y0 = y0;
    spec.monotone_in_x = monotone_in_x;
    return spec;
}

// Per-point bounds f(t, max(y_n - eps, 0)) <= f(t, y_n) <= f(t, y_n + eps) at t = rho^{-1}(s_n),
// over skeleton points with s_n <= rho(T0).
struct TransportedBounds {
    std::vector<double> t;
    std::vector<double> lower;
    std::vector<double> mid;
    std::vector<double> upper;

    [[nodiscard]] std::size_t size() const noexcept { return t.size(); }
};

[[nodiscard]] inline TransportedBounds transported_bounds(const TransformSpec& spec, const PathSkeleton& skel, double T0) {
    if (!spec.monotone_in_x) throw MonotonicityError("transported bounds need f(t, .) nondecreasing");
    if (!(T0 > 0.0) || !std::isfinite(T0)) throw DomainError("observation window T0 must be positive");
    const double window = spec.rho(T0);
    if (skel.horizon < window) {
        throw HorizonError("skeleton horizon " + std::to_string(skel.horizon) + " is shorter than rho(T0) = " +
                           std::to_string(window));
    }
    TransportedBounds out;
    for (const auto& p : skel.points) {
        if (p.s > window) break;
        const double t = spec.rho_inv(p.s);
        out.t.push_back(t);
        out.lower.push_back(spec.f(t, std::max(p.y - skel.eps, 0.0)));
        out.mid.push_back(spec.f(t, p.y));
        out.upper.push_back(spec.f(t, p.y + skel.eps));
    }
    return out;
}

// Largest transported bound width over the window.
[[nodiscard]] inline double precision_variable(const TransformSpec& spec, const PathSkeleton& skel, double T0 = 2.0) {
    const auto b = transported_bounds(spec, skel, T0);
    double sup = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) sup = std::max(sup, b.upper[k] - b.lower[k]);
    return sup;
}

// CIR closed form 4 eps sup y_n e^{-k rho^{-1}(s_n)}. Equals the definition whenever y0 >= eps.
[[nodiscard]] inline double precision_variable_explicit(const TransformSpec& spec, const PathSkeleton& skel,
                                                        double T0 = 2.0) {
    if (spec.kind != TransformKind::cir || !spec.cir) throw DomainError("explicit precision form needs a CIR model");
    const double window = spec.rho(T0);
    if (skel.horizon < window) throw HorizonError("skeleton horizon is shorter than rho(T0)");
    double sup = 0.0;
    for (const auto& p : skel.points) {
        if (p.s > window) break;
        sup = std::max(sup, p.y * std::exp(-spec.cir->k * spec.rho_inv(p.s)));
    }
    return 4.0 * skel.eps * sup;
}

}  // namespace strongpath
