#pragma once

// Seeded generation of every random primitive the skeleton algorithms consume.
//
// All variates are produced from raw 64-bit words by code in this header (no
// implementation-defined <random> distributions), so a (seed, stream_id) pair
// replays bit-for-bit on any conforming toolchain.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "strongpath/core_types.hpp"
#include "strongpath/errors.hpp"
#include "strongpath/special_functions.hpp"

namespace strongpath {

// One independent random stream. Identical (seed, stream_id) give identical sequences.
// Single owner: do not share one stream between threads.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                          0x5eedu};
        engine_.seed(seq);
    }

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

template <class G>
concept Bits64Generator = std::uniform_random_bit_generator<G> &&
                          std::same_as<typename G::result_type, std::uint64_t> && (G::min() == 0) &&
                          (G::max() == std::numeric_limits<std::uint64_t>::max());

// Uniform on the open interval (0, 1), 53-bit resolution.
template <Bits64Generator G>
[[nodiscard]] double uniform_open(G& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal by the polar method (no cached second variate, so draws stay stateless).
template <Bits64Generator G>
[[nodiscard]] double standard_normal(G& gen) {
    for (;;) {
        const double v1 = 2.0 * uniform_open(gen) - 1.0;
        const double v2 = 2.0 * uniform_open(gen) - 1.0;
        const double s = v1 * v1 + v2 * v2;
        if (s < 1.0 && s > 0.0) {
            return v1 * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

// Gamma(shape, scale): Marsaglia-Tsang squeeze for shape >= 1, boosted by U^(1/shape) below.
template <Bits64Generator G>
[[nodiscard]] double gamma_sample(G& gen, double shape, double scale) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma_sample: shape must be positive");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("gamma_sample: scale must be positive");
    if (shape < 1.0) {
        const double boosted = gamma_sample(gen, shape + 1.0, 1.0);
        return scale * boosted * std::pow(uniform_open(gen), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = standard_normal(gen);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_open(gen);
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return scale * d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return scale * d * v;
    }
}

template <Bits64Generator G>
[[nodiscard]] double beta_sample(G& gen, double a, double b) {
    const double x = gamma_sample(gen, a, 1.0);
    const double y = gamma_sample(gen, b, 1.0);
    return x / (x + y);
}

template <Bits64Generator G>
[[nodiscard]] int rademacher(G& gen) {
    return (gen() >> 63) != 0 ? 1 : -1;
}

// First coordinate of a uniform point on the unit sphere of R^delta, sampled from its
// marginal law 1 - 2 Beta((delta-1)/2, (delta-1)/2). delta = 2 (arcsine) and delta = 3
// (uniform) use their direct inverse-CDF forms.
template <Bits64Generator G>
[[nodiscard]] double sphere_first_coord(G& gen, double delta) {
    if (!(delta >= 1.0) || std::floor(delta) != delta || !std::isfinite(delta)) {
        throw DomainError("sphere_first_coord: delta must be an integer >= 1");
    }
    if (delta == 1.0) return static_cast<double>(rademacher(gen));
    if (delta == 2.0) return std::cos(std::numbers::pi * uniform_open(gen));
    if (delta == 3.0) return 2.0 * uniform_open(gen) - 1.0;
    const double half = 0.5 * (delta - 1.0);
    return 1.0 - 2.0 * beta_sample(gen, half, half);
}

struct CdSample {
    double value = 0.0;      // in (0, rho)
    std::size_t trials = 0;  // number of (R, V) pairs consumed, >= 1
};

// Rejection sampler for the density kappa^-1 u_{alpha,beta}(t, x) x^(2 alpha - 1) on [0, rho].
// Proposals rho V^(1/(2 alpha)); accept when u(t, 0) R <= u(t, proposal). Consumes R then V.
template <Bits64Generator G>
[[nodiscard]] CdSample cd_sample(G& gen, const HeatBallParams& p) {
    const double r = rho(p);
    const double t = p.t();
    const double inv_two_alpha = 0.5 / p.alpha();
    // Both sides divided by t^-alpha: u / t^-alpha = exp(-x^2/t) - (t/beta)^alpha.
    const double floor_term = std::exp(p.alpha() * std::log(t / p.beta()));
    const double top = 1.0 - floor_term;
    auto root = [inv_two_alpha](double v) {
        if (inv_two_alpha == 0.5) return std::sqrt(v);
        if (inv_two_alpha == 1.0) return v;
        return std::pow(v, inv_two_alpha);
    };
    CdSample out;
    for (;;) {
        ++out.trials;
        const double rr = uniform_open(gen);
        const double vv = uniform_open(gen);
        const double x = r * root(vv);
        const double y = x * x / t;
        const double lhs = top * rr + floor_term;
        // 1 - y <= e^-y <= 1 / (1 + y) decides most proposals without the exponential.
        if (lhs <= 1.0 - y) {
            out.value = x;
            return out;
        }
        if (lhs * (1.0 + y) > 1.0) continue;
        if (lhs <= std::exp(-y)) {
            out.value = x;
            return out;
        }
    }
}

// Position at time t of a delta-dimensional Bessel process from 0, conditioned on not having
// left the heat ball phi_{delta, eps_scaled} by t. Runs the rejection sampler with
// alpha = delta/2, beta = 2 e eps^2 / delta at time argument 2t.
template <Bits64Generator G>
[[nodiscard]] double conditioned_bessel_position(G& gen, double delta, double eps_scaled, double t) {
    if (!(delta > 0.0) || !(eps_scaled > 0.0)) {
        throw DomainError("conditioned_bessel_position: delta and eps must be positive");
    }
    const double window = heat_ball_horizon(delta, eps_scaled);
    if (!(t > 0.0 && t < window)) {
        throw DomainError("conditioned_bessel_position: t must lie in (0, e eps^2 / delta)");
    }
    const HeatBallParams p(delta / 2.0, 2.0 * std::numbers::e * eps_scaled * eps_scaled / delta, 2.0 * t);
    return cd_sample(gen, p).value;
}

}  // namespace strongpath
