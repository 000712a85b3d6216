#pragma once

// Deterministic analytic machinery: the heat-ball boundary, the conditioned-exit density
// ingredients, incomplete gamma, the min-of-Gamma cost function, and the average spheroid
// size / projection constants.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "strongpath/core_types.hpp"
#include "strongpath/errors.hpp"
#include "strongpath/quadrature.hpp"

namespace strongpath {

// Right end of the heat-ball time window, e eps^2 / delta.
[[nodiscard]] inline double heat_ball_horizon(double delta, double eps) {
    return std::numbers::e * eps * eps / delta;
}

// Heat-ball boundary sqrt(delta t ln(e eps^2 / (delta t))) on [0, e eps^2 / delta].
// Maximum eps at t = eps^2 / delta; zero at both ends.
[[nodiscard]] inline double phi(double delta, double eps, double t) {
    if (!(delta > 0.0)) throw DomainError("phi: delta must be positive");
    if (!(eps > 0.0)) throw DomainError("phi: eps must be positive");
    const double r = heat_ball_horizon(delta, eps);
    if (t < 0.0) {
        if (t < -std::numeric_limits<double>::denorm_min()) {
            throw DomainError("phi: t must be >= 0, got " + std::to_string(t));
        }
        return 0.0;
    }
    if (t >= r) {
        if (t > std::nextafter(r, std::numeric_limits<double>::infinity())) {
            throw DomainError("phi: t beyond the heat-ball window e eps^2 / delta");
        }
        return 0.0;
    }
    if (t == 0.0) return 0.0;
    const double v = delta * t * std::log(r / t);
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

// u_{alpha,beta}(t, x) = t^-alpha exp(-x^2/t) - beta^-alpha.
[[nodiscard]] inline double u_alpha_beta(const HeatBallParams& p, double x) {
    if (x < 0.0) throw DomainError("u_alpha_beta: x must be >= 0");
    const double a = p.alpha();
    return std::exp(-a * std::log(p.t()) - x * x / p.t()) - std::exp(-a * std::log(p.beta()));
}

// Positive zero of x -> u_{alpha,beta}(t, x).
[[nodiscard]] inline double rho(const HeatBallParams& p) {
    return std::sqrt(p.alpha() * p.t() * std::log(p.beta() / p.t()));
}

// P(a, x): regularized lower incomplete gamma. Series below a + 1, Lentz continued
// fraction for the complement above.
[[nodiscard]] inline double regularized_lower_gamma(double a, double x);
[[nodiscard]] inline double regularized_upper_gamma(double a, double x);

namespace detail {

constexpr int kGammaMaxIter = 100000;
constexpr double kGammaTiny = 1e-300;

inline void check_gamma_args(double a, double x) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("incomplete gamma: a must be positive");
    if (!(x >= 0.0) || std::isnan(x)) throw DomainError("incomplete gamma: x must be >= 0");
}

// sum_{n>=0} x^n / (a (a+1) ... (a+n)), so that gamma(a, x) = x^a e^-x * series.
inline double gamma_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kGammaMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    return sum;
}

// Continued fraction h with Gamma(a, x) = x^a e^-x * h.
inline double gamma_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kGammaTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kGammaMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kGammaTiny) d = kGammaTiny;
        c = b + an / c;
        if (std::abs(c) < kGammaTiny) c = kGammaTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h;
}

}  // namespace detail

inline double regularized_lower_gamma(double a, double x) {
    detail::check_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        return std::exp(log_prefactor) * detail::gamma_series(a, x);
    }
    return 1.0 - std::exp(log_prefactor) * detail::gamma_continued_fraction(a, x);
}

inline double regularized_upper_gamma(double a, double x) {
    detail::check_gamma_args(a, x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        return 1.0 - std::exp(log_prefactor) * detail::gamma_series(a, x);
    }
    return std::exp(log_prefactor) * detail::gamma_continued_fraction(a, x);
}

// gamma(a, x) = int_0^x y^(a-1) e^-y dy.
[[nodiscard]] inline double lower_incomplete_gamma(double a, double x) {
    detail::check_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        return std::exp(a * std::log(x) - x) * detail::gamma_series(a, x);
    }
    return std::exp(std::lgamma(a)) * regularized_lower_gamma(a, x);
}

// Normalization of the conditioned-position density:
// kappa = int_0^rho u(t, y) y^(2 alpha - 1) dy = gamma(alpha + 1, alpha ln(beta/t)) / (2 alpha).
[[nodiscard]] inline double kappa(const HeatBallParams& p) {
    const double a = p.alpha();
    return lower_incomplete_gamma(a + 1.0, a * std::log(p.beta() / p.t())) / (2.0 * a);
}

// Mean number of (R, V) pairs consumed by the conditioned-position rejection sampler.
[[nodiscard]] inline double expected_trials(const HeatBallParams& p) {
    const double a = p.alpha();
    const double log_ratio = std::log(p.beta() / p.t());
    const double numerator = std::exp(a * std::log(a) + a * std::log(log_ratio)) * -std::expm1(-a * log_ratio);
    return numerator / lower_incomplete_gamma(a + 1.0, a * log_ratio);
}

// F(x, a, lambda, b, mu) = E[min(x e^-A, e^-B)] with A ~ Gamma(a, lambda), B ~ Gamma(b, mu)
// independent (shape, scale).
//
// Conditioning on A = s leaves E[min(c, e^-B)] with c = x e^-s, which is closed form:
//   c P(B <= L) + (1 + mu)^-b P(B' > L),  L = s - ln x,  B' ~ Gamma(b, mu / (1 + mu)).
// The remaining integral over the law of A is done adaptively, split at the kink L = 0.
[[nodiscard]] inline double cost_F(double x, double a, double lambda, double b, double mu,
                                   const Quadrature& quad = {1e-10, 15}) {
    if (!(x > 0.0) || !(a > 0.0) || !(lambda > 0.0) || !(b > 0.0) || !(mu > 0.0)) {
        throw DomainError("cost_F: all arguments must be positive");
    }
    const double log_x = std::log(x);
    const double laplace_b = std::pow(1.0 + mu, -b);
    const double tilted_scale = mu / (1.0 + mu);

    auto inner = [&](double s) {
        const double level = s - log_x;
        if (level <= 0.0) return laplace_b;
        return std::exp(log_x - s) * regularized_lower_gamma(b, level / mu) +
               laplace_b * regularized_upper_gamma(b, level / tilted_scale);
    };
    // Integrate over v = s / lambda against the Gamma(a, 1) density.
    const double log_norm = std::lgamma(a);
    auto integrand = [&](double v) {
        if (v <= 0.0) return 0.0;
        const double density = std::exp((a - 1.0) * std::log(v) - v - log_norm);
        return density == 0.0 ? 0.0 : density * inner(lambda * v);
    };
    const double kink = std::max(0.0, log_x) / lambda;
    double total = 0.0;
    if (kink > 0.0) {
        total += integrate_endpoint_singular(integrand, 0.0, kink, quad);
    }
    total += integrate_to_infinity(integrand, kink, quad);
    return total;
}

// Average spheroid size E[phi_{delta,eps}(tau)] / eps for the exit time tau, in closed form.
[[nodiscard]] inline double eta(double delta) {
    if (!(delta >= 1.0) || !std::isfinite(delta)) throw DomainError("eta: delta must be >= 1");
    const double log_value = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e) + std::lgamma(delta) -
                             2.0 * std::lgamma(delta / 2.0) + 0.5 * delta * std::log(delta) -
                             0.5 * (delta + 1.0) * std::log(delta + 1.0) + (1.0 - delta) * std::numbers::ln2;
    return std::exp(log_value);
}

// E|pi_1(V)| for V uniform on the unit sphere of R^delta, through the spherical-coordinate
// product of Wallis integrals and the Gaussian radial moment.
[[nodiscard]] inline double mean_abs_first_coord(double delta) {
    if (!(delta >= 1.0) || std::floor(delta) != delta || !std::isfinite(delta)) {
        throw DomainError("mean_abs_first_coord: delta must be an integer >= 1");
    }
    const auto d = static_cast<long>(delta);
    if (d == 1) return 1.0;
    if (d == 2) return 2.0 / std::numbers::pi;

    // int_0^inf r^(d-1) e^(-r^2/2) dr
    double log_radial = 0.0;
    const long m = d - 1;
    if (m % 2 == 0) {
        const long k = m / 2;
        log_radial = 0.5 * std::log(std::numbers::pi / 2.0) + std::lgamma(2.0 * k + 1.0) -
                     k * std::numbers::ln2 - std::lgamma(k + 1.0);
    } else {
        const long k = (m - 1) / 2;
        log_radial = k * std::numbers::ln2 + std::lgamma(k + 1.0);
    }

    // prod_{k=0}^{d-3} W_k with W_0 = pi/2, W_1 = 1, W_n = (n-1)/n W_{n-2}.
    double log_wallis = 0.0;
    double w_prev2 = std::log(std::numbers::pi / 2.0);  // log W_0
    double w_prev1 = 0.0;                               // log W_1
    for (long k = 0; k <= d - 3; ++k) {
        double log_wk = 0.0;
        if (k == 0) {
            log_wk = w_prev2;
        } else if (k == 1) {
            log_wk = w_prev1;
        } else {
            log_wk = std::log(static_cast<double>(k - 1) / static_cast<double>(k)) + w_prev2;
            w_prev2 = w_prev1;
            w_prev1 = log_wk;
        }
        log_wallis += log_wk;
    }

    const double log_value = delta * std::numbers::ln2 - std::log(delta - 1.0) -
                             0.5 * delta * std::log(2.0 * std::numbers::pi) + log_radial + log_wallis;
    return std::exp(log_value);
}

}  // namespace strongpath
