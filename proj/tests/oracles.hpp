#pragma once

// Independent reference machinery for the tests: standard-library and Boost distributions,
// Boost quadrature, and Kolmogorov-Smirnov distances. Nothing here calls the library samplers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_se(std::span<const double> xs) {
    double m = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double x : xs) {
        ++n;
        const double d = x - m;
        m += d / static_cast<double>(n);
        m2 += d * (x - m);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return {m, std::sqrt(var / static_cast<double>(n))};
}

inline double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const auto n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double c = cdf(xs[k]);
        d = std::max({d, static_cast<double>(k + 1) / n - c, c - static_cast<double>(k) / n});
    }
    return d;
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// Noncentral chi-square via its Poisson mixture of central chi-squares.
inline double noncentral_chi2(std::mt19937_64& gen, double df, double noncentrality) {
    std::size_t extra = 0;
    if (noncentrality > 0.0) extra = std::poisson_distribution<std::size_t>(noncentrality / 2.0)(gen);
    const double shape = df / 2.0 + static_cast<double>(extra);
    return std::gamma_distribution<double>(shape, 2.0)(gen);
}

// Squared Bessel process of dimension delta from y0 at time t.
inline double squared_bessel(std::mt19937_64& gen, double delta, double y0, double t) {
    return t * noncentral_chi2(gen, delta, y0 * y0 / t);
}

// Same law built as an integer-dimension part from y0 plus an independent fractional part from 0.
inline double squared_bessel_split(std::mt19937_64& gen, double delta, double y0, double t) {
    const double di = std::floor(delta);
    const double df = delta - di;
    double q = t * noncentral_chi2(gen, di, y0 * y0 / t);
    if (df > 0.0) q += std::gamma_distribution<double>(df / 2.0, 2.0 * t)(gen);
    return q;
}

// CIR value at time T: c * chi'^2(4 k theta / sigma^2, x0 e^{-kT} / c), c = sigma^2 (1 - e^{-kT}) / (4k).
inline double cir_marginal(std::mt19937_64& gen, double k, double theta, double sigma, double x0, double T) {
    const double c = sigma * sigma * -std::expm1(-k * T) / (4.0 * k);
    return c * noncentral_chi2(gen, 4.0 * k * theta / (sigma * sigma), x0 * std::exp(-k * T) / c);
}

inline double noncentral_chi2_cdf(double df, double noncentrality, double x) {
    if (x <= 0.0) return 0.0;
    return boost::math::cdf(boost::math::non_central_chi_squared(df, noncentrality), x);
}

// Finite-interval integral, tolerant of endpoint singularities.
template <class F>
double integrate(F f, double a, double b, double tol = 1e-12) {
    if (a == b) return 0.0;
    boost::math::quadrature::tanh_sinh<double> ts(15);
    return ts.integrate(f, a, b, tol);
}

template <class F>
double integrate_gk(F f, double a, double b, double tol = 1e-12) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol);
}

// Uniform sphere in R^d by normalized Gaussians; returns the first coordinate.
inline double sphere_first_coord_gaussian(std::mt19937_64& gen, int d) {
    std::normal_distribution<double> z;
    double first = z(gen);
    double norm2 = first * first;
    for (int k = 1; k < d; ++k) {
        const double v = z(gen);
        norm2 += v * v;
    }
    return first / std::sqrt(norm2);
}

// Cumulative distribution of a density on [lo, hi] tabulated at sorted points, by summing
// fixed-order Gauss rules between consecutive points (adaptive on the first piece). Returns the CDF at each point.
inline std::vector<double> cumulative_at(const std::function<double(double)>& density, double lo,
                                         std::span<const double> sorted_points, double total) {
    std::vector<double> out;
    out.reserve(sorted_points.size());
    double acc = 0.0;
    double prev = lo;
    bool first = true;
    for (double x : sorted_points) {
        if (x > prev) {
            acc += first ? integrate(density, prev, x, 1e-12)
                         : boost::math::quadrature::gauss<double, 10>::integrate(density, prev, x);
            first = false;
            prev = x;
        }
        out.push_back(acc / total);
    }
    return out;
}

inline double ks_from_cdf_values(std::span<const double> cdf_sorted) {
    const auto n = static_cast<double>(cdf_sorted.size());
    double d = 0.0;
    for (std::size_t k = 0; k < cdf_sorted.size(); ++k) {
        const double c = cdf_sorted[k];
        d = std::max({d, static_cast<double>(k + 1) / n - c, c - static_cast<double>(k) / n});
    }
    return d;
}

}  // namespace oracle
