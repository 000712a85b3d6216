#pragma once

// Path generators: Brownian skeleton, integer-dimension Bessel skeleton and the split
// integer/fractional Bessel skeleton for non-integer dimensions. Each returns the
// successive spheroid exit times and positions up to the first time s_n >= T; the
// approximation is the right-continuous step function through these points.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <iterator>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "strongpath/core_types.hpp"
#include "strongpath/errors.hpp"
#include "strongpath/sampling.hpp"
#include "strongpath/special_functions.hpp"

namespace strongpath {

// Everything a generator draws. The production source wraps a random stream; tests can
// script the values.
template <class S>
concept DrawSource = requires(S& s, double a, double b, double c) {
    { s.gamma(a, b) } -> std::convertible_to<double>;
    { s.rademacher() } -> std::convertible_to<int>;
    { s.sphere_first_coord(a) } -> std::convertible_to<double>;
    { s.conditioned(HeatBallParams(a, b, c)) } -> std::convertible_to<double>;
};

template <Bits64Generator G>
class RandomDraws {
public:
    explicit RandomDraws(G& gen) : gen_(&gen) {}

    double gamma(double shape, double scale) { return gamma_sample(*gen_, shape, scale); }
    int rademacher() { return strongpath::rademacher(*gen_); }
    double sphere_first_coord(double delta) { return strongpath::sphere_first_coord(*gen_, delta); }
    double conditioned(const HeatBallParams& p) { return cd_sample(*gen_, p).value; }

private:
    G* gen_;
};

enum class StepBranch { integer_exit, fractional_exit, not_applicable };

[[nodiscard]] inline const char* to_string(StepBranch b) {
    switch (b) {
        case StepBranch::integer_exit: return "integer";
        case StepBranch::fractional_exit: return "fractional";
        case StepBranch::not_applicable: return "n/a";
    }
    return "n/a";
}

// Per-step detail of the non-integer generator. The part that exited sits exactly on its
// spheroid boundary; the other part is the conditioned position.
struct StepRecord {
    StepBranch branch = StepBranch::not_applicable;
    double u = 0.0;
    double cal_y = 0.0;  // integer-dimension radial part
    double cal_z = 0.0;  // fractional-dimension part
    double pi1 = 0.0;
    double a_int = 0.0;   // Gamma draw of the integer part
    double a_frac = 0.0;  // Gamma draw of the fractional part

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct NonIntegerPath {
    PathSkeleton skeleton;
    std::vector<StepRecord> steps;  // steps[k] produced points[k + 1]
};

namespace detail {

inline void check_horizon(double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be positive and finite");
}

inline std::size_t expected_capacity(double T, double eps2_per_point) {
    const double n = T / eps2_per_point;
    if (!(n < 5e7)) return 1u << 20;
    return static_cast<std::size_t>(1.1 * n) + 16;
}

}  // namespace detail

// Brownian skeleton: u_n = eps^2 e^(1 - A_n), A_n ~ Gamma(3/2, 2); x_n = x_{n-1} + Z_n phi_{1,eps}(u_n).
template <DrawSource Source>
[[nodiscard]] PathSkeleton brownian_skeleton(Source& src, double x0, double eps, double T) {
    const Precision precision(eps);
    detail::check_horizon(T);
    PathSkeleton out;
    out.kind = SkeletonKind::brownian;
    out.eps = precision.value();
    out.horizon = T;
    out.points.reserve(detail::expected_capacity(T, eps * eps * std::numbers::e / std::pow(3.0, 1.5)));
    out.points.push_back({0, 0.0, 0.0, x0});
    const double eps2 = eps * eps;
    double s = 0.0;
    double x = x0;
    std::size_t n = 0;
    while (s < T) {
        const double a = src.gamma(1.5, 2.0);
        const int z = src.rademacher();
        const double u = eps2 * std::exp(1.0 - a);
        x += z * phi(1.0, eps, u);
        s += u;
        out.points.push_back({++n, u, s, x});
    }
    return out;
}

template <Bits64Generator G>
[[nodiscard]] PathSkeleton brownian_skeleton(G& gen, double x0, double eps, double T) {
    RandomDraws<G> draws(gen);
    return brownian_skeleton(draws, x0, eps, T);
}

// Integer dimension: u_n = (eps^2/delta) e^(1 - A_n), A_n ~ Gamma(nu+2, 1/(nu+1));
// y_n^2 = y_{n-1}^2 + 2 pi_1(V_n) y_{n-1} phi + phi^2 with phi = phi_{delta,eps}(u_n).
template <DrawSource Source>
[[nodiscard]] PathSkeleton bessel_skeleton_integer(Source& src, const BesselSpec& spec, double T) {
    if (!spec.is_integer()) {
        throw FlagMismatch("bessel_skeleton_integer needs an integer-flagged spec");
    }
    detail::check_horizon(T);
    const double delta = spec.delta();
    const double nu = spec.nu();
    const double eps = spec.eps();
    const double shape = nu + 2.0;
    const double scale = 1.0 / (nu + 1.0);
    const double time_scale = eps * eps / delta;

    PathSkeleton out;
    out.kind = SkeletonKind::bessel_integer;
    out.eps = eps;
    out.horizon = T;
    out.spec = spec;
    const double mean_arrival = std::numbers::e * std::pow((nu + 1.0) / (nu + 2.0), nu + 2.0);
    out.points.reserve(detail::expected_capacity(T, time_scale * mean_arrival));
    out.points.push_back({0, 0.0, 0.0, spec.y0()});
    double s = 0.0;
    double y = spec.y0();
    std::size_t n = 0;
    while (s < T) {
        const double a = src.gamma(shape, scale);
        const double pi1 = src.sphere_first_coord(delta);
        const double u = time_scale * std::exp(1.0 - a);
        const double radius = phi(delta, eps, u);
        y = std::sqrt(std::max(0.0, y * y + 2.0 * pi1 * y * radius + radius * radius));
        s += u;
        out.points.push_back({++n, u, s, y});
    }
    return out;
}

template <Bits64Generator G>
[[nodiscard]] PathSkeleton bessel_skeleton_integer(G& gen, const BesselSpec& spec, double T) {
    RandomDraws<G> draws(gen);
    return bessel_skeleton_integer(draws, spec, T);
}

// Non-integer dimension delta > 1, split as floor(delta) + fractional part. Each step runs
// both parts in their own spheroids (sizes eps sqrt(wi), eps sqrt(wf)) until the first exits,
// then reglues: y_n^2 = y_{n-1}^2 + 2 y_{n-1} pi_1 Y + Y^2 + Z^2.
// Draw order per step: A_int, A_frac, conditioned position, pi_1.
template <DrawSource Source>
[[nodiscard]] NonIntegerPath bessel_skeleton_noninteger(Source& src, const BesselSpec& spec,
                                                        const WeightPair& w, double T) {
    if (spec.is_integer()) {
        throw FlagMismatch("bessel_skeleton_noninteger needs a non-integer spec");
    }
    if (!(spec.delta() > 1.0)) {
        throw DomainError("bessel_skeleton_noninteger needs delta > 1");
    }
    if (w.delta_i() != spec.integer_part() || w.delta_f() != spec.fractional_part()) {
        throw DomainError("weights were built for a different dimension");
    }
    const double eps = spec.eps();
    const double expected_beta_i = 2.0 * std::numbers::e * w.wi() * eps * eps / w.delta_i();
    if (std::abs(w.beta_i() - expected_beta_i) > 1e-12 * expected_beta_i) {
        throw DomainError("weights were built for a different precision eps");
    }
    detail::check_horizon(T);

    const double delta_i = w.delta_i();
    const double delta_f = w.delta_f();
    const double nu_i = delta_i / 2.0 - 1.0;
    const double nu_f = delta_f / 2.0 - 1.0;
    const double shape_i = nu_i + 2.0;
    const double scale_i = 1.0 / (nu_i + 1.0);
    const double shape_f = nu_f + 2.0;
    const double scale_f = 1.0 / (nu_f + 1.0);
    const double eps2 = eps * eps;
    const double time_scale_i = eps2 * w.wi() / delta_i;
    const double time_scale_f = eps2 * w.wf() / delta_f;
    const double eps_i = eps * std::sqrt(w.wi());
    const double eps_f = eps * std::sqrt(w.wf());
    const double branch_threshold = std::log(w.wf() / w.wi()) + std::log(delta_i / delta_f);

    NonIntegerPath out;
    PathSkeleton& skel = out.skeleton;
    skel.kind = SkeletonKind::bessel_noninteger;
    skel.eps = eps;
    skel.horizon = T;
    skel.spec = spec;
    skel.points.reserve(detail::expected_capacity(T, std::min(time_scale_i, time_scale_f)));
    out.steps.reserve(skel.points.capacity());
    skel.points.push_back({0, 0.0, 0.0, spec.y0()});

    double s = 0.0;
    double y = spec.y0();
    std::size_t n = 0;
    while (s < T) {
        StepRecord rec;
        rec.a_int = src.gamma(shape_i, scale_i);
        rec.a_frac = src.gamma(shape_f, scale_f);
        // Ties go to the integer branch.
        if (!(rec.a_frac - rec.a_int > branch_threshold)) {
            rec.branch = StepBranch::integer_exit;
            rec.u = time_scale_i * std::exp(1.0 - rec.a_int);
            rec.cal_y = phi(delta_i, eps_i, rec.u);
            rec.cal_z = src.conditioned(HeatBallParams(w.alpha_f(), w.beta_f(), 2.0 * rec.u));
        } else {
            rec.branch = StepBranch::fractional_exit;
            rec.u = time_scale_f * std::exp(1.0 - rec.a_frac);
            rec.cal_z = phi(delta_f, eps_f, rec.u);
            rec.cal_y = src.conditioned(HeatBallParams(w.alpha_i(), w.beta_i(), 2.0 * rec.u));
        }
        rec.pi1 = src.sphere_first_coord(delta_i);
        y = std::sqrt(std::max(0.0, y * y + 2.0 * y * rec.pi1 * rec.cal_y + rec.cal_y * rec.cal_y +
                                        rec.cal_z * rec.cal_z));
        s += rec.u;
        skel.points.push_back({++n, rec.u, s, y});
        out.steps.push_back(rec);
    }
    return out;
}

template <Bits64Generator G>
[[nodiscard]] NonIntegerPath bessel_skeleton_noninteger(G& gen, const BesselSpec& spec, const WeightPair& w,
                                                        double T) {
    RandomDraws<G> draws(gen);
    return bessel_skeleton_noninteger(draws, spec, w, T);
}

// Step function value: y_n on [s_n, s_{n+1}).
[[nodiscard]] inline double evaluate(const PathSkeleton& skel, double t) {
    if (skel.points.empty()) throw DomainError("evaluate: empty skeleton");
    if (!(t >= 0.0 && t <= skel.horizon)) {
        throw DomainError("evaluate: t must lie in [0, T]");
    }
    const auto it = std::upper_bound(skel.points.begin(), skel.points.end(), t,
                                     [](double value, const SkeletonPoint& p) { return value < p.s; });
    return std::prev(it)->y;
}

// Index of the skeleton point whose time is closest to t (ties to the earlier point).
[[nodiscard]] inline std::size_t nearest_point_index(const PathSkeleton& skel, double t) {
    if (skel.points.empty()) throw DomainError("nearest_point_index: empty skeleton");
    const auto it = std::lower_bound(skel.points.begin(), skel.points.end(), t,
                                     [](const SkeletonPoint& p, double value) { return p.s < value; });
    if (it == skel.points.end()) return skel.points.size() - 1;
    const auto idx = static_cast<std::size_t>(it - skel.points.begin());
    if (idx == 0) return 0;
    return (t - skel.points[idx - 1].s <= it->s - t) ? idx - 1 : idx;
}

// +-eps tube around the step function; the lower edge is floored at 0 for Bessel paths.
struct Envelope {
    std::vector<double> times;
    std::vector<double> lower;
    std::vector<double> upper;
};

[[nodiscard]] inline Envelope envelope(const PathSkeleton& skel) {
    Envelope env;
    env.times.reserve(skel.points.size());
    env.lower.reserve(skel.points.size());
    env.upper.reserve(skel.points.size());
    const bool nonnegative = skel.kind != SkeletonKind::brownian;
    for (const auto& p : skel.points) {
        env.times.push_back(p.s);
        const double lo = p.y - skel.eps;
        env.lower.push_back(nonnegative ? std::max(lo, 0.0) : lo);
        env.upper.push_back(p.y + skel.eps);
    }
    return env;
}

// Checks the structural invariants of a generated skeleton; returns a description of the
// first violation. `slack` absorbs floating-point rounding in the step bounds.
[[nodiscard]] inline std::optional<std::string> skeleton_violation(const PathSkeleton& skel, double slack = 1e-12) {
    if (skel.points.size() < 2) return "skeleton must contain the start point and at least one step";
    const auto& first = skel.points.front();
    if (first.n != 0 || first.u != 0.0 || first.s != 0.0) return "first point must be (0, 0, 0, y0)";
    const std::size_t last = skel.points.size() - 1;
    for (std::size_t k = 1; k <= last; ++k) {
        const auto& prev = skel.points[k - 1];
        const auto& cur = skel.points[k];
        if (cur.n != k) return "point index mismatch at " + std::to_string(k);
        if (!(cur.u > 0.0)) return "non-positive step duration at " + std::to_string(k);
        // u_n > 0 is the strict increase; a fractional exit can be shorter than one ulp of s.
        if (!(cur.s >= prev.s)) return "times decreasing at " + std::to_string(k);
        if (cur.s != prev.s + cur.u) return "s_n != s_{n-1} + u_n at " + std::to_string(k);
        if (k < last && !(cur.s < skel.horizon)) return "stopping rule violated before the last point";
        if (skel.kind != SkeletonKind::brownian && !(cur.y >= 0.0)) return "negative state at " + std::to_string(k);
        const double jump = std::abs(cur.y - prev.y);
        double bound = skel.eps;
        if (skel.kind == SkeletonKind::brownian) {
            bound = phi(1.0, skel.eps, cur.u);
        } else if (skel.kind == SkeletonKind::bessel_integer && skel.spec) {
            bound = phi(skel.spec->delta(), skel.eps, cur.u);
        }
        if (jump > bound + slack) return "step bound violated at " + std::to_string(k);
    }
    if (!(skel.points.back().s >= skel.horizon)) return "last time does not reach the horizon";
    return std::nullopt;
}

}  // namespace strongpath
