#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "strongpath/errors.hpp"

namespace strongpath {

// Uniform error level of the approximation, in the units of the process state.
class Precision {
public:
    explicit Precision(double eps) : eps_(eps) {
        if (!(eps > 0.0) || !std::isfinite(eps)) {
            throw DomainError("precision eps must be positive and finite, got " + std::to_string(eps));
        }
    }

    [[nodiscard]] double value() const noexcept { return eps_; }

    friend bool operator==(const Precision&, const Precision&) = default;

private:
    double eps_;
};

// A Bessel process of dimension delta started at y0, to be approximated at precision eps.
//
// Integrality is declared by the caller. A declared-integer spec must carry an exact
// positive integer; a declared non-integer spec must not.
class BesselSpec {
public:
    BesselSpec(double delta, double y0, Precision eps, bool is_integer)
        : delta_(delta), nu_(delta / 2.0 - 1.0), y0_(y0), eps_(eps), is_integer_(is_integer) {
        if (!(delta >= 1.0) || !std::isfinite(delta)) {
            throw DomainError("Bessel dimension must satisfy delta >= 1, got " + std::to_string(delta));
        }
        if (!(y0 >= 0.0) || !std::isfinite(y0)) {
            throw DomainError("Bessel start y0 must be >= 0, got " + std::to_string(y0));
        }
        const bool integral = std::floor(delta) == delta;
        if (is_integer && !integral) {
            throw FlagMismatch("dimension declared integer but delta = " + std::to_string(delta));
        }
        if (!is_integer && integral) {
            throw FlagMismatch("dimension declared non-integer but delta = " + std::to_string(delta) +
                               " is an integer");
        }
    }

    [[nodiscard]] double delta() const noexcept { return delta_; }
    [[nodiscard]] double nu() const noexcept { return nu_; }
    [[nodiscard]] double y0() const noexcept { return y0_; }
    [[nodiscard]] double eps() const noexcept { return eps_.value(); }
    [[nodiscard]] Precision precision() const noexcept { return eps_; }
    [[nodiscard]] bool is_integer() const noexcept { return is_integer_; }

    [[nodiscard]] double integer_part() const noexcept { return std::floor(delta_); }
    [[nodiscard]] double fractional_part() const noexcept { return delta_ - std::floor(delta_); }

    friend bool operator==(const BesselSpec&, const BesselSpec&) = default;

private:
    double delta_;
    double nu_;
    double y0_;
    Precision eps_;
    bool is_integer_;
};

[[nodiscard]] inline BesselSpec make_bessel_spec(double delta, double y0, double eps, bool integer_flag) {
    return BesselSpec(delta, y0, Precision(eps), integer_flag);
}

// Spheroid-size split between the integer-dimension and fractional-dimension parts of a
// non-integer Bessel process. wf + 2 sqrt(wi) = 1 makes the per-step displacement at most eps.
class WeightPair {
public:
    WeightPair(double delta, double wi, Precision eps) {
        if (!(delta > 1.0) || std::floor(delta) == delta || !std::isfinite(delta)) {
            throw DomainError("weights need a non-integer dimension delta > 1, got " + std::to_string(delta));
        }
        if (!(wi > 0.0 && wi < 0.25)) {
            throw DomainError("wi must lie in (0, 1/4) so that wf = 1 - 2 sqrt(wi) is in (0, 1), got " +
                              std::to_string(wi));
        }
        const double e = std::numbers::e;
        const double eps2 = eps.value() * eps.value();
        delta_i_ = std::floor(delta);
        delta_f_ = delta - delta_i_;
        wi_ = wi;
        wf_ = 1.0 - 2.0 * std::sqrt(wi);
        alpha_i_ = delta_i_ / 2.0;
        alpha_f_ = delta_f_ / 2.0;
        beta_i_ = 2.0 * e * wi_ * eps2 / delta_i_;
        beta_f_ = 2.0 * e * wf_ * eps2 / delta_f_;
        if (std::abs(wf_ + 2.0 * std::sqrt(wi_) - 1.0) > 1e-12) {
            throw DomainError("weight relation wf + 2 sqrt(wi) = 1 violated");
        }
    }

    [[nodiscard]] double wi() const noexcept { return wi_; }
    [[nodiscard]] double wf() const noexcept { return wf_; }
    [[nodiscard]] double delta_i() const noexcept { return delta_i_; }
    [[nodiscard]] double delta_f() const noexcept { return delta_f_; }
    [[nodiscard]] double alpha_i() const noexcept { return alpha_i_; }
    [[nodiscard]] double alpha_f() const noexcept { return alpha_f_; }
    [[nodiscard]] double beta_i() const noexcept { return beta_i_; }
    [[nodiscard]] double beta_f() const noexcept { return beta_f_; }

private:
    double delta_i_{};
    double delta_f_{};
    double wi_{};
    double wf_{};
    double alpha_i_{};
    double alpha_f_{};
    double beta_i_{};
    double beta_f_{};
};

[[nodiscard]] inline WeightPair make_weights(double delta, double wi, Precision eps) {
    return WeightPair(delta, wi, eps);
}

[[nodiscard]] inline WeightPair make_weights(const BesselSpec& spec, double wi) {
    if (spec.is_integer()) {
        throw FlagMismatch("weights are only defined for non-integer dimensions");
    }
    return WeightPair(spec.delta(), wi, spec.precision());
}

// (alpha, beta, t) triple of the conditioned-position density; requires 0 < t < beta.
class HeatBallParams {
public:
    HeatBallParams(double alpha, double beta, double t) : alpha_(alpha), beta_(beta), t_(t) {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw DomainError("heat-ball alpha must be positive, got " + std::to_string(alpha));
        }
        if (!(beta > 0.0) || !std::isfinite(beta)) {
            throw DomainError("heat-ball beta must be positive, got " + std::to_string(beta));
        }
        if (!(t > 0.0 && t < beta)) {
            throw DomainError("heat-ball time must satisfy 0 < t < beta, got t = " + std::to_string(t) +
                              ", beta = " + std::to_string(beta));
        }
    }

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] double t() const noexcept { return t_; }

private:
    double alpha_;
    double beta_;
    double t_;
};

struct SkeletonPoint {
    std::size_t n = 0;
    double u = 0.0;  // duration of step n
    double s = 0.0;  // cumulative time
    double y = 0.0;  // state at time s

    friend bool operator==(const SkeletonPoint&, const SkeletonPoint&) = default;
};

enum class SkeletonKind { brownian, bessel_integer, bessel_noninteger };

[[nodiscard]] inline const char* to_string(SkeletonKind kind) {
    switch (kind) {
        case SkeletonKind::brownian: return "brownian";
        case SkeletonKind::bessel_integer: return "bessel_integer";
        case SkeletonKind::bessel_noninteger: return "bessel_noninteger";
    }
    return "unknown";
}

// Successive spheroid exit times and positions up to the first time s_n >= horizon.
// points[0] is (0, 0, 0, y0); n_points() is the renewal count N_T.
struct PathSkeleton {
    SkeletonKind kind = SkeletonKind::bessel_integer;
    double eps = 0.0;
    double horizon = 0.0;
    std::optional<BesselSpec> spec;  // empty for Brownian skeletons
    std::vector<SkeletonPoint> points;

    [[nodiscard]] std::size_t n_points() const noexcept { return points.empty() ? 0 : points.size() - 1; }
    [[nodiscard]] double final_time() const noexcept { return points.empty() ? 0.0 : points.back().s; }
};

}  // namespace strongpath
