#pragma once

// Monte Carlo harness around the generators: renewal-count summaries, the asymptotic
// cost constants and CLT normalizations, weight selection, and parameter sweeps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "strongpath/core_types.hpp"
#include "strongpath/errors.hpp"
#include "strongpath/quadrature.hpp"
#include "strongpath/sampling.hpp"
#include "strongpath/skeletons.hpp"
#include "strongpath/special_functions.hpp"

namespace strongpath {

inline constexpr std::uint64_t kDefaultSeed = 0xB355E1;

namespace detail {

inline void require_integer_dimension(double delta, const char* who) {
    if (!(delta >= 1.0) || std::floor(delta) != delta) {
        throw DomainError(std::string(who) + ": needs an integer dimension >= 1");
    }
}

inline void require_noninteger_dimension(double delta, const char* who) {
    if (!(delta > 1.0) || std::floor(delta) == delta || !std::isfinite(delta)) {
        throw DomainError(std::string(who) + ": needs a non-integer dimension > 1");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Asymptotic cost
// ---------------------------------------------------------------------------

// lim eps^2 E[N_T] = (delta T / e) ((nu+2)/(nu+1))^(nu+2), integer dimension.
[[nodiscard]] inline double theorem1_limit(double delta, double T) {
    detail::require_integer_dimension(delta, "theorem1_limit");
    if (!(T > 0.0)) throw DomainError("theorem1_limit: T must be positive");
    const double nu = delta / 2.0 - 1.0;
    return delta * T / std::numbers::e * std::pow((nu + 2.0) / (nu + 1.0), nu + 2.0);
}

// Var(e^(1-A)) / e^2 for A ~ Gamma(nu+2, 1/(nu+1)).
[[nodiscard]] inline double theorem1_sigma2(double delta) {
    detail::require_integer_dimension(delta, "theorem1_sigma2");
    const double nu = delta / 2.0 - 1.0;
    return std::pow((nu + 1.0) / (nu + 3.0), nu + 2.0) - std::pow((nu + 1.0) / (nu + 2.0), 2.0 * nu + 4.0);
}

// Renewal description of the point count. Step durations are u_n = eps^2 M_n with i.i.d.
// arrivals M_n; mu = E[M], var_arrival = Var(M), and lim eps^2 E[N_T] / T = 1 / mu.
// sigma2 is the dimensionless variance constant of the corresponding CLT statement.
struct CostModel {
    double mu = 0.0;
    double sigma2 = 0.0;
    double var_arrival = 0.0;
    double limit_eps2_EN = 0.0;  // per unit time

    // Asymptotic standard deviation of eps^2 N_T.
    [[nodiscard]] double eps2_count_stddev(double eps, double T) const {
        return eps * std::sqrt(T * var_arrival / (mu * mu * mu));
    }

    // CLT-normalized point count; approximately N(0, 1) for small eps.
    [[nodiscard]] double standardize(std::size_t count, double eps, double T) const {
        return (eps * eps * static_cast<double>(count) - T * limit_eps2_EN) / eps2_count_stddev(eps, T);
    }
};

[[nodiscard]] inline CostModel integer_cost_model(double delta) {
    detail::require_integer_dimension(delta, "integer_cost_model");
    const double nu = delta / 2.0 - 1.0;
    CostModel m;
    m.sigma2 = theorem1_sigma2(delta);
    m.mu = std::numbers::e / delta * std::pow((nu + 1.0) / (nu + 2.0), nu + 2.0);
    m.var_arrival = std::numbers::e * std::numbers::e * m.sigma2 / (delta * delta);
    m.limit_eps2_EN = theorem1_limit(delta, 1.0);
    return m;
}

[[nodiscard]] inline CostModel brownian_cost_model() { return integer_cost_model(1.0); }

// Non-integer dimension: arrivals M = min((wi/delta_i) e^(1-A_i), (wf/delta_f) e^(1-A_f)),
// expressed through F(x, a, lambda, b, mu) = E[min(x e^-A, e^-B)].
[[nodiscard]] inline CostModel theorem2_limit(const BesselSpec& spec, const WeightPair& w,
                                              const Quadrature& quad = {1e-10, 15}) {
    detail::require_noninteger_dimension(spec.delta(), "theorem2_limit");
    if (spec.is_integer()) throw DomainError("theorem2_limit: spec is integer-flagged");
    if (w.delta_i() != spec.integer_part() || w.delta_f() != spec.fractional_part()) {
        throw DomainError("theorem2_limit: weights built for a different dimension");
    }
    const double di = w.delta_i();
    const double df = w.delta_f();
    const double nu_i = di / 2.0 - 1.0;
    const double nu_f = df / 2.0 - 1.0;
    const double x = w.wf() * di / (w.wi() * df);
    const double f1 = cost_F(x, nu_f + 2.0, 1.0 / (nu_f + 1.0), nu_i + 2.0, 1.0 / (nu_i + 1.0), quad);
    const double f2 = cost_F(x * x, nu_f + 2.0, 2.0 / (nu_f + 1.0), nu_i + 2.0, 2.0 / (nu_i + 1.0), quad);
    const double e = std::numbers::e;
    CostModel m;
    m.mu = e * w.wi() * f1 / di;
    m.sigma2 = std::max(0.0, f2 - f1 * f1);
    m.var_arrival = (e * w.wi() / di) * (e * w.wi() / di) * m.sigma2;
    m.limit_eps2_EN = di / (e * w.wi()) / f1;
    return m;
}

// Upper bound on lim eps^2 E[N_T] / T from the elementary bounds on F.
[[nodiscard]] inline double corollary1_bound(double delta, double wi) {
    detail::require_noninteger_dimension(delta, "corollary1_bound");
    const double di = std::floor(delta);
    const double df = delta - di;
    const double wf = 1.0 - 2.0 * std::sqrt(wi);
    const double nu_i = di / 2.0 - 1.0;
    const double nu_f = df / 2.0 - 1.0;
    return std::max(di / wi, df / wf) / std::numbers::e * std::pow((nu_i + 2.0) / (nu_i + 1.0), nu_i + 2.0) *
           std::pow((nu_f + 2.0) / (nu_f + 1.0), nu_f + 2.0);
}

// Weight minimizing the bound above: it balances delta_i / wi = delta_f / wf.
[[nodiscard]] inline double optimal_wi(double delta) {
    detail::require_noninteger_dimension(delta, "optimal_wi");
    const double di = std::floor(delta);
    const double df = delta - di;
    const double root = (std::sqrt(di * delta) - di) / df;
    return root * root;
}

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

struct Histogram {
    std::vector<double> edges;  // size = counts.size() + 1
    std::vector<std::size_t> counts;

    [[nodiscard]] std::size_t total() const {
        return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    }
};

[[nodiscard]] inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Freedman-Diaconis binning unless `bins` is given.
[[nodiscard]] inline Histogram make_histogram(std::span<const double> data, std::optional<std::size_t> bins = {}) {
    if (data.empty()) throw DomainError("histogram of an empty sample");
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    double hi = sorted.back();
    std::size_t nbins = 1;
    if (bins) {
        if (*bins == 0) throw DomainError("histogram needs at least one bin");
        nbins = *bins;
    } else if (hi > lo) {
        const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
        const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
        nbins = width > 0.0 ? static_cast<std::size_t>(std::ceil((hi - lo) / width)) : 1;
        nbins = std::clamp<std::size_t>(nbins, 1, 10000);
    }
    if (hi == lo) hi = lo + 1.0;
    Histogram h;
    h.edges.resize(nbins + 1);
    for (std::size_t k = 0; k <= nbins; ++k) {
        h.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(nbins);
    }
    h.edges.back() = hi;
    h.counts.assign(nbins, 0);
    for (double v : sorted) {
        auto k = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(nbins));
        h.counts[std::min(k, nbins - 1)] += 1;
    }
    return h;
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;  // unbiased; 0 for a single observation
};

[[nodiscard]] inline MeanVar mean_var(std::span<const double> xs) {
    MeanVar out;
    if (xs.empty()) return out;
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double x : xs) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    out.mean = mean;
    out.var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return out;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares y ~ intercept + slope x.
[[nodiscard]] inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line needs two equal-length samples, n >= 2");
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx == 0.0) throw DomainError("fit_line: x has zero variance");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

// ---------------------------------------------------------------------------
// Parallel repetition
// ---------------------------------------------------------------------------

// Worker count: the explicit request, else the hardware concurrency; capped by the
// SKELETON_THREADS environment variable and by the amount of work.
[[nodiscard]] inline unsigned resolve_thread_count(unsigned requested, std::size_t work_items) {
    unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("SKELETON_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(cap, &end, 10);
        if (end != cap && v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    if (work_items > 0) n = static_cast<unsigned>(std::min<std::size_t>(n, work_items));
    return std::max(1u, n);
}

// Calls body(k) for k in [0, count) on up to `threads` workers. The first exception is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t k = 0; k < count; ++k) body(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= count) return;
            try {
                body(k);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Cost experiments
// ---------------------------------------------------------------------------

struct CostExperimentConfig {
    BesselSpec spec = make_bessel_spec(1.0, 0.0, 0.1, true);
    bool brownian = false;          // use the Brownian skeleton started at spec.y0()
    std::optional<double> wi;       // non-integer only; defaults to optimal_wi(delta)
    double T = 1.0;
    std::size_t reps = 1;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t stream_offset = 0;  // rep k runs on stream stream_offset + k
    unsigned threads = 0;
    std::optional<std::size_t> bins;
};

struct RenewalStats {
    std::size_t reps = 0;
    double eps = 0.0;
    double T = 0.0;
    double mean_N = 0.0;
    double var_N = 0.0;
    std::vector<std::size_t> counts;
    std::vector<double> standardized;
    double standardized_mean = 0.0;
    double standardized_var = 0.0;
    Histogram histogram;
    CostModel model;

    [[nodiscard]] double stderr_N() const { return std::sqrt(var_N / static_cast<double>(reps)); }
    [[nodiscard]] double eps2_mean_N() const { return eps * eps * mean_N; }
    // Predicted E[N_T] from the asymptotic constant.
    [[nodiscard]] double theory_mean_N() const { return T * model.limit_eps2_EN / (eps * eps); }
};

// Kolmogorov-Smirnov distance between a sample and N(0, 1).
[[nodiscard]] inline double ks_distance_normal(std::span<const double> xs) {
    if (xs.empty()) throw DomainError("KS distance of an empty sample");
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double cdf = 0.5 * std::erfc(-sorted[k] / std::numbers::sqrt2);
        d = std::max({d, static_cast<double>(k + 1) / n - cdf, cdf - static_cast<double>(k) / n});
    }
    return d;
}

// Advisory normality check of the standardized counts at the 1% KS level. The counts are
// integers, so at coarse eps the lattice alone can trip it; callers only report the message.
[[nodiscard]] inline std::optional<std::string> normality_warning(const RenewalStats& st) {
    if (st.standardized.size() < 2) return std::nullopt;
    const double d = ks_distance_normal(st.standardized);
    const double critical = 1.63 / std::sqrt(static_cast<double>(st.standardized.size()));
    if (d <= critical) return std::nullopt;
    return "standardized counts deviate from N(0,1): KS distance " + std::to_string(d) + " > " +
           std::to_string(critical);
}

[[nodiscard]] inline std::optional<WeightPair> resolve_weights(const CostExperimentConfig& cfg) {
    if (cfg.brownian || cfg.spec.is_integer()) return std::nullopt;
    return make_weights(cfg.spec, cfg.wi.value_or(optimal_wi(cfg.spec.delta())));
}

[[nodiscard]] inline CostModel cost_model_for(const CostExperimentConfig& cfg) {
    if (cfg.brownian) return brownian_cost_model();
    if (cfg.spec.is_integer()) return integer_cost_model(cfg.spec.delta());
    return theorem2_limit(cfg.spec, *resolve_weights(cfg));
}

// Generates one path on stream (seed, stream_offset + rep) and hands it to visit(rep, skeleton, steps).
template <class Visitor>
void generate_path(const CostExperimentConfig& cfg, const std::optional<WeightPair>& weights, std::size_t rep,
                   Visitor&& visit) {
    RngStream stream(cfg.seed, cfg.stream_offset + rep);
    if (cfg.brownian) {
        const auto skel = brownian_skeleton(stream, cfg.spec.y0(), cfg.spec.eps(), cfg.T);
        visit(rep, skel, std::span<const StepRecord>{});
    } else if (cfg.spec.is_integer()) {
        const auto skel = bessel_skeleton_integer(stream, cfg.spec, cfg.T);
        visit(rep, skel, std::span<const StepRecord>{});
    } else {
        const auto path = bessel_skeleton_noninteger(stream, cfg.spec, *weights, cfg.T);
        visit(rep, path.skeleton, std::span<const StepRecord>(path.steps));
    }
}

// Runs cfg.reps independent paths. `visit` is called once per path, possibly concurrently
// from several workers, and must only touch per-rep state.
template <class Visitor>
[[nodiscard]] RenewalStats run_cost_experiment(const CostExperimentConfig& cfg, Visitor&& visit) {
    if (cfg.reps < 1) throw DomainError("run_cost_experiment: reps must be >= 1");
    if (!(cfg.T > 0.0)) throw DomainError("run_cost_experiment: T must be positive");
    const auto weights = resolve_weights(cfg);
    RenewalStats stats;
    stats.reps = cfg.reps;
    stats.eps = cfg.spec.eps();
    stats.T = cfg.T;
    stats.model = cost_model_for(cfg);
    stats.counts.assign(cfg.reps, 0);

    const unsigned threads = resolve_thread_count(cfg.threads, cfg.reps);
    parallel_for(cfg.reps, threads, [&](std::size_t rep) {
        generate_path(cfg, weights, rep, [&](std::size_t k, const PathSkeleton& skel, std::span<const StepRecord> steps) {
            stats.counts[k] = skel.n_points();
            visit(k, skel, steps);
        });
    });

    std::vector<double> as_double(stats.counts.begin(), stats.counts.end());
    const auto mv = mean_var(as_double);
    stats.mean_N = mv.mean;
    stats.var_N = mv.var;
    stats.standardized.reserve(cfg.reps);
    for (std::size_t c : stats.counts) {
        stats.standardized.push_back(stats.model.standardize(c, stats.eps, cfg.T));
    }
    const auto z = mean_var(stats.standardized);
    stats.standardized_mean = z.mean;
    stats.standardized_var = z.var;
    stats.histogram = make_histogram(as_double, cfg.bins);
    return stats;
}

[[nodiscard]] inline RenewalStats run_cost_experiment(const CostExperimentConfig& cfg) {
    return run_cost_experiment(cfg, [](std::size_t, const PathSkeleton&, std::span<const StepRecord>) {});
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis { dimension, inv_eps2, wi };

[[nodiscard]] inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::dimension: return "dimension";
        case SweepAxis::inv_eps2: return "inv_eps2";
        case SweepAxis::wi: return "wi";
    }
    return "unknown";
}

struct SweepConfig {
    SweepAxis axis = SweepAxis::dimension;
    std::vector<double> grid;
    CostExperimentConfig base;
};

struct SweepRow {
    double axis_value = 0.0;
    double mean_N = 0.0;
    double stderr_N = 0.0;
    double theory = 0.0;  // T * limit / eps^2
};

struct SweepTable {
    SweepAxis axis = SweepAxis::dimension;
    std::vector<SweepRow> rows;
    std::optional<double> wi_star;  // wi axis only
};

// One experiment per grid value; all other settings come from `base`. Grid point r uses
// streams starting at base.stream_offset + r * base.reps.
[[nodiscard]] inline SweepTable sweep(const SweepConfig& cfg) {
    if (cfg.grid.empty()) throw DomainError("sweep: grid must not be empty");
    SweepTable table;
    table.axis = cfg.axis;
    const auto& base = cfg.base;
    for (std::size_t r = 0; r < cfg.grid.size(); ++r) {
        const double v = cfg.grid[r];
        CostExperimentConfig run = base;
        run.stream_offset = base.stream_offset + r * base.reps;
        switch (cfg.axis) {
            case SweepAxis::dimension: {
                const bool integral = std::floor(v) == v;
                run.spec = make_bessel_spec(v, base.spec.y0(), base.spec.eps(), integral);
                run.brownian = false;
                if (integral) run.wi.reset();
                break;
            }
            case SweepAxis::inv_eps2: {
                if (!(v > 0.0)) throw DomainError("sweep: inv_eps2 grid values must be positive");
                run.spec = make_bessel_spec(base.spec.delta(), base.spec.y0(), 1.0 / std::sqrt(v),
                                            base.spec.is_integer());
                break;
            }
            case SweepAxis::wi: {
                if (base.spec.is_integer()) throw DomainError("sweep: the wi axis needs a non-integer dimension");
                run.wi = v;
                break;
            }
        }
        const auto stats = run_cost_experiment(run);
        table.rows.push_back({v, stats.mean_N, stats.stderr_N(), stats.theory_mean_N()});
    }
    if (cfg.axis == SweepAxis::wi) table.wi_star = optimal_wi(base.spec.delta());
    return table;
}

}  // namespace strongpath
