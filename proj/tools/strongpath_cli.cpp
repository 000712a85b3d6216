// strongpath: simulate skeletons, run cost experiments and sweeps, transport bounds.
//
//   strongpath simulate  --delta 10 --eps 0.2 --y0 0.5 --T 1 --seed 42 --out path.csv
//   strongpath stats     --delta 2 --eps 0.05 --T 3 --reps 10000 --out stats.json --hist-out hist.csv
//   strongpath sweep     --axis dimension --grid 1,2,3,4 --eps 0.05 --reps 200
//   strongpath transform --k 2 --theta 0.3333333333 --sigma 1 --x0 1 --eps 0.2 --T 2
//
// Exit codes: 0 ok, 2 invalid configuration, 3 I/O failure.

#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "strongpath/strongpath.hpp"

namespace sp = strongpath;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

// Flat JSON object whose keys mirror the long flag names.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            input >> j;
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : j.items()) {
            CLI::ConfigItem item;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
            } else if (value.is_string()) {
                item.inputs.push_back(value.get<std::string>());
            } else {
                item.inputs.push_back(value.dump());
            }
            items.push_back(std::move(item));
        }
        return items;
    }
};

struct RunConfig {
    std::string command;
    double delta = 1.0;
    double eps = 0.1;
    double y0 = 0.0;
    double T = 1.0;
    std::size_t reps = 1000;
    std::uint64_t seed = sp::kDefaultSeed;
    std::optional<double> wi;
    std::string model;
    std::string axis = "dimension";
    std::vector<double> grid;
    double k = 2.0;
    double theta = 1.0 / 3.0;
    double sigma = 1.0;
    double x0 = 1.0;
    double mu = 0.0;
    double beta = -2.0;
    unsigned threads = 0;
    std::optional<std::size_t> bins;
    std::string out = "-";
    std::string hist_out;
    std::string format;
};

// The integer flag follows the numeric value typed for --delta.
sp::BesselSpec spec_from(const RunConfig& c) {
    return sp::make_bessel_spec(c.delta, c.y0, c.eps, std::floor(c.delta) == c.delta);
}

sp::CostExperimentConfig experiment_from(const RunConfig& c) {
    sp::CostExperimentConfig cfg;
    cfg.brownian = c.model == "brownian";
    cfg.spec = cfg.brownian ? sp::make_bessel_spec(1.0, std::abs(c.y0), c.eps, true) : spec_from(c);
    cfg.wi = c.wi;
    cfg.T = c.T;
    cfg.reps = c.reps;
    cfg.seed = c.seed;
    cfg.threads = c.threads;
    cfg.bins = c.bins;
    return cfg;
}

std::string format_or(const RunConfig& c, const char* fallback) {
    const std::string f = c.format.empty() ? fallback : c.format;
    if (f != "csv" && f != "json") throw sp::DomainError("--format must be csv or json");
    return f;
}

void cmd_simulate(const RunConfig& c) {
    if (!(c.T > 0.0)) throw sp::DomainError("--T must be positive");
    const auto format = format_or(c, "csv");
    sp::RngStream stream(c.seed, 0);
    sp::PathSkeleton skel;
    std::vector<sp::StepRecord> steps;
    if (c.model == "brownian") {
        skel = sp::brownian_skeleton(stream, c.y0, c.eps, c.T);
    } else {
        const auto spec = spec_from(c);
        if (spec.is_integer()) {
            skel = sp::bessel_skeleton_integer(stream, spec, c.T);
        } else {
            auto path = sp::bessel_skeleton_noninteger(stream, spec,
                                                       sp::make_weights(spec, c.wi.value_or(sp::optimal_wi(c.delta))), c.T);
            skel = std::move(path.skeleton);
            steps = std::move(path.steps);
        }
    }
    std::ostringstream os;
    if (format == "csv") {
        sp::write_skeleton_csv(os, skel, steps);
    } else {
        os << sp::skeleton_to_json(skel, steps).dump(2) << '\n';
    }
    sp::write_text(c.out, os.str(), std::cout);
}

void cmd_stats(const RunConfig& c) {
    const auto format = format_or(c, "json");
    const auto stats = sp::run_cost_experiment(experiment_from(c));
    std::ostringstream hist;
    sp::write_histogram_csv(hist, stats.histogram);
    if (format == "json") {
        sp::write_text(c.out, sp::stats_to_json(stats).dump(2) + "\n", std::cout);
    } else {
        sp::write_text(c.out, hist.str(), std::cout);
    }
    if (!c.hist_out.empty()) sp::write_text(c.hist_out, hist.str(), std::cout);
}

void cmd_sweep(const RunConfig& c) {
    const auto format = format_or(c, "csv");
    sp::SweepConfig cfg;
    if (c.axis == "dimension") {
        cfg.axis = sp::SweepAxis::dimension;
    } else if (c.axis == "inv_eps2") {
        cfg.axis = sp::SweepAxis::inv_eps2;
    } else if (c.axis == "wi") {
        cfg.axis = sp::SweepAxis::wi;
    } else {
        throw sp::DomainError("--axis must be dimension, inv_eps2 or wi");
    }
    cfg.grid = c.grid;
    if (cfg.grid.empty()) throw sp::DomainError("--grid must not be empty");
    RunConfig base = c;
    if (cfg.axis == sp::SweepAxis::dimension) base.delta = std::floor(c.grid.front());
    cfg.base = experiment_from(base);
    const auto table = sp::sweep(cfg);
    std::ostringstream os;
    if (format == "csv") {
        sp::write_sweep_csv(os, table);
    } else {
        os << sp::sweep_to_json(table).dump(2) << '\n';
    }
    sp::write_text(c.out, os.str(), std::cout);
}

void cmd_transform(const RunConfig& c) {
    const auto format = format_or(c, "csv");
    const std::string model = c.model.empty() ? "cir" : c.model;
    sp::TransformSpec tr;
    if (model == "cir") {
        tr = sp::cir_transform({c.k, c.theta, c.sigma, c.x0});
    } else if (model == "cev") {
        tr = sp::cev_transform(c.mu, c.sigma, c.beta, c.x0);
    } else {
        throw sp::DomainError("--model for transform must be cir or cev");
    }
    if (!(c.T > 0.0)) throw sp::DomainError("--T must be positive");
    const auto spec = tr.bessel_spec(c.eps);
    const double horizon = tr.rho(c.T);
    sp::RngStream stream(c.seed, 0);
    sp::PathSkeleton skel;
    if (spec.is_integer()) {
        skel = sp::bessel_skeleton_integer(stream, spec, horizon);
    } else {
        skel = sp::bessel_skeleton_noninteger(stream, spec, sp::make_weights(spec, c.wi.value_or(sp::optimal_wi(spec.delta()))),
                                              horizon)
                   .skeleton;
    }
    const auto bounds = sp::transported_bounds(tr, skel, c.T);
    std::optional<double> p_eps;
    if (tr.kind == sp::TransformKind::cir) p_eps = sp::precision_variable(tr, skel, c.T);
    std::ostringstream os;
    if (format == "csv") {
        sp::write_bounds_csv(os, bounds, p_eps);
    } else {
        os << sp::bounds_to_json(bounds, p_eps).dump(2) << '\n';
    }
    sp::write_text(c.out, os.str(), std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Epsilon-strong skeletons of Brownian and Bessel paths"};
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file whose keys mirror the flags");

    RunConfig c;
    app.add_option("command", c.command, "simulate | stats | sweep | transform")
        ->required()
        ->check(CLI::IsMember({"simulate", "stats", "sweep", "transform"}));
    app.add_option("--delta", c.delta, "Bessel dimension (>= 1); an integral value selects the integer algorithm");
    app.add_option("--eps", c.eps, "precision");
    app.add_option("--y0", c.y0, "start of the Bessel (or Brownian) path");
    app.add_option("--T", c.T, "time horizon; observation window T0 for transform");
    app.add_option("--reps", c.reps, "repetitions");
    app.add_option("--seed", c.seed, "random seed")->capture_default_str();
    app.add_option("--wi", c.wi, "integer-part weight in (0, 1/4); default minimizes the cost bound");
    app.add_option("--model", c.model, "bessel | brownian (simulate, stats), cir | cev (transform)");
    app.add_option("--axis", c.axis, "sweep axis: dimension | inv_eps2 | wi");
    app.add_option("--grid", c.grid, "sweep grid, comma separated")->delimiter(',');
    app.add_option("--k", c.k, "CIR mean reversion");
    app.add_option("--theta", c.theta, "CIR long-run level");
    app.add_option("--sigma", c.sigma, "volatility");
    app.add_option("--x0", c.x0, "model start value");
    app.add_option("--mu", c.mu, "CEV drift");
    app.add_option("--beta", c.beta, "CEV elasticity (<= -1)");
    app.add_option("--threads", c.threads, "worker threads (0: hardware; capped by SKELETON_THREADS)");
    app.add_option("--bins", c.bins, "histogram bins (default: Freedman-Diaconis)");
    app.add_option("--out", c.out, "output file, - for stdout");
    app.add_option("--hist-out", c.hist_out, "stats: also write the histogram CSV here");
    app.add_option("--format", c.format, "csv | json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::FileError& e) {
        std::cerr << "strongpath: " << e.what() << '\n';
        return kExitIo;
    } catch (const CLI::ParseError& e) {
        std::cerr << "strongpath: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (c.command == "simulate") cmd_simulate(c);
        else if (c.command == "stats") cmd_stats(c);
        else if (c.command == "sweep") cmd_sweep(c);
        else cmd_transform(c);
    } catch (const sp::IoError& e) {
        std::cerr << "strongpath: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::logic_error& e) {
        std::cerr << "strongpath: invalid configuration: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "strongpath: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
