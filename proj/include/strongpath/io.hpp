#pragma once

// CSV / JSON serialization of skeletons, experiment summaries, sweep tables and
// transported bounds. Floats are written with 17 significant digits so they re-read
// bit-for-bit.

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "strongpath/core_types.hpp"
#include "strongpath/errors.hpp"
#include "strongpath/skeletons.hpp"
#include "strongpath/statistics.hpp"
#include "strongpath/transforms.hpp"

namespace strongpath {

[[nodiscard]] inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

[[nodiscard]] inline double parse_double(std::string_view text) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw IoError("not a number: '" + std::string(text) + "'");
    }
    return v;
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Skeletons
// ---------------------------------------------------------------------------

// Header `n,u,s,y`; with step records also `branch,calY,calZ,pi1` (row 0 has empty extras).
inline void write_skeleton_csv(std::ostream& os, const PathSkeleton& skel, std::span<const StepRecord> steps = {}) {
    const bool extra = !steps.empty();
    if (extra && steps.size() != skel.n_points()) throw DomainError("step records do not match the skeleton");
    os << (extra ? "n,u,s,y,branch,calY,calZ,pi1\n" : "n,u,s,y\n");
    for (std::size_t k = 0; k < skel.points.size(); ++k) {
        const auto& p = skel.points[k];
        os << p.n << ',' << format_double(p.u) << ',' << format_double(p.s) << ',' << format_double(p.y);
        if (extra) {
            if (k == 0) {
                os << ",,,,";
            } else {
                const auto& r = steps[k - 1];
                os << ',' << to_string(r.branch) << ',' << format_double(r.cal_y) << ',' << format_double(r.cal_z)
                   << ',' << format_double(r.pi1);
            }
        }
        os << '\n';
    }
}

// Reads the n,u,s,y columns; any further columns are ignored.
[[nodiscard]] inline std::vector<SkeletonPoint> read_skeleton_points_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty skeleton file");
    const auto header = detail::split_fields(line);
    if (header.size() < 4 || header[0] != "n" || header[1] != "u" || header[2] != "s" || header[3] != "y") {
        throw IoError("skeleton CSV must start with n,u,s,y");
    }
    std::vector<SkeletonPoint> points;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_fields(line);
        if (f.size() < 4) throw IoError("short skeleton row: " + line);
        SkeletonPoint p;
        std::size_t n = 0;
        const auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), n);
        if (res.ec != std::errc{}) throw IoError("bad point index: " + line);
        p.n = n;
        p.u = parse_double(f[1]);
        p.s = parse_double(f[2]);
        p.y = parse_double(f[3]);
        points.push_back(p);
    }
    return points;
}

[[nodiscard]] inline nlohmann::json spec_to_json(const BesselSpec& spec) {
    return {{"delta", spec.delta()}, {"y0", spec.y0()}, {"eps", spec.eps()}, {"is_integer", spec.is_integer()}};
}

[[nodiscard]] inline BesselSpec spec_from_json(const nlohmann::json& j) {
    return make_bessel_spec(j.at("delta").get<double>(), j.at("y0").get<double>(), j.at("eps").get<double>(),
                            j.at("is_integer").get<bool>());
}

[[nodiscard]] inline SkeletonKind skeleton_kind_from_string(std::string_view s) {
    if (s == "brownian") return SkeletonKind::brownian;
    if (s == "bessel_integer") return SkeletonKind::bessel_integer;
    if (s == "bessel_noninteger") return SkeletonKind::bessel_noninteger;
    throw IoError("unknown skeleton kind: " + std::string(s));
}

[[nodiscard]] inline nlohmann::json skeleton_to_json(const PathSkeleton& skel, std::span<const StepRecord> steps = {}) {
    nlohmann::json j;
    j["kind"] = to_string(skel.kind);
    j["eps"] = skel.eps;
    j["horizon"] = skel.horizon;
    j["spec"] = skel.spec ? spec_to_json(*skel.spec) : nlohmann::json(nullptr);
    auto& pts = j["points"] = nlohmann::json::array();
    for (const auto& p : skel.points) pts.push_back({{"n", p.n}, {"u", p.u}, {"s", p.s}, {"y", p.y}});
    if (!steps.empty()) {
        auto& st = j["steps"] = nlohmann::json::array();
        for (const auto& r : steps) {
            st.push_back({{"branch", to_string(r.branch)}, {"calY", r.cal_y}, {"calZ", r.cal_z}, {"pi1", r.pi1}});
        }
    }
    return j;
}

[[nodiscard]] inline PathSkeleton skeleton_from_json(const nlohmann::json& j) {
    PathSkeleton skel;
    try {
        skel.kind = skeleton_kind_from_string(j.at("kind").get<std::string>());
        skel.eps = j.at("eps").get<double>();
        skel.horizon = j.at("horizon").get<double>();
        if (!j.at("spec").is_null()) skel.spec = spec_from_json(j.at("spec"));
        for (const auto& p : j.at("points")) {
            skel.points.push_back({p.at("n").get<std::size_t>(), p.at("u").get<double>(), p.at("s").get<double>(),
                                   p.at("y").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed skeleton JSON: ") + e.what());
    }
    return skel;
}

// ---------------------------------------------------------------------------
// Experiment outputs
// ---------------------------------------------------------------------------

inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
    os << "bin_lo,bin_hi,count\n";
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        os << format_double(h.edges[k]) << ',' << format_double(h.edges[k + 1]) << ',' << h.counts[k] << '\n';
    }
}

[[nodiscard]] inline nlohmann::json stats_to_json(const RenewalStats& st) {
    nlohmann::json hist = nlohmann::json::array();
    for (std::size_t k = 0; k < st.histogram.counts.size(); ++k) {
        hist.push_back({{"bin_lo", st.histogram.edges[k]},
                        {"bin_hi", st.histogram.edges[k + 1]},
                        {"count", st.histogram.counts[k]}});
    }
    return {{"empirical",
             {{"reps", st.reps},
              {"mean_N", st.mean_N},
              {"var_N", st.var_N},
              {"eps2_mean_N", st.eps2_mean_N()},
              {"histogram", hist}}},
            {"theory",
             {{"limit", st.T * st.model.limit_eps2_EN},
              {"limit_eps2_EN", st.model.limit_eps2_EN},
              {"sigma2", st.model.sigma2},
              {"mean_N", st.theory_mean_N()},
              {"standardized_mean", st.standardized_mean},
              {"standardized_var", st.standardized_var}}},
            {"eps", st.eps},
            {"T", st.T}};
}

// Rows `axis_value,mean_N,stderr_N,theory`; a wi sweep ends with a `wi_star,<value>,,` row.
inline void write_sweep_csv(std::ostream& os, const SweepTable& table) {
    os << "axis_value,mean_N,stderr_N,theory\n";
    for (const auto& r : table.rows) {
        os << format_double(r.axis_value) << ',' << format_double(r.mean_N) << ',' << format_double(r.stderr_N) << ','
           << format_double(r.theory) << '\n';
    }
    if (table.wi_star) os << "wi_star," << format_double(*table.wi_star) << ",,\n";
}

[[nodiscard]] inline nlohmann::json sweep_to_json(const SweepTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"axis_value", r.axis_value}, {"mean_N", r.mean_N}, {"stderr_N", r.stderr_N}, {"theory", r.theory}});
    }
    nlohmann::json j{{"axis", to_string(table.axis)}, {"rows", rows}};
    if (table.wi_star) j["wi_star"] = *table.wi_star;
    return j;
}

// Rows `t,lower,mid,upper`, then `# {"P_eps": ...}` when a precision value is supplied.
inline void write_bounds_csv(std::ostream& os, const TransportedBounds& b, std::optional<double> p_eps = {}) {
    os << "t,lower,mid,upper\n";
    for (std::size_t k = 0; k < b.size(); ++k) {
        os << format_double(b.t[k]) << ',' << format_double(b.lower[k]) << ',' << format_double(b.mid[k]) << ','
           << format_double(b.upper[k]) << '\n';
    }
    if (p_eps) os << "# " << nlohmann::json{{"P_eps", *p_eps}}.dump() << '\n';
}

[[nodiscard]] inline nlohmann::json bounds_to_json(const TransportedBounds& b, std::optional<double> p_eps = {}) {
    nlohmann::json j{{"t", b.t}, {"lower", b.lower}, {"mid", b.mid}, {"upper", b.upper}};
    if (p_eps) j["P_eps"] = *p_eps;
    return j;
}

// Writes `content` to `path` (or stdout for "-"), throwing IoError on failure.
inline void write_text(const std::filesystem::path& path, const std::string& content, std::ostream& stdout_stream) {
    if (path == "-") {
        stdout_stream << content;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace strongpath
