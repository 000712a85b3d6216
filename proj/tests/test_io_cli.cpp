#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "strongpath/io.hpp"

using namespace strongpath;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

class Workdir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("strongpath_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    // Runs the CLI with `args`; stderr goes to a file in the work dir. Returns the exit status.
    int run(const std::string& args) const {
        const std::string cmd = std::string(STRONGPATH_CLI) + " " + args + " 2> " + (dir_ / "stderr.txt").string() +
                                " > " + (dir_ / "stdout.txt").string();
        const int raw = std::system(cmd.c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    }

    fs::path path(const std::string& name) const { return dir_ / name; }

    fs::path dir_;
};

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        rows.push_back(fields);
    }
    return rows;
}

}  // namespace

TEST(Numbers, SeventeenDigitsRoundTrip) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> ex(-300, 300);
    for (int k = 0; k < 20000; ++k) {
        const double v = std::ldexp(mant(gen), ex(gen));
        ASSERT_EQ(parse_double(format_double(v)), v);
    }
    for (double v : {0.0, 0.1, 1.0 / 3.0, std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max()}) {
        EXPECT_EQ(parse_double(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Numbers, RejectsGarbage) {
    EXPECT_THROW((void)parse_double("1.5x"), IoError);
    EXPECT_THROW((void)parse_double(""), IoError);
    EXPECT_THROW((void)parse_double("abc"), IoError);
}

TEST(SkeletonCsv, RoundTripIsExact) {
    RngStream g(3, 0);
    const auto sk = bessel_skeleton_integer(g, make_bessel_spec(3.0, 0.4, 0.1, true), 1.0);
    std::stringstream ss;
    write_skeleton_csv(ss, sk);
    EXPECT_EQ(ss.str().substr(0, 8), "n,u,s,y\n");
    const auto pts = read_skeleton_points_csv(ss);
    EXPECT_EQ(pts, sk.points);
}

TEST(SkeletonCsv, StepColumnsForNonIntegerPaths) {
    RngStream g(3, 1);
    const auto spec = make_bessel_spec(2.2, 0.0, 0.2, false);
    const auto path = bessel_skeleton_noninteger(g, spec, make_weights(spec, 0.1), 0.5);
    std::stringstream ss;
    write_skeleton_csv(ss, path.skeleton, path.steps);
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header, "n,u,s,y,branch,calY,calZ,pi1");
    std::string first;
    std::getline(ss, first);
    EXPECT_EQ(first.substr(first.size() - 4), ",,,,");
    ss.seekg(0);
    EXPECT_EQ(read_skeleton_points_csv(ss), path.skeleton.points);
    EXPECT_THROW(write_skeleton_csv(ss, path.skeleton, std::span(path.steps).first(1)), DomainError);
}

TEST(SkeletonCsv, MalformedInput) {
    std::stringstream empty;
    EXPECT_THROW((void)read_skeleton_points_csv(empty), IoError);
    std::stringstream bad_header("a,b,c,d\n");
    EXPECT_THROW((void)read_skeleton_points_csv(bad_header), IoError);
    std::stringstream short_row("n,u,s,y\n0,0,0\n");
    EXPECT_THROW((void)read_skeleton_points_csv(short_row), IoError);
    std::stringstream bad_value("n,u,s,y\n0,0,zero,1\n");
    EXPECT_THROW((void)read_skeleton_points_csv(bad_value), IoError);
}

TEST(SkeletonJson, RoundTripIsExact) {
    RngStream g(4, 0);
    const auto spec = make_bessel_spec(1.7, 0.25, 0.1, false);
    const auto path = bessel_skeleton_noninteger(g, spec, make_weights(spec, 0.2), 0.3);
    const auto text = skeleton_to_json(path.skeleton, path.steps).dump();
    const auto back = skeleton_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(back.kind, path.skeleton.kind);
    EXPECT_EQ(back.eps, path.skeleton.eps);
    EXPECT_EQ(back.horizon, path.skeleton.horizon);
    ASSERT_TRUE(back.spec.has_value());
    EXPECT_EQ(*back.spec, spec);
    EXPECT_EQ(back.points, path.skeleton.points);
    EXPECT_EQ(nlohmann::json::parse(text).at("steps").size(), path.steps.size());

    RngStream g2(4, 1);
    const auto bm = brownian_skeleton(g2, -0.5, 0.1, 0.2);
    const auto bm_back = skeleton_from_json(skeleton_to_json(bm));
    EXPECT_FALSE(bm_back.spec.has_value());
    EXPECT_EQ(bm_back.points, bm.points);
}

TEST(SkeletonJson, MalformedInput) {
    EXPECT_THROW((void)skeleton_from_json(nlohmann::json{{"kind", "bessel_integer"}}), IoError);
    EXPECT_THROW((void)skeleton_kind_from_string("ou"), IoError);
}

TEST(ExperimentOutputs, StatsJsonAndHistogram) {
    CostExperimentConfig cfg;
    cfg.spec = make_bessel_spec(2.0, 0.0, 0.1, true);
    cfg.T = 3.0;
    cfg.reps = 50;
    const auto st = run_cost_experiment(cfg);
    const auto j = stats_to_json(st);
    EXPECT_EQ(j.at("empirical").at("reps"), 50);
    EXPECT_NEAR(j.at("theory").at("limit").get<double>(), 24.0 / std::numbers::e, 1e-12);
    EXPECT_NEAR(j.at("theory").at("sigma2").get<double>(), 7.0 / 144.0, 1e-15);
    std::size_t total = 0;
    for (const auto& b : j.at("empirical").at("histogram")) total += b.at("count").get<std::size_t>();
    EXPECT_EQ(total, 50u);
    std::stringstream ss;
    write_histogram_csv(ss, st.histogram);
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header, "bin_lo,bin_hi,count");
}

TEST(ExperimentOutputs, SweepFooterAndBoundsFooter) {
    SweepTable t;
    t.axis = SweepAxis::wi;
    t.rows = {{0.1, 5.0, 0.5, 4.0}};
    t.wi_star = 0.25;
    std::stringstream ss;
    write_sweep_csv(ss, t);
    EXPECT_EQ(ss.str(), "axis_value,mean_N,stderr_N,theory\n0.10000000000000001,5,0.5,4\nwi_star,0.25,,\n");
    EXPECT_EQ(sweep_to_json(t).at("wi_star"), 0.25);

    TransportedBounds b;
    b.t = {0.0};
    b.lower = {1.0};
    b.mid = {2.0};
    b.upper = {3.0};
    std::stringstream bs;
    write_bounds_csv(bs, b, 0.125);
    EXPECT_EQ(bs.str(), "t,lower,mid,upper\n0,1,2,3\n# {\"P_eps\":0.125}\n");
}

TEST(ExperimentOutputs, WriteFailureIsAnIoError) {
    std::ostringstream sink;
    EXPECT_THROW(write_text("/nonexistent-dir/strongpath/out.csv", "x", sink), IoError);
    write_text("-", "hello", sink);
    EXPECT_EQ(sink.str(), "hello");
}

TEST_F(Workdir, SimulateMeetsInvariantsAndIsDeterministic) {
    const std::string args = "simulate --delta 10 --eps 0.2 --y0 0.5 --T 1 --seed 42 --out ";
    ASSERT_EQ(run(args + path("a.csv").string()), 0);
    ASSERT_EQ(run(args + path("b.csv").string()), 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    std::ifstream in(path("a.csv"));
    PathSkeleton sk;
    sk.kind = SkeletonKind::bessel_integer;
    sk.eps = 0.2;
    sk.horizon = 1.0;
    sk.spec = make_bessel_spec(10.0, 0.5, 0.2, true);
    sk.points = read_skeleton_points_csv(in);
    EXPECT_EQ(sk.points.front().y, 0.5);
    const auto v = skeleton_violation(sk);
    EXPECT_FALSE(v.has_value()) << *v;
    RngStream g(42, 0);
    EXPECT_EQ(sk.points, bessel_skeleton_integer(g, *sk.spec, 1.0).points);
}

TEST_F(Workdir, SimulateNonIntegerCsvAndJson) {
    ASSERT_EQ(run("simulate --delta 2.2 --eps 0.1 --T 0.2 --out " + path("p.csv").string()), 0);
    const auto rows = read_rows(path("p.csv"));
    ASSERT_GT(rows.size(), 2u);
    EXPECT_EQ(rows[0].size(), 8u);
    EXPECT_TRUE(rows[1][4] == "");
    EXPECT_TRUE(rows[2][4] == "integer" || rows[2][4] == "fractional");
    ASSERT_EQ(run("simulate --delta 2.2 --eps 0.1 --T 0.2 --format json --out " + path("p.json").string()), 0);
    const auto j = nlohmann::json::parse(slurp(path("p.json")));
    const auto sk = skeleton_from_json(j);
    EXPECT_EQ(sk.points.size() + 1, rows.size());
    EXPECT_EQ(j.at("spec").at("delta"), 2.2);
}

TEST_F(Workdir, BrownianModel) {
    ASSERT_EQ(run("simulate --model brownian --y0 -1 --eps 0.1 --T 0.5 --out " + path("b.csv").string()), 0);
    std::ifstream in(path("b.csv"));
    const auto pts = read_skeleton_points_csv(in);
    EXPECT_EQ(pts.front().y, -1.0);
}

TEST_F(Workdir, ConfigurationErrorsExitTwo) {
    EXPECT_EQ(run("simulate --delta 0.5"), 2);
    EXPECT_EQ(run("stats --reps 0"), 2);
    EXPECT_EQ(run("simulate --eps -1"), 2);
    EXPECT_EQ(run("simulate --T 0"), 2);
    EXPECT_EQ(run("simulate --format xml"), 2);
    EXPECT_EQ(run("simulate --no-such-flag 1"), 2);
    EXPECT_EQ(run("teleport"), 2);
    EXPECT_EQ(run("simulate --delta 2.2 --wi 0.3"), 2);
    EXPECT_EQ(run("sweep --axis wi --grid 0.1 --delta 2"), 2);
    EXPECT_EQ(run("transform --k 0"), 2);
    EXPECT_EQ(run("transform --model cev --beta -0.5"), 2);
    EXPECT_NE(slurp(path("stderr.txt")).find("beta"), std::string::npos);
}

TEST_F(Workdir, IoErrorsExitThree) {
    EXPECT_EQ(run("simulate --out /nonexistent-dir/strongpath/x.csv"), 3);
    EXPECT_EQ(run("simulate --config " + path("missing.json").string()), 3);
}

TEST_F(Workdir, JsonConfigMirrorsFlags) {
    {
        std::ofstream cfg(path("c.json"));
        cfg << R"({"delta": 3, "eps": 0.1, "y0": 0.2, "T": 0.5, "seed": 7})";
    }
    ASSERT_EQ(run("simulate --config " + path("c.json").string() + " --out " + path("a.csv").string()), 0);
    ASSERT_EQ(run("simulate --delta 3 --eps 0.1 --y0 0.2 --T 0.5 --seed 7 --out " + path("b.csv").string()), 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    {
        std::ofstream cfg(path("bad.json"));
        cfg << "{not json";
    }
    EXPECT_EQ(run("simulate --config " + path("bad.json").string()), 2);
}

TEST_F(Workdir, StatsJsonHistogramAndThreads) {
    const std::string base = "stats --delta 2 --eps 0.1 --T 3 --reps 200 --seed 5 ";
    ASSERT_EQ(run(base + "--threads 1 --out " + path("s1.json").string() + " --hist-out " + path("h.csv").string()), 0);
    ASSERT_EQ(run(base + "--threads 3 --out " + path("s3.json").string()), 0);
    EXPECT_EQ(slurp(path("s1.json")), slurp(path("s3.json")));
    const auto j = nlohmann::json::parse(slurp(path("s1.json")));
    EXPECT_NEAR(j.at("theory").at("limit").get<double>(), 8.829, 1e-3);
    EXPECT_TRUE(j.at("theory").contains("standardized_mean"));
    EXPECT_TRUE(j.at("theory").contains("standardized_var"));
    EXPECT_TRUE(j.at("empirical").contains("var_N"));
    const auto rows = read_rows(path("h.csv"));
    ASSERT_GT(rows.size(), 1u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"bin_lo", "bin_hi", "count"}));
    std::size_t total = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) total += std::stoul(rows[k][2]);
    EXPECT_EQ(total, 200u);
}

TEST_F(Workdir, SweepTables) {
    ASSERT_EQ(run("sweep --axis dimension --grid 1,2,3,4,5,6,7,8,9,10 --eps 0.2 --reps 5 --out " +
                  path("d.csv").string()),
              0);
    auto rows = read_rows(path("d.csv"));
    EXPECT_EQ(rows.size(), 11u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"axis_value", "mean_N", "stderr_N", "theory"}));
    ASSERT_EQ(run("sweep --axis wi --delta 2.2 --grid 0.05,0.1,0.2 --eps 0.2 --reps 5 --out " + path("w.csv").string()),
              0);
    rows = read_rows(path("w.csv"));
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows.back()[0], "wi_star");
    EXPECT_EQ(parse_double(rows.back()[1]), optimal_wi(2.2));
    ASSERT_EQ(run("sweep --axis inv_eps2 --delta 2 --grid 25,100 --reps 5 --format json --out " +
                  path("e.json").string()),
              0);
    EXPECT_EQ(nlohmann::json::parse(slurp(path("e.json"))).at("rows").size(), 2u);
}

TEST_F(Workdir, TransformBoundsAndPrecision) {
    ASSERT_EQ(run("transform --k 2 --theta 0.3333333333333333 --sigma 1 --x0 1 --eps 0.2 --T 2 --seed 9 --out " +
                  path("t.csv").string()),
              0);
    const auto rows = read_rows(path("t.csv"));
    ASSERT_GT(rows.size(), 3u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "lower", "mid", "upper"}));
    for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
        const double lo = parse_double(rows[k][1]);
        const double mid = parse_double(rows[k][2]);
        const double hi = parse_double(rows[k][3]);
        EXPECT_LE(lo, mid);
        EXPECT_LE(mid, hi);
    }
    std::ifstream in(path("t.csv"));
    std::string line;
    std::string footer;
    while (std::getline(in, line)) footer = line;
    ASSERT_EQ(footer.substr(0, 2), "# ");
    const double p_eps = nlohmann::json::parse(footer.substr(2)).at("P_eps").get<double>();

    const auto tr = cir_transform({2.0, 0.3333333333333333, 1.0, 1.0});
    const auto spec = tr.bessel_spec(0.2);
    RngStream g(9, 0);
    const auto path = bessel_skeleton_noninteger(g, spec, make_weights(spec, optimal_wi(spec.delta())), tr.rho(2.0));
    EXPECT_EQ(p_eps, precision_variable(tr, path.skeleton, 2.0));
    EXPECT_EQ(rows.size(), transported_bounds(tr, path.skeleton, 2.0).size() + 2);
}

TEST_F(Workdir, CevTransformHasNoPrecisionFooter) {
    ASSERT_EQ(run("transform --model cev --mu 0.05 --sigma 0.3 --beta -2 --x0 1 --eps 0.1 --T 1 --out " +
                  path("c.csv").string()),
              0);
    const std::string text = slurp(path("c.csv"));
    EXPECT_EQ(text.find('#'), std::string::npos);
    EXPECT_EQ(text.substr(0, 18), "t,lower,mid,upper\n");
}
