#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli_main.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "reclab");
    std::vector<char*> argv;
    for (auto& a : args) {
        argv.push_back(a.data());
    }
    std::ostringstream out, err;
    const int code = reclab::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("reclab_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST(Cli, UnknownCommandPrintsUsage) {
    const auto r = run({"frobnicate"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("usage"), std::string::npos);
    EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, MissingConfigNamesPath) {
    const auto r = run({"bound", "--config", "/nonexistent/cfg.json"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("/nonexistent/cfg.json"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
    const auto dir = scratch("bad");
    write(dir / "v.json", R"({"version": 7})");
    EXPECT_EQ(run({"bound", "--config", (dir / "v.json").string()}).code, 2);
    write(dir / "f.json", R"({"version": 1, "n_values": [10], "typo": 1})");
    EXPECT_EQ(run({"bound", "--config", (dir / "f.json").string()}).code, 2);
    write(dir / "j.json", "{not json");
    EXPECT_EQ(run({"bound", "--config", (dir / "j.json").string()}).code, 2);
    EXPECT_EQ(run({"bound"}).code, 2);
}

TEST(Cli, NumericalGuardExitsThree) {
    const auto dir = scratch("guard");
    write(dir / "c.json", R"({"version": 1,
        "truth": {"kind": "eu", "states": 1, "index": {"knots": [0, 1], "values": [0, 1]}, "priors": [[1]]},
        "candidates": {"states": 1, "knots": [0, 0.5, 1], "value_steps": 4},
        "truncation": {"denominator": 200, "grid": 60},
        "k_values": [1], "replicates": 1, "seed": 1, "disagreement_m": 10})");
    const auto r = run({"recovery", "--config", (dir / "c.json").string(), "--out",
                        (dir / "o").string()});
    EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, WritesReportCsvAndSvg) {
    const auto dir = scratch("bound");
    write(dir / "c.json", R"({"version": 1, "V": 3, "D": 2, "delta": 0.1, "n_values": [100, 400]})");
    const auto r = run({"bound", "--config", (dir / "c.json").string(), "--out",
                        (dir / "runs").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "runs" / "report.json"));
    EXPECT_TRUE(fs::exists(dir / "runs" / "bound.svg"));
    EXPECT_EQ(slurp(dir / "runs" / "bound.csv").substr(0, 8), "n,bound\n");
    const auto report = nlohmann::json::parse(slurp(dir / "runs" / "report.json"));
    EXPECT_FALSE(report.contains("wall_seconds"));
    EXPECT_NEAR(report["results"]["values"][0].get<double>(), 0.62274, 1e-4);
}

TEST(Cli, GenThenFitRoundTrip) {
    const auto dir = scratch("genfit");
    write(dir / "gen.json", R"({"version": 1, "domain": {"box": {"d": 2}},
        "truth": {"kind": "linear", "weights": [0.3, 0.7]},
        "noise": {"constant_flip": {"theta": 0.9}}, "n": 400, "seed": 5})");
    ASSERT_EQ(run({"gen", "--config", (dir / "gen.json").string(), "--out", (dir / "g").string()})
                  .code,
              0);
    EXPECT_EQ(slurp(dir / "g" / "gen.csv").substr(0, 21), "i,u_chosen,u_rejected");
    write(dir / "fit.json", R"({"version": 1, "dataset": ")" + (dir / "g" / "dataset.jsonl").string() +
                                R"(", "family": {"linear": {"weight_steps": 10}}})");
    const auto r = run({"fit", "--config", (dir / "fit.json").string(), "--out", (dir / "f").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = nlohmann::json::parse(slurp(dir / "f" / "report.json"));
    EXPECT_LT(report["results"]["rho_to_truth"].get<double>(), 0.15);
}

TEST(Cli, SeedOverrideChangesOutputAndRerunIsIdentical) {
    const auto dir = scratch("seed");
    write(dir / "c.json", R"({"version": 1, "k_max": 5, "m": 500, "seed": 1})");
    const auto cfg = (dir / "c.json").string();
    ASSERT_EQ(run({"nonid", "--config", cfg, "--out", (dir / "a").string()}).code, 0);
    ASSERT_EQ(run({"nonid", "--config", cfg, "--out", (dir / "b").string(), "--timing"}).code, 0);
    EXPECT_EQ(slurp(dir / "a" / "nonid.csv"), slurp(dir / "b" / "nonid.csv"));
    const auto timed = nlohmann::json::parse(slurp(dir / "b" / "report.json"));
    EXPECT_TRUE(timed.contains("wall_seconds"));
    ASSERT_EQ(run({"nonid", "--config", cfg, "--out", (dir / "c").string(), "--seed", "2"}).code, 0);
    const auto seeded = nlohmann::json::parse(slurp(dir / "c" / "report.json"));
    EXPECT_EQ(seeded["seeds"]["base"].get<std::uint64_t>(), 2u);
}
