// End-to-end tests for the baryopt binary. The executable path arrives via
// the BARYOPT_CLI_BIN environment variable set by the build.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;
};

std::string cli_bin() {
    const char* bin = std::getenv("BARYOPT_CLI_BIN");
    if (bin == nullptr) throw std::runtime_error("BARYOPT_CLI_BIN not set");
    return bin;
}

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const std::string cmd = env_prefix + "\"" + cli_bin() + "\" " + args + " 2>&1";
    CliResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) throw std::runtime_error("popen failed");
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) {
        res.output.append(buf, got);
    }
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("baryopt_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const ojson& cfg) {
    const fs::path path = dir / "config.json";
    std::ofstream out(path);
    out << cfg.dump(2);
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ojson slurp_json(const fs::path& path) { return ojson::parse(slurp(path)); }

std::vector<std::string> csv_lines(const std::string& text) {
    // split on CRLF only; embedded newlines inside quotes would break this,
    // so tests that use it avoid quoting-heavy columns
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = text.find("\r\n", pos);
        if (end == std::string::npos) break;
        lines.push_back(text.substr(pos, end - pos));
        pos = end + 2;
    }
    return lines;
}

ojson sphere_base_config() {
    ojson cfg;
    cfg["manifold"] = {{"type", "sphere"}, {"n", 2}};
    cfg["objective"] = {{"kind", "legendre9"}};
    cfg["mode"] = "blind";
    cfg["temperature"] = 0.2;
    cfg["steps"] = 200;
    cfg["seeds"] = {42};
    cfg["initial"] = {0.0, 0.0, -1.0};
    return cfg;
}

ojson oracle_config(int tail_samples = 20000) {
    ojson cfg;
    cfg["manifold"] = {{"type", "sphere"}, {"n", 2}};
    cfg["objective"] = {{"kind", "legendre9"}};
    cfg["mode"] = "oracle";
    cfg["delta"] = 0.45;
    cfg["profile"] = {{"tail_samples", tail_samples}, {"ball_samples", 2000}};
    cfg["steps"] = 200;
    cfg["seeds"] = {42};
    cfg["initial"] = {0.0, 0.0, -1.0};
    return cfg;
}

}  // namespace

TEST(CliTest, StepsZeroEmitsTrivialTrajectory) {
    const auto dir = fresh_dir("steps_zero");
    auto cfg = sphere_base_config();
    cfg["steps"] = 0;
    const auto config = write_config(dir, cfg);
    const auto res = run_cli("optimize --config \"" + config.string() + "\" --out \"" +
                             dir.string() + "\"");
    ASSERT_EQ(res.exit_code, 0) << res.output;

    const auto summary = slurp_json(dir / "summary.json");
    ASSERT_EQ(summary["runs"].size(), 1u);
    const auto& x_hat = summary["runs"][0]["x_hat"];
    EXPECT_NEAR(x_hat[0].get<double>(), 0.0, 1e-15);
    EXPECT_NEAR(x_hat[1].get<double>(), 0.0, 1e-15);
    EXPECT_NEAR(x_hat[2].get<double>(), -1.0, 1e-15);

    const auto lines = csv_lines(slurp(dir / "trajectory_seed42.csv"));
    ASSERT_EQ(lines.size(), 2u);  // header + the initial-guess row
    EXPECT_EQ(lines[1].substr(0, 2), "0,");
}

TEST(CliTest, SameSeedGivesByteIdenticalCsvs) {
    // two runs of the same resolved config, including out_dir (the embedded
    // config echoes it, so differing directories would differ in bytes)
    const auto dir = fresh_dir("identical");
    auto cfg = sphere_base_config();
    cfg["steps"] = 500;
    const auto config = write_config(dir, cfg);
    const std::string cmd =
        "optimize --config \"" + config.string() + "\" --out \"" + dir.string() + "\"";
    ASSERT_EQ(run_cli(cmd).exit_code, 0);
    const std::string trajectory_first = slurp(dir / "trajectory_seed42.csv");
    const std::string profile_first = slurp(dir / "objective_profile.csv");
    ASSERT_EQ(run_cli(cmd).exit_code, 0);
    EXPECT_EQ(trajectory_first, slurp(dir / "trajectory_seed42.csv"));
    EXPECT_EQ(profile_first, slurp(dir / "objective_profile.csv"));
}

TEST(CliTest, TrajectoryCsvFormatAndConfigEmbedding) {
    const auto dir = fresh_dir("format");
    auto cfg = sphere_base_config();
    cfg["steps"] = 50;
    const auto config = write_config(dir, cfg);
    ASSERT_EQ(
        run_cli("optimize --config \"" + config.string() + "\" --out \"" + dir.string() + "\"")
            .exit_code,
        0);

    const std::string text = slurp(dir / "trajectory_seed42.csv");
    // RFC 4180: CRLF line endings throughout
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            ASSERT_GT(i, 0u);
            EXPECT_EQ(text[i - 1], '\r');
        }
    }
    EXPECT_NE(text.find("n,x1,x2,x3,dist_to_minimizer,u,seed,config"), std::string::npos);
    // the resolved config is embedded (quoted) in the first data row and
    // echoes defaulted fields such as the kernel parameters
    EXPECT_NE(text.find("\"\"kappa\"\":20.0"), std::string::npos);
    // every data row carries the seed
    const auto lines = csv_lines(text);
    ASSERT_EQ(lines.size(), 52u);  // header + initial row + 50 recorded rows
    for (std::size_t i = 1; i < lines.size(); ++i) {
        EXPECT_NE(lines[i].find(",42,"), std::string::npos) << lines[i];
    }
}

TEST(CliTest, ReferenceSphereRunEmitsConsistentArtifacts) {
    // full-length reference run; no convergence bound here because at this
    // temperature the Gibbs measure spreads mass across both polar basins and
    // the final barycentre position is seed-dependent (the acceptance suite
    // measures that distribution over seeds)
    const auto dir = fresh_dir("reference_run");
    auto cfg = sphere_base_config();
    cfg["steps"] = 5000;
    const auto config = write_config(dir, cfg);
    const auto res = run_cli("optimize --config \"" + config.string() + "\" --out \"" +
                             dir.string() + "\"");
    ASSERT_EQ(res.exit_code, 0) << res.output;
    const auto summary = slurp_json(dir / "summary.json");
    const auto& run = summary["runs"][0];
    const double x1 = run["x_hat"][0].get<double>();
    const double x2 = run["x_hat"][1].get<double>();
    const double x3 = run["x_hat"][2].get<double>();
    EXPECT_NEAR(x1 * x1 + x2 * x2 + x3 * x3, 1.0, 1e-12);
    // the reported distance is the geodesic distance from x_hat to the
    // profiled minimizer (0,0,1)
    const double recomputed = std::atan2(std::hypot(x1, x2), x3);
    EXPECT_NEAR(run["distance_to_minimizer"].get<double>(), recomputed, 1e-9);
    EXPECT_GT(run["acceptance_rate"].get<double>(), 0.05);
    EXPECT_LT(run["acceptance_rate"].get<double>(), 0.95);
    const auto traj_lines = csv_lines(slurp(dir / "trajectory_seed42.csv"));
    EXPECT_EQ(traj_lines.size(), 5002u);  // header + initial row + 5000 steps

    // meridian cross-section of the objective: 1001 grid points, ends at U(north) = -1
    const auto profile_lines = csv_lines(slurp(dir / "objective_profile.csv"));
    ASSERT_EQ(profile_lines.size(), 1002u);
    EXPECT_EQ(profile_lines[1].substr(0, 3), "-1,");
    EXPECT_EQ(profile_lines.back().substr(0, 2), "1,");
    EXPECT_NE(profile_lines.back().find(",-1,") != std::string::npos ||
                  profile_lines.back().find(",-1") != std::string::npos,
              false);
}

TEST(CliTest, TemperaturesReportHasOrderedThresholdsAndEchoesInputs) {
    const auto dir = fresh_dir("temperatures");
    const auto config = write_config(dir, oracle_config());
    const auto res = run_cli("temperatures --config \"" + config.string() + "\" --out \"" +
                             dir.string() + "\"");
    ASSERT_EQ(res.exit_code, 0) << res.output;
    const auto out = slurp_json(dir / "temperature_report.json");
    const auto& rep = out["report"];
    EXPECT_GT(rep["t_o"].get<double>(), 0.0);
    EXPECT_GT(rep["t_delta"].get<double>(), 0.0);
    EXPECT_LT(rep["t_delta"].get<double>(), rep["t_o"].get<double>());
    // audit contract: the profile inputs are all echoed
    for (const char* key : {"mu_min", "mu_max", "rho", "u_rho", "u_delta"}) {
        EXPECT_TRUE(rep.contains(key)) << key;
        EXPECT_GT(rep[key].get<double>(), 0.0) << key;
    }
    EXPECT_NEAR(rep["delta"].get<double>(), 0.45, 1e-15);
    // defaulted fields are filled into the echoed config
    EXPECT_EQ(out["config"]["profile"]["pad"].get<double>(), 0.05);
    EXPECT_EQ(out["config"]["kernel"]["type"].get<std::string>(), "vmf");
}

TEST(CliTest, DeltaBeyondHalfConvexityRadiusIsRejected) {
    const auto dir = fresh_dir("delta_reject");
    auto cfg = oracle_config();
    cfg["delta"] = 0.8;  // r_cx/2 = pi/4 ~ 0.785 on S^2
    const auto config = write_config(dir, cfg);
    const auto res = run_cli("temperatures --config \"" + config.string() + "\" --out \"" +
                             dir.string() + "\"");
    EXPECT_NE(res.exit_code, 0);
    const auto err = ojson::parse(res.output);
    EXPECT_TRUE(err.contains("error"));
    EXPECT_FALSE(err["error"]["message"].get<std::string>().empty());
    EXPECT_FALSE(fs::exists(dir / "temperature_report.json"));
}

TEST(CliTest, InvalidConfigReportsJsonPath) {
    const auto dir = fresh_dir("invalid");
    auto cfg = sphere_base_config();
    cfg.erase("steps");
    const auto config = write_config(dir, cfg);
    const auto res = run_cli("optimize --config \"" + config.string() + "\"");
    EXPECT_NE(res.exit_code, 0);
    auto err = ojson::parse(res.output);
    EXPECT_EQ(err["error"]["config_path"].get<std::string>(), "$.steps");

    auto bad_manifold = sphere_base_config();
    bad_manifold["manifold"]["type"] = "torus";
    const auto config2 = write_config(dir, bad_manifold);
    const auto res2 = run_cli("optimize --config \"" + config2.string() + "\"");
    EXPECT_NE(res2.exit_code, 0);
    err = ojson::parse(res2.output);
    EXPECT_EQ(err["error"]["config_path"].get<std::string>(), "$.manifold.type");

    const auto res3 = run_cli("optimize --config \"" + (dir / "missing.json").string() + "\"");
    EXPECT_NE(res3.exit_code, 0);
    EXPECT_TRUE(ojson::parse(res3.output).contains("error"));
}

TEST(CliTest, SeedOverrideReplacesSeedList) {
    const auto dir = fresh_dir("seed_override");
    auto cfg = sphere_base_config();
    cfg["seeds"] = {1, 2, 3};
    cfg["steps"] = 50;
    const auto config = write_config(dir, cfg);
    const auto res = run_cli("optimize --config \"" + config.string() + "\" --out \"" +
                             dir.string() + "\" --seed-override 7");
    ASSERT_EQ(res.exit_code, 0) << res.output;
    const auto summary = slurp_json(dir / "summary.json");
    ASSERT_EQ(summary["runs"].size(), 1u);
    EXPECT_EQ(summary["runs"][0]["seed"].get<std::uint64_t>(), 7u);
    EXPECT_TRUE(fs::exists(dir / "trajectory_seed7.csv"));
    EXPECT_FALSE(fs::exists(dir / "trajectory_seed1.csv"));
    // the override is reflected in the echoed config (reproducibility closure)
    ASSERT_EQ(summary["config"]["seeds"].size(), 1u);
    EXPECT_EQ(summary["config"]["seeds"][0].get<std::uint64_t>(), 7u);
}

TEST(CliTest, ThreadsEnvironmentFanOut) {
    const auto dir = fresh_dir("threads");
    auto cfg = sphere_base_config();
    cfg["seeds"] = {5, 6};
    cfg["steps"] = 100;
    const auto config = write_config(dir, cfg);
    const auto res = run_cli(
        "optimize --config \"" + config.string() + "\" --out \"" + dir.string() + "\"",
        "BARYOPT_THREADS=2 ");
    ASSERT_EQ(res.exit_code, 0) << res.output;
    EXPECT_TRUE(fs::exists(dir / "trajectory_seed5.csv"));
    EXPECT_TRUE(fs::exists(dir / "trajectory_seed6.csv"));
    const auto summary = slurp_json(dir / "summary.json");
    // aggregation is seed-ordered regardless of worker scheduling
    EXPECT_EQ(summary["runs"][0]["seed"].get<std::uint64_t>(), 5u);
    EXPECT_EQ(summary["runs"][1]["seed"].get<std::uint64_t>(), 6u);
}

TEST(CliTest, CompareEmitsSchedulesTableAndTrajectories) {
    const auto dir = fresh_dir("compare");
    auto cfg = sphere_base_config();
    cfg["seeds"] = {11, 12};
    cfg["steps"] = 300;
    const auto config = write_config(dir, cfg);
    const auto res = run_cli("compare --config \"" + config.string() + "\" --out \"" +
                             dir.string() + "\"");
    ASSERT_EQ(res.exit_code, 0) << res.output;
    const auto cmp = slurp_json(dir / "comparison.json");
    EXPECT_EQ(cmp["annealing"].size(), 3u);  // default schedule families
    const double rate = cmp["barycentre"]["success_rate"].get<double>();
    EXPECT_GE(rate, 0.0);
    EXPECT_LE(rate, 1.0);
    EXPECT_GT(cmp["barycentre"]["median_final_distance"].get<double>(), 0.0);
    for (const auto& seed : {"11", "12"}) {
        EXPECT_TRUE(fs::exists(dir / ("barycentre_seed" + std::string(seed) + ".csv")));
        EXPECT_TRUE(
            fs::exists(dir / ("annealing_geometric_0_seed" + std::string(seed) + ".csv")));
        EXPECT_TRUE(
            fs::exists(dir / ("annealing_logarithmic_2_seed" + std::string(seed) + ".csv")));
    }
    for (const auto& entry : cmp["annealing"]) {
        EXPECT_TRUE(entry.contains("success_rate"));
        EXPECT_TRUE(entry.contains("median_best_distance"));
        EXPECT_EQ(entry["runs"].size(), 2u);
    }
    // annealing trajectories carry the extra schedule columns
    const std::string ann = slurp(dir / "annealing_geometric_0_seed11.csv");
    EXPECT_NE(ann.find("temperature,best_u"), std::string::npos);
}

TEST(CliTest, VerifyBoundsEmitsTableWithBoundColumns) {
    const auto dir = fresh_dir("verify");
    auto cfg = oracle_config(20000);
    cfg["verify"] = {{"count", 2},    {"samples", 4000}, {"thin", 5},
                     {"mesh_points", 2}, {"tangents", 2}};
    const auto config = write_config(dir, cfg);
    const auto res = run_cli("verify-bounds --config \"" + config.string() + "\" --out \"" +
                             dir.string() + "\"");
    ASSERT_EQ(res.exit_code, 0) << res.output;
    const auto lines = csv_lines(slurp(dir / "bounds_table.csv"));
    ASSERT_EQ(lines.size(), 3u);  // header + two grid rows
    EXPECT_NE(lines[0].find("wasserstein_se"), std::string::npos);
    EXPECT_NE(lines[0].find("eq3_rhs"), std::string::npos);
    EXPECT_NE(lines[0].find("eq7_rhs"), std::string::npos);
    const auto summary = slurp_json(dir / "bounds_summary.json");
    ASSERT_EQ(summary["rows"].size(), 2u);
    for (const auto& row : summary["rows"]) {
        EXPECT_GT(row["wasserstein"].get<double>(), 0.0);
        EXPECT_GT(row["wasserstein_se"].get<double>(), 0.0);
        EXPECT_GT(row["eq3_rhs"].get<double>(), 0.0);
        EXPECT_TRUE(row["t_le_t_o"].get<bool>());
        EXPECT_LE(row["temperature"].get<double>(),
                  summary["report"]["t_o"].get<double>() + 1e-12);
    }
    EXPECT_TRUE(summary.contains("wasserstein_slope"));
}
