#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "skidsim/cli.hpp"
#include "skidsim/errors.hpp"
#include "temp_dir.hpp"

using namespace skidsim;
using nlohmann::json;

namespace {

int cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "skidsim");
  return cli::run(args);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path write_config(const TempDir& dir, const std::string& name,
                                   const std::string& body) {
  const auto path = dir / name;
  std::ofstream(path) << "schema: skidsim.scenario/1\n" << body;
  return path;
}

int count_files(const std::filesystem::path& dir) {
  int n = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++n;
  return n;
}

const char* kShortStep = "id: s\nduration: 5\nterrain: gravel\nprofile: {type: step}\n";

}  // namespace

TEST(SeedList, Forms) {
  EXPECT_EQ(cli::parse_seed_list("1-3"), (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(cli::parse_seed_list("4"), (std::vector<std::uint64_t>{4}));
  EXPECT_EQ(cli::parse_seed_list("1-2,7,9-10"), (std::vector<std::uint64_t>{1, 2, 7, 9, 10}));
  EXPECT_THROW(cli::parse_seed_list("5-1"), ConfigError);
  EXPECT_THROW(cli::parse_seed_list("a"), ConfigError);
  EXPECT_THROW(cli::parse_seed_list(""), ConfigError);
  EXPECT_THROW(cli::parse_seed_list("1,,2"), ConfigError);
}

TEST(CliRun, WritesTraceMetaAndMetrics) {
  TempDir tmp;
  const auto cfg = write_config(tmp, "c.yaml", kShortStep);
  ASSERT_EQ(cli_run({"run", "-c", cfg.string(), "-o", (tmp / "out").string()}), cli::kExitOk);
  EXPECT_TRUE(std::filesystem::exists(tmp / "out/trace.csv"));
  EXPECT_TRUE(std::filesystem::exists(tmp / "out/meta.json"));
  EXPECT_TRUE(std::filesystem::exists(tmp / "out/metrics.csv"));
  const json metrics = json::parse(slurp(tmp / "out/metrics.json"));
  ASSERT_TRUE(metrics.contains("s"));
  EXPECT_FALSE(metrics["s"]["step"].is_null());
  EXPECT_DOUBLE_EQ(metrics["s"]["envelope"]["rho_bound"].get<double>(), 2.4);
  const std::string csv = slurp(tmp / "out/trace.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "t,v_rd,v_ld,v_r,v_l,e_r,e_l,u_r,u_l,phi_hat_r,phi_hat_l,phi_norm_r,phi_norm_l,s_r,s_l,x,y,"
            "theta");
}

TEST(CliRun, JsonFormatSkipsCsvMetrics) {
  TempDir tmp;
  const auto cfg = write_config(tmp, "c.yaml", kShortStep);
  ASSERT_EQ(cli_run({"run", "-c", cfg.string(), "-o", (tmp / "o").string(), "--format", "json"}), 0);
  EXPECT_FALSE(std::filesystem::exists(tmp / "o/metrics.csv"));
  EXPECT_TRUE(std::filesystem::exists(tmp / "o/metrics.json"));
}

TEST(CliRun, ByteIdenticalReruns) {
  TempDir tmp;
  const auto cfg = write_config(tmp, "c.yaml", kShortStep);
  ASSERT_EQ(cli_run({"run", "-c", cfg.string(), "-o", (tmp / "a").string()}), 0);
  ASSERT_EQ(cli_run({"run", "-c", cfg.string(), "-o", (tmp / "b").string()}), 0);
  EXPECT_EQ(slurp(tmp / "a/trace.csv"), slurp(tmp / "b/trace.csv"));
  EXPECT_EQ(slurp(tmp / "a/metrics.json"), slurp(tmp / "b/metrics.json"));
  ASSERT_EQ(cli_run({"run", "-c", cfg.string(), "-o", (tmp / "c").string(), "--seed", "2"}), 0);
  EXPECT_NE(slurp(tmp / "a/trace.csv"), slurp(tmp / "c/trace.csv"));
}

TEST(CliRun, ConfigErrorsExitTwo) {
  TempDir tmp;
  const auto bad = write_config(tmp, "bad.yaml", "id: x\nduration: 0\n");
  EXPECT_EQ(cli_run({"run", "-c", bad.string(), "-o", (tmp / "o").string()}), cli::kExitConfig);
  EXPECT_FALSE(std::filesystem::exists(tmp / "o"));
  EXPECT_EQ(cli_run({"run", "-c", (tmp / "missing.yaml").string()}), cli::kExitConfig);
  const auto teleop = write_config(tmp, "t.yaml", "profile: {type: teleop}\n");
  EXPECT_EQ(cli_run({"run", "-c", teleop.string(), "-o", (tmp / "o").string()}), cli::kExitConfig);
  EXPECT_EQ(cli_run({"run"}), cli::kExitConfig);
  EXPECT_EQ(cli_run({"frobnicate"}), cli::kExitConfig);
}

TEST(CliRun, DivergedRunExitsOne) {
  TempDir tmp;
  const auto cfg = write_config(tmp, "c.yaml",
                                "duration: 20\nplant: {g_right: 10000, g_left: 10000}\n"
                                "profile: {type: step}\n");
  EXPECT_EQ(cli_run({"run", "-c", cfg.string(), "-o", (tmp / "o").string()}), cli::kExitFault);
  const json meta = json::parse(slurp(tmp / "o/meta.json"));
  EXPECT_TRUE(meta["faulted"].get<bool>());
}

TEST(CliSweep, RunsAndAggregates) {
  TempDir tmp;
  const auto cfg = write_config(tmp, "c.yaml", kShortStep);
  ASSERT_EQ(cli_run({"sweep", "-c", cfg.string(), "-o", (tmp / "o").string(), "--seeds", "1-2",
                     "--terrains", "dry_asphalt,ice", "-j", "2", "--traces"}),
            0);
  const std::string runs = slurp(tmp / "o/runs.csv");
  EXPECT_EQ(std::count(runs.begin(), runs.end(), '\n'), 5);
  const std::string agg = slurp(tmp / "o/aggregates.csv");
  EXPECT_EQ(std::count(agg.begin(), agg.end(), '\n'), 3);
  EXPECT_TRUE(std::filesystem::exists(tmp / "o/traces/ice/seed-2/trace.csv"));
  EXPECT_EQ(cli_run({"sweep", "-c", cfg.string(), "-o", (tmp / "j").string(), "--seeds", "3",
                     "--terrains", "mud", "--format", "json"}),
            0);
  const json sweep = json::parse(slurp(tmp / "j/sweep.json"));
  EXPECT_EQ(sweep["runs"].size(), 1u);
  EXPECT_EQ(sweep["aggregates"][0]["terrain"], "Mud");
}

TEST(CliSweep, BadSeedsAndTerrainsExitTwo) {
  TempDir tmp;
  const auto cfg = write_config(tmp, "c.yaml", kShortStep);
  EXPECT_EQ(cli_run({"sweep", "-c", cfg.string(), "-o", (tmp / "o").string(), "--seeds", "5-1"}),
            cli::kExitConfig);
  EXPECT_EQ(cli_run({"sweep", "-c", cfg.string(), "-o", (tmp / "o").string(), "--terrains", "lava"}),
            cli::kExitConfig);
}

TEST(CliCompare, WritesTableAndNeedsStep) {
  TempDir tmp;
  const auto cfg = write_config(tmp, "c.yaml", "id: cmp\nduration: 10\nterrain: ice\nprofile: {type: step}\n");
  ASSERT_EQ(cli_run({"compare", "-c", cfg.string(), "-o", (tmp / "o").string(), "--seeds", "1-2",
                     "--format", "json"}),
            0);
  const json report = json::parse(slurp(tmp / "o/comparison.json"));
  EXPECT_TRUE(report["cmp"]["controllers"].contains("nnrmfc"));
  EXPECT_TRUE(report["cmp"]["controllers"].contains("pid"));
  EXPECT_EQ(report["cmp"]["controllers"]["pid"]["runs"].size(), 2u);
  EXPECT_TRUE(report["cmp"].contains("nnrmfc_wins_both"));
  const auto curved = write_config(tmp, "curved.yaml", "duration: 5\n");
  EXPECT_EQ(cli_run({"compare", "-c", curved.string(), "-o", (tmp / "p").string()}), cli::kExitConfig);
}

TEST(CliTune, PassesWithSimPreset) {
  TempDir tmp;
  const auto cfg = write_config(tmp, "c.yaml", "id: tune\nduration: 60\n");
  EXPECT_EQ(cli_run({"tune-protocol", "-c", cfg.string(), "-o", (tmp / "o").string()}), 0);
  const json report = json::parse(slurp(tmp / "o/tune_report.json"));
  EXPECT_TRUE(report["tune"]["passed"].get<bool>());
  EXPECT_EQ(report["tune"]["rounds"].size(), 3u);
}

TEST(CliTune, ZeroGammaRejectedBeforeRoundOne) {
  TempDir tmp;
  const auto cfg = write_config(
      tmp, "c.yaml", "controller:\n  gains: {kappa: 1.2, epsilon: 0.04, sigma: 11.5, gamma: 0}\n");
  EXPECT_EQ(cli_run({"tune-protocol", "-c", cfg.string(), "-o", (tmp / "o").string()}),
            cli::kExitConfig);
  EXPECT_FALSE(std::filesystem::exists(tmp / "o/tune_report.json"));
}

TEST(CliPlot, FiveFilesPerTracePlusOverlay) {
  TempDir tmp;
  const auto cfg = write_config(tmp, "c.yaml", kShortStep);
  ASSERT_EQ(cli_run({"sweep", "-c", cfg.string(), "-o", (tmp / "s").string(), "--seeds", "1",
                     "--terrains", "dry_asphalt,ice", "--traces"}),
            0);
  ASSERT_EQ(cli_run({"plot", (tmp / "s/traces/ice/seed-1").string(), "-o", (tmp / "one").string()}), 0);
  EXPECT_EQ(count_files(tmp / "one"), 5);
  ASSERT_EQ(cli_run({"plot", (tmp / "s/traces/ice/seed-1").string(),
                     (tmp / "s/traces/dry_asphalt/seed-1/trace.csv").string(), "-o",
                     (tmp / "two").string()}),
            0);
  EXPECT_EQ(count_files(tmp / "two"), 11);
  EXPECT_TRUE(std::filesystem::exists(tmp / "two/error_by_terrain.svg"));
  EXPECT_TRUE(std::filesystem::exists(tmp / "two/dry_asphalt_seed-1_velocity.svg"));
}

TEST(CliPlot, EmptyOrBadTraceLeavesNothing) {
  TempDir tmp;
  std::filesystem::create_directories(tmp / "empty");
  std::ofstream(tmp / "empty/trace.csv") << "";
  EXPECT_EQ(cli_run({"plot", (tmp / "empty").string(), "-o", (tmp / "o").string()}), cli::kExitConfig);
  EXPECT_FALSE(std::filesystem::exists(tmp / "o"));
  std::filesystem::create_directories(tmp / "hdr");
  std::ofstream(tmp / "hdr/trace.csv") << "t,v_r\n0,0\n";
  EXPECT_EQ(cli_run({"plot", (tmp / "hdr").string(), "-o", (tmp / "o").string()}), cli::kExitConfig);
  EXPECT_FALSE(std::filesystem::exists(tmp / "o"));
  std::filesystem::create_directories(tmp / "header_only");
  std::ofstream(tmp / "header_only/trace.csv")
      << "t,v_rd,v_ld,v_r,v_l,e_r,e_l,u_r,u_l,phi_hat_r,phi_hat_l,phi_norm_r,phi_norm_l,s_r,s_l,x,y,theta\n";
  EXPECT_EQ(cli_run({"plot", (tmp / "header_only").string(), "-o", (tmp / "o").string()}),
            cli::kExitConfig);
  EXPECT_FALSE(std::filesystem::exists(tmp / "o"));
}
