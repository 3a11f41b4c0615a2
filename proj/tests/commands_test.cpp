#include "vbqc/commands.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

using namespace vbqc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("vbqc_cmd_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CommandContext context(const fs::path& dir) {
  CommandContext c;
  c.cfg.out_dir = dir.string();
  return c;
}

}  // namespace

TEST(Format, NineSignificantDigits) {
  EXPECT_EQ(format_sig9(0.1234567891234), "0.123456789");
  EXPECT_EQ(format_sig9(2612), "2612");
  EXPECT_EQ(format_sig9(1.0 / 3e9), "3.33333333e-10");
}

TEST(RoundLog, ColumnsAndRows) {
  SessionConfig c;
  c.rounds = 50;
  auto r = run_in_process(c);
  std::string csv = round_log_csv(r);
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "round,round_type,alphas,decoded,verdicts,raw,init_retries,restarts,attempts,latency_us");
  int rows = 0;
  while (std::getline(ss, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9) << line;
    bool test = line.find(",test,") != std::string::npos;
    EXPECT_EQ(line.find(":pass") != std::string::npos || line.find(":fail") != std::string::npos, test) << line;
  }
  EXPECT_EQ(rows, 50);
}

TEST(Summary, CountsAddUp) {
  SessionConfig c;
  c.rounds = 300;
  c.alpha_schedule = {{Octant(0)}, {Octant(4)}};
  auto r = run_in_process(c);
  auto j = nlohmann::json::parse(summary_json(c, r));
  EXPECT_EQ(j["rounds"], 300);
  EXPECT_EQ(j["computation_rounds"].get<int>() + j["test_rounds"].get<int>(), 300);
  ASSERT_EQ(j["per_alpha"].size(), 2u);
  EXPECT_EQ(j["per_alpha"][0]["computation_rounds"].get<int>() + j["per_alpha"][1]["computation_rounds"].get<int>(),
            j["computation_rounds"].get<int>());
  ASSERT_EQ(j["trap_positions"].size(), 2u);
  EXPECT_EQ(j["trap_positions"][0]["checked"], j["test_rounds"]);
}

TEST(Decay, Csv) {
  DecayStudy s;
  s.points = {{1000, 600, 0.25, 0.01, 0.5}};
  EXPECT_EQ(decay_csv(s), "n,reject_rate,bound\n1000,0.25,0.5\n");
}

TEST(Csv, ScanRoundTripThroughCalibrateFit) {
  fs::path dir = scratch("scan");
  auto scan = synthetic_scan(JonesState::from_angles(1.1, 0.7));
  {
    std::ofstream out(dir / "scan.csv");
    out << "q_rad,h_rad,t\n";
    out.precision(17);
    for (const auto& p : scan) out << p.q_rad << "," << p.h_rad << "," << p.t << "\n";
  }
  {
    std::ofstream out(dir / "counts.csv");
    out << "basis,n_s,n_p\nX,750,250\nY,500,500\nZ,500,500\n";
  }
  CommandContext ctx = context(dir);
  ctx.scan_csv = (dir / "scan.csv").string();
  ctx.counts_csv = (dir / "counts.csv").string();
  std::stringstream err;
  ASSERT_EQ(run_command("calibrate-fit", ctx, err), exit_code::ok) << err.str();
  auto j = nlohmann::json::parse(slurp(dir / "calibration.json"));
  EXPECT_NEAR(j["polarisation_fit"]["theta"].get<double>(), 1.1, 1e-6);
  EXPECT_NEAR(j["polarisation_fit"]["phi"].get<double>(), 0.7, 1e-6);
  EXPECT_EQ(j["bloch"].size(), 3u);
}

TEST(Csv, ErrorsNameTheLine) {
  fs::path dir = scratch("bad");
  {
    std::ofstream out(dir / "counts.csv");
    out << "basis,n_s,n_p\nX,1,2\nW,3,4\n";
  }
  try {
    read_counts_csv((dir / "counts.csv").string());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("counts.csv:3"), std::string::npos) << e.what();
  }
  {
    std::ofstream out(dir / "scan.csv");
    out << "q,h,t\n1,2,3\n";
  }
  EXPECT_THROW(read_scan_csv((dir / "scan.csv").string()), ConfigError);
  {
    std::ofstream out(dir / "scan.csv");
    out << "q_rad,h_rad,t\n1,2,x\n";
  }
  EXPECT_THROW(read_scan_csv((dir / "scan.csv").string()), ConfigError);
}

TEST(Commands, ExitCodes) {
  fs::path dir = scratch("codes");
  std::stringstream err;
  EXPECT_EQ(run_command("nope", context(dir), err), exit_code::config);
  EXPECT_EQ(run_command("calibrate-fit", context(dir), err), exit_code::config);
  CommandContext bad = context(dir);
  bad.cfg.session.rounds = 0;
  EXPECT_EQ(run_command("simulate", bad, err), exit_code::config);
  CommandContext nobody = context(dir);
  nobody.cfg.mode = RunMode::two_process;
  nobody.cfg.endpoint = "127.0.0.1:1";
  EXPECT_EQ(run_command("simulate", nobody, err), exit_code::session_abort);
}

TEST(Commands, SimulateWritesFiles) {
  fs::path dir = scratch("sim");
  CommandContext ctx = context(dir);
  ctx.cfg.session.rounds = 100;
  std::stringstream err;
  ASSERT_EQ(run_command("simulate", ctx, err), exit_code::ok) << err.str();
  std::string first = slurp(dir / "rounds.csv");
  EXPECT_EQ(dump_run_config(parse_run_config(slurp(dir / "config.json"))), slurp(dir / "config.json"));
  ASSERT_EQ(run_command("simulate", ctx, err), exit_code::ok);
  EXPECT_EQ(slurp(dir / "rounds.csv"), first);
}

TEST(Commands, VerifyAndLeakageOutputs) {
  fs::path dir = scratch("vl");
  CommandContext ctx = context(dir);
  ctx.cfg.verify.trials = 200;
  ctx.cfg.leakage.tomography_shots = 2000;
  std::stringstream err;
  ASSERT_EQ(run_command("verify", ctx, err), exit_code::ok) << err.str();
  std::string csv = slurp(dir / "decay.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,reject_rate,bound");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  auto v = nlohmann::json::parse(slurp(dir / "verify.json"));
  EXPECT_DOUBLE_EQ(v["omega_max_formula"].get<double>(), 0.25);
  ASSERT_EQ(run_command("leakage", ctx, err), exit_code::ok) << err.str();
  auto l = nlohmann::json::parse(slurp(dir / "leakage.json"));
  EXPECT_NEAR(l["observed"]["quantum"]["basis"].get<double>(), 0.035, 0.002);
  EXPECT_LT(l["optimised"]["quantum"]["basis"].get<double>(), l["observed"]["quantum"]["basis"].get<double>());
  EXPECT_EQ(l["optimised"]["quantum"]["imbalance"].get<double>(), 0.0);
}
