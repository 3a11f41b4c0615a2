#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "vbqc/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulator and analysis tools for verifiable blind quantum computing on linear clusters"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path, out_dir, mode, endpoint, scan, counts;
  std::optional<std::uint64_t> seed_client, seed_server;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed-client", seed_client, "client seed (overrides the config)");
  app.add_option("--seed-server", seed_server, "server seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--mode", mode, "in_process or two_process")->check(CLI::IsMember({"in_process", "two_process"}));
  app.add_option("--endpoint", endpoint, "HOST:PORT for serve and connect");
  app.add_option("--scan", scan, "calibration scan CSV (q_rad,h_rad,t)");
  app.add_option("--counts", counts, "tomography counts CSV (basis,n_s,n_p)");

  for (const char* name : {"simulate", "leakage", "verify", "calibrate-fit", "steering-check", "serve", "connect"})
    app.add_subcommand(name);
  app.get_subcommand("simulate")->description("run a session, write rounds.csv and summary.json");
  app.get_subcommand("leakage")->description("leakage table, observed and optimised columns");
  app.get_subcommand("verify")->description("rejection decay study, write decay.csv");
  app.get_subcommand("calibrate-fit")->description("fit a polarisation scan and/or invert tomography counts");
  app.get_subcommand("steering-check")->description("correctness and simulator tests of steering-based preparation");
  app.get_subcommand("serve")->description("server role over TCP for one session");
  app.get_subcommand("connect")->description("client role over TCP, same outputs as simulate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return vbqc::exit_code::config;
  }

  vbqc::CommandContext ctx;
  try {
    if (!config_path.empty()) ctx.cfg = vbqc::load_run_config(config_path);
    if (seed_client) ctx.cfg.session.seed_client = *seed_client;
    if (seed_server) ctx.cfg.session.seed_server = *seed_server;
    if (!out_dir.empty()) ctx.cfg.out_dir = out_dir;
    if (!mode.empty()) ctx.cfg.mode = mode == "in_process" ? vbqc::RunMode::in_process : vbqc::RunMode::two_process;
    if (!endpoint.empty()) ctx.cfg.endpoint = endpoint;
    ctx.cfg.validate();
  } catch (const vbqc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return vbqc::exit_code::config;
  }
  ctx.scan_csv = scan;
  ctx.counts_csv = counts;
  ctx.out = &std::cout;
  return vbqc::run_command(app.get_subcommands().front()->get_name(), ctx, std::cerr);
}
