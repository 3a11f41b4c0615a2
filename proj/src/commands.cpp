#include "vbqc/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "vbqc/steering.hpp"
#include "vbqc/transport.hpp"

namespace vbqc {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_sig9(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

namespace {

// Rounded so that the JSON writer prints at most nine significant digits.
double sig9(double x) { return std::isfinite(x) ? std::stod(format_sig9(x)) : x; }

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> octants(const std::vector<Octant>& a) {
  std::vector<int> v;
  for (Octant o : a) v.push_back(o.k);
  return v;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

fs::path prepare_out(const RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

void say(const CommandContext& ctx, const std::string& s) {
  if (ctx.out) *ctx.out << s << std::endl;
}

ojson report_json(const LeakageReport& r) {
  return {{"classical",
           {{"angles", sig9(r.classical.angles)},
            {"herald_efficiency", sig9(r.classical.herald_efficiency)},
            {"herald_efficiency_kl", sig9(r.classical.herald_efficiency_kl)},
            {"herald_delay", sig9(r.classical.herald_delay)}}},
          {"quantum",
           {{"basis", sig9(r.quantum.basis)},
            {"basis_phi", sig9(r.quantum.basis_phi)},
            {"imbalance", sig9(r.quantum.imbalance)},
            {"measured_tomographic", sig9(r.quantum.measured_tomographic)}}}};
}

// Splits a CSV file into rows after checking the header.
std::vector<std::vector<std::string>> read_csv(const std::string& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (lineno == 1) {
      if (cells != header) throw ConfigError(path + ":1: unexpected header");
      continue;
    }
    if (cells.size() != header.size())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " columns");
    rows.push_back(std::move(cells));
  }
  if (lineno == 0) throw ConfigError(path + ": empty file");
  return rows;
}

double to_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError(where + ": not a number: '" + s + "'");
  return v;
}

}  // namespace

std::string round_log_csv(const SessionResult& r) {
  std::string s = "round,round_type,alphas,decoded,verdicts,raw,init_retries,restarts,attempts,latency_us\n";
  for (const auto& rec : r.rounds) {
    std::string verdicts;
    for (std::size_t i = 0; i < rec.verdicts.size(); ++i)
      verdicts += (i ? ";" : "") + std::to_string(rec.verdicts[i].position) + (rec.verdicts[i].pass ? ":pass" : ":fail");
    s += std::to_string(rec.round) + "," + (rec.round_type == RoundType::test ? "test" : "computation") + "," +
         join(octants(rec.alphas)) + "," + (rec.round_type == RoundType::computation ? std::to_string(rec.decoded) : "") +
         "," + verdicts + "," + join(rec.raw) + "," + std::to_string(rec.init_retries) + "," +
         std::to_string(rec.restarts) + "," + std::to_string(rec.attempts) + "," + format_sig9(rec.latency_us) + "\n";
  }
  return s;
}

std::string summary_json(const SessionConfig& cfg, const SessionResult& r) {
  std::vector<std::vector<int>> order;
  std::map<std::vector<int>, std::pair<long, long>> by_alpha;  // rounds, ones
  long tests = 0, attempts = 0;
  double latency = 0;
  for (const auto& rec : r.rounds) {
    attempts += rec.attempts;
    latency += rec.latency_us;
    if (rec.round_type == RoundType::test) {
      ++tests;
      continue;
    }
    auto key = octants(rec.alphas);
    if (!by_alpha.count(key)) order.push_back(key);
    auto& e = by_alpha[key];
    ++e.first;
    e.second += rec.decoded;
  }
  ojson per_alpha = ojson::array();
  for (const auto& key : order) {
    auto [n, ones] = by_alpha[key];
    double p = double(ones) / n;
    per_alpha.push_back({{"alphas", key},
                         {"computation_rounds", n},
                         {"mean_decoded", sig9(p)},
                         {"stderr", sig9(std::sqrt(p * (1 - p) / n))}});
  }
  const int n_qubits = cfg.q + 1;
  PositionStats st = position_failures(r, n_qubits);
  ojson positions = ojson::array();
  for (int pos = 1; pos <= n_qubits; ++pos)
    positions.push_back({{"position", pos},
                         {"checked", st.checked[pos - 1]},
                         {"failed", st.failed[pos - 1]},
                         {"p_fail", sig9(st.rate(pos))}});
  const double n = static_cast<double>(r.rounds.size());
  ojson j = {{"rounds", r.rounds.size()},
             {"computation_rounds", r.rounds.size() - tests},
             {"test_rounds", tests},
             {"per_alpha", per_alpha},
             {"trap_positions", positions},
             {"test_round_failure_rate", sig9(test_round_failure_rate(r))},
             {"mean_attempts", sig9(n ? attempts / n : 0.0)},
             {"mean_latency_us", sig9(n ? latency / n : 0.0)}};
  return j.dump(2) + "\n";
}

std::string decay_csv(const DecayStudy& s) {
  std::string out = "n,reject_rate,bound\n";
  for (const auto& p : s.points) out += std::to_string(p.n) + "," + format_sig9(p.reject_rate) + "," + format_sig9(p.bound) + "\n";
  return out;
}

LeakageConfig observed_leakage_config(const RunConfig& cfg) {
  LeakageConfig c = LeakageConfig::observed();
  c.link = cfg.session.link;
  c.noise = cfg.session.noise;
  c.q_dev = cfg.leakage.q_dev;
  c.lambda0 = cfg.leakage.lambda0;
  c.lambda_alt = cfg.leakage.lambda_alt;
  c.tomography_shots = cfg.leakage.tomography_shots;
  c.seed = cfg.leakage.seed;
  return c;
}

LeakageConfig optimised_leakage_config(const RunConfig& cfg) {
  LeakageConfig c = LeakageConfig::optimised();
  const auto& t = cfg.session.link.timing;
  c.link.timing.lifetime_ns = t.lifetime_ns;
  c.link.timing.jitter_ns = t.jitter_ns;
  c.link.timing.resolution_ns = t.resolution_ns;
  c.link.timing.omega_z_rad_per_ns = t.omega_z_rad_per_ns;
  c.noise = cfg.session.noise;
  c.lambda0 = c.lambda_alt = cfg.leakage.lambda0;
  c.tomography_shots = cfg.leakage.tomography_shots;
  c.seed = cfg.leakage.seed;
  return c;
}

std::string leakage_json(const LeakageReport& observed, const LeakageReport& optimised) {
  ojson j = {{"observed", report_json(observed)}, {"optimised", report_json(optimised)}};
  return j.dump(2) + "\n";
}

std::vector<ScanPoint> read_scan_csv(const std::string& path) {
  std::vector<ScanPoint> pts;
  int row = 1;
  for (const auto& c : read_csv(path, {"q_rad", "h_rad", "t"})) {
    const std::string at = path + ":" + std::to_string(++row);
    pts.push_back({to_double(c[0], at), to_double(c[1], at), to_double(c[2], at)});
  }
  if (pts.empty()) throw ConfigError(path + ": no scan points");
  return pts;
}

std::vector<BasisCounts> read_counts_csv(const std::string& path) {
  std::vector<BasisCounts> out;
  int row = 1;
  for (const auto& c : read_csv(path, {"basis", "n_s", "n_p"})) {
    const std::string at = path + ":" + std::to_string(++row);
    if (c[0] != "X" && c[0] != "Y" && c[0] != "Z") throw ConfigError(at + ": basis must be X, Y or Z");
    double s = to_double(c[1], at), p = to_double(c[2], at);
    if (s < 0 || p < 0 || s != std::floor(s) || p != std::floor(p) || s + p <= 0)
      throw ConfigError(at + ": counts must be non-negative integers with a positive total");
    out.push_back({c[0][0], static_cast<long>(s), static_cast<long>(p)});
  }
  if (out.empty()) throw ConfigError(path + ": no counts");
  return out;
}

SteeringCheck run_steering_check(std::uint64_t seed, int targets, long samples) {
  SteeringCheck c;
  c.targets = targets;
  Rng rng = make_stream(seed, {0x57EE});
  for (int i = 0; i < targets; ++i) {
    Mat2 u = haar_unitary(rng);
    auto w = run_real_world(u, rng);
    Vec2 target = u.col(0);
    c.worst_correctness_error = std::max(c.worst_correctness_error, std::abs(1.0 - fidelity(w.server_output, QuantumState::pure(target))));
  }
  Vec bell = Vec::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  Mat2 u = haar_unitary(rng);
  c.tv_plain = indistinguishability_test(u, {bell, 'X', false}, samples, rng);
  c.tv_corrected = indistinguishability_test(u, {bell, 'X', true}, samples, rng);
  c.tv_broken = tv_distance(gates::H(), {bell, 'X', true}, samples, World::real, World::broken_ideal, rng);
  c.pass = c.worst_correctness_error < 1e-9 && c.tv_plain < 0.02 && c.tv_corrected < 0.02 && c.tv_broken > 0.1;
  return c;
}

int cmd_simulate(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  cfg.validate();
  fs::path dir = prepare_out(cfg);
  SessionResult res;
  if (cfg.mode == RunMode::two_process) {
    TcpClientChannel ch(Endpoint::parse(cfg.endpoint));
    res = run_client_session(cfg.session, ch);
  } else {
    res = run_in_process(cfg.session);
  }
  write_file(dir / "rounds.csv", round_log_csv(res));
  write_file(dir / "summary.json", summary_json(cfg.session, res));
  write_file(dir / "config.json", dump_run_config(cfg));
  say(ctx, "wrote " + (dir / "rounds.csv").string() + " and summary.json (" + std::to_string(res.rounds.size()) + " rounds)");
  return exit_code::ok;
}

int cmd_connect(const CommandContext& ctx) {
  CommandContext c = ctx;
  c.cfg.mode = RunMode::two_process;
  return cmd_simulate(c);
}

int cmd_serve(const CommandContext& ctx) {
  ctx.cfg.validate();
  fs::path dir = prepare_out(ctx.cfg);
  // Only the public parameters leave the config; seeds and angles stay behind.
  const PublicParams params = ctx.cfg.session.public_params();
  ServeOptions o;
  o.endpoint = Endpoint::parse(ctx.cfg.endpoint);
  o.log_path = (dir / "server.log").string();
  o.sessions = 1;
  o.on_listen = [&](const Endpoint& ep) { say(ctx, "listening on " + ep.str()); };
  ServeSummary s = serve(params, o);
  say(ctx, "sessions " + std::to_string(s.sessions) + ", completed " + std::to_string(s.completed));
  return s.completed == s.sessions ? exit_code::ok : exit_code::session_abort;
}

int cmd_leakage(const CommandContext& ctx) {
  ctx.cfg.validate();
  fs::path dir = prepare_out(ctx.cfg);
  auto obs = build_leakage_table(observed_leakage_config(ctx.cfg));
  auto opt = build_leakage_table(optimised_leakage_config(ctx.cfg));
  std::string j = leakage_json(obs, opt);
  write_file(dir / "leakage.json", j);
  if (ctx.out) *ctx.out << j;
  return exit_code::ok;
}

int cmd_verify(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  cfg.validate();
  fs::path dir = prepare_out(cfg);
  const auto& v = cfg.verify;
  DecayStudy s = monte_carlo_decay(v.n_grid, v.cfg.p_max, v.cfg.omega, v.cfg.tau, v.trials, v.seed);
  write_file(dir / "decay.csv", decay_csv(s));
  HoeffdingBounds h = hoeffding_rates(v.cfg, v.cfg.p_max);
  ojson j = {{"omega", sig9(v.cfg.omega)},
             {"omega_max_configured", sig9(v.cfg.omega_max)},
             {"omega_max_formula", sig9(omega_max(cfg.session.q + 1))},
             {"p_true", sig9(v.cfg.p_max)},
             {"tau", sig9(v.cfg.tau)},
             {"n_rounds", v.cfg.n_rounds},
             {"test_rounds", v.cfg.test_rounds()},
             {"hoeffding_reject_bound", sig9(h.pr_reject_bound)},
             {"hoeffding_accept_bad_bound", sig9(h.pr_accept_bad_bound)},
             {"exact_reject_probability", sig9(exact_reject_probability(v.cfg.test_rounds(), v.cfg.p_max, v.cfg.omega))},
             {"fit_slope", sig9(s.slope)},
             {"fit_r_squared", sig9(s.r_squared)},
             {"halving_rounds", sig9(s.halving_rounds)}};
  write_file(dir / "verify.json", j.dump(2) + "\n");
  say(ctx, "wrote " + (dir / "decay.csv").string() + " and verify.json");
  return exit_code::ok;
}

int cmd_calibrate_fit(const CommandContext& ctx) {
  if (ctx.scan_csv.empty() && ctx.counts_csv.empty()) throw ConfigError("calibrate-fit needs --scan and/or --counts");
  fs::path dir = prepare_out(ctx.cfg);
  ojson j = ojson::object();
  if (!ctx.scan_csv.empty()) {
    PolarisationFit f = fit_polarisation_state(read_scan_csv(ctx.scan_csv));
    j["polarisation_fit"] = {{"theta", sig9(f.theta)},
                             {"phi", sig9(f.phi)},
                             {"residual", sig9(f.residual)},
                             {"phase_identifiable", f.phase_identifiable},
                             {"ill_conditioned", f.ill_conditioned}};
  }
  if (!ctx.counts_csv.empty()) {
    auto b = direct_inversion(read_counts_csv(ctx.counts_csv));
    j["bloch"] = {sig9(b[0]), sig9(b[1]), sig9(b[2])};
  }
  std::string text = j.dump(2) + "\n";
  write_file(dir / "calibration.json", text);
  if (ctx.out) *ctx.out << text;
  return exit_code::ok;
}

int cmd_steering_check(const CommandContext& ctx) {
  fs::path dir = prepare_out(ctx.cfg);
  SteeringCheck c = run_steering_check(ctx.cfg.session.seed_client);
  ojson j = {{"targets", c.targets},
             {"worst_correctness_error", sig9(c.worst_correctness_error)},
             {"tv_plain", sig9(c.tv_plain)},
             {"tv_corrected", sig9(c.tv_corrected)},
             {"tv_broken_simulator", sig9(c.tv_broken)},
             {"pass", c.pass}};
  std::string text = j.dump(2) + "\n";
  write_file(dir / "steering.json", text);
  if (ctx.out) *ctx.out << text;
  return c.pass ? exit_code::ok : exit_code::failure;
}

int run_command(const std::string& name, const CommandContext& ctx, std::ostream& err) {
  static const std::map<std::string, int (*)(const CommandContext&)> table{
      {"simulate", cmd_simulate},   {"connect", cmd_connect},         {"serve", cmd_serve},
      {"leakage", cmd_leakage},     {"verify", cmd_verify},           {"calibrate-fit", cmd_calibrate_fit},
      {"steering-check", cmd_steering_check},
  };
  auto it = table.find(name);
  if (it == table.end()) {
    err << "unknown command: " << name << "\n";
    return exit_code::config;
  }
  try {
    return it->second(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const SessionAbort& e) {
    err << "session aborted: " << e.what() << "\n";
    return exit_code::session_abort;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::failure;
  }
}

}  // namespace vbqc
