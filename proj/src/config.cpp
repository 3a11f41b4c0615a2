#include "vbqc/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace vbqc {

using nlohmann::json;

namespace {

// Reads fields from one JSON object and remembers which ones it saw, so that
// anything left over can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw std::invalid_argument("expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (it->is_number_integer() && !it->is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw std::invalid_argument("expected a string");
      }
      out = it->template get<T>();
    } catch (const std::exception& e) {
      fail(field(key), e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown field");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_noise(Section s, NoiseModel& n) {
  auto& b = n.budget;
  s.get("F_theta", b.F_theta);
  s.get("F_theta_prime", b.F_theta_prime);
  s.get("F_z", b.F_z);
  s.get("F_iS", b.F_iS);
  s.get("F_iS_prime", b.F_iS_prime);
  s.get("F_map", b.F_map);
  s.get("p_errdetect", n.p_errdetect);
  s.get("error_detection", n.error_detection);
  s.finish();
}

void read_link(Section s, LinkConfig& l) {
  s.get("p_herald_per_attempt", l.p_herald_per_attempt);
  s.get("timeout_attempts", l.timeout_attempts);
  s.get("attempt_us", l.attempt_us);
  if (const json* d = s.child("durations")) {
    Section ds(*d, s.field("durations"));
    auto& u = l.durations;
    ds.get("rsp_mean", u.rsp_mean);
    ds.get("transfer", u.transfer);
    ds.get("iswap", u.iswap);
    ds.get("readout", u.readout);
    ds.get("deshelve", u.deshelve);
    ds.get("cooling", u.cooling);
    ds.get("outcome_comm", u.outcome_comm);
    ds.finish();
  }
  s.finish();
}

void read_timing(Section s, TimingModel& t) {
  s.get("lifetime_ns", t.lifetime_ns);
  s.get("delay_s_ns", t.delay_s_ns);
  s.get("delay_p_ns", t.delay_p_ns);
  s.get("jitter_ns", t.jitter_ns);
  s.get("resolution_ns", t.resolution_ns);
  s.get("omega_z_rad_per_ns", t.omega_z_rad_per_ns);
  s.finish();
}

void read_povm(Section s, DetectorPovm& p) {
  s.get("eta_s", p.eta_s);
  s.get("eta_p", p.eta_p);
  s.get("eps_s", p.eps_s);
  s.get("eps_p", p.eps_p);
  s.finish();
}

void read_verify(Section s, VerifyStudy& v) {
  s.get("n_rounds", v.cfg.n_rounds);
  s.get("tau", v.cfg.tau);
  s.get("omega", v.cfg.omega);
  s.get("p_max", v.cfg.p_max);
  s.get("omega_max", v.cfg.omega_max);
  s.get("n_grid", v.n_grid);
  s.get("trials", v.trials);
  s.get("seed", v.seed);
  s.finish();
}

void read_leakage(Section s, LeakageOverrides& l) {
  s.get("q_dev", l.q_dev);
  s.get("lambda0", l.lambda0);
  s.get("lambda_alt", l.lambda_alt);
  s.get("tomography_shots", l.tomography_shots);
  s.get("seed", l.seed);
  s.finish();
}

std::vector<std::vector<Octant>> read_schedule(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) Section::fail(where, "expected a non-empty array of angle lists");
  std::vector<std::vector<Octant>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!j[i].is_array()) Section::fail(at, "expected an array of octants");
    std::vector<Octant> row;
    for (const auto& k : j[i]) {
      if (!k.is_number_integer() || k.get<int>() < 0 || k.get<int>() > 7) Section::fail(at, "octants are integers 0..7");
      row.emplace_back(k.get<int>());
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  auto wrap = [](const char* where, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(where) + ": " + e.what());
    }
  };
  wrap("session", [&] { session.validate(); });
  wrap("verify", [&] { verify.cfg.validate(); });
  if (verify.trials < 1) throw ConfigError("verify.trials: must be positive");
  if (verify.n_grid.empty()) throw ConfigError("verify.n_grid: must not be empty");
  for (long n : verify.n_grid)
    if (n < 1) throw ConfigError("verify.n_grid: entries must be positive");
  if (leakage.tomography_shots < 0) throw ConfigError("leakage.tomography_shots: must be non-negative");
  if (leakage.lambda0 <= 0 || leakage.lambda_alt <= 0) throw ConfigError("leakage.lambda0: must be positive");
  if (std::abs(leakage.q_dev) >= 0.5) throw ConfigError("leakage.q_dev: must lie in (-0.5, 0.5)");
  if (mode == RunMode::two_process && endpoint.find(':') == std::string::npos)
    throw ConfigError("endpoint: expected HOST:PORT");
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  Section top(j, "");
  int version = -1;
  top.get("schema_version", version);
  if (!j.contains("schema_version")) Section::fail("schema_version", "missing");
  if (version != kConfigSchemaVersion)
    Section::fail("schema_version", "unsupported version " + std::to_string(version));

  RunConfig c;
  auto& s = c.session;
  top.get("seed_client", s.seed_client);
  top.get("seed_server", s.seed_server);
  top.get("q", s.q);
  top.get("rounds", s.rounds);
  top.get("test_fraction", s.test_fraction);
  top.get("calibration_residual", s.calibration_residual);
  top.get("max_restarts", s.max_restarts);
  std::string basis = s.final_basis == FinalBasis::Z ? "Z" : "B";
  top.get("final_basis", basis);
  if (basis != "Z" && basis != "B") Section::fail("final_basis", "expected \"Z\" or \"B\"");
  s.final_basis = basis == "Z" ? FinalBasis::Z : FinalBasis::B;
  if (const json* a = top.child("alpha_schedule")) s.alpha_schedule = read_schedule(*a, "alpha_schedule");
  std::string mode = "in_process";
  top.get("mode", mode);
  if (mode != "in_process" && mode != "two_process") Section::fail("mode", "expected in_process or two_process");
  c.mode = mode == "in_process" ? RunMode::in_process : RunMode::two_process;
  top.get("endpoint", c.endpoint);
  top.get("out_dir", c.out_dir);

  if (const json* n = top.child("noise")) read_noise(Section(*n, "noise"), s.noise);
  if (const json* l = top.child("link")) read_link(Section(*l, "link"), s.link.cfg);
  if (const json* t = top.child("timing")) read_timing(Section(*t, "timing"), s.link.timing);
  if (const json* p = top.child("povm")) read_povm(Section(*p, "povm"), s.link.povm);
  if (const json* a = top.child("analyser")) {
    if (a->is_null()) {
      s.link.analyser.reset();
    } else {
      Section as(*a, "analyser");
      ImperfectAnalyser an;
      as.get("port_mismatch_rad", an.port_mismatch_rad);
      as.finish();
      s.link.analyser = an;
    }
  }
  if (const json* v = top.child("verify")) read_verify(Section(*v, "verify"), c.verify);
  if (const json* l = top.child("leakage")) read_leakage(Section(*l, "leakage"), c.leakage);
  top.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string dump_run_config(const RunConfig& c) {
  const auto& s = c.session;
  const auto& b = s.noise.budget;
  const auto& l = s.link.cfg;
  const auto& d = l.durations;
  const auto& t = s.link.timing;
  const auto& p = s.link.povm;
  json sched = json::array();
  for (const auto& row : s.alpha_schedule) {
    json r = json::array();
    for (Octant o : row) r.push_back(o.k);
    sched.push_back(r);
  }
  json j = {
      {"schema_version", kConfigSchemaVersion},
      {"seed_client", s.seed_client},
      {"seed_server", s.seed_server},
      {"q", s.q},
      {"final_basis", s.final_basis == FinalBasis::Z ? "Z" : "B"},
      {"rounds", s.rounds},
      {"test_fraction", s.test_fraction},
      {"alpha_schedule", sched},
      {"calibration_residual", s.calibration_residual},
      {"max_restarts", s.max_restarts},
      {"mode", c.mode == RunMode::in_process ? "in_process" : "two_process"},
      {"endpoint", c.endpoint},
      {"out_dir", c.out_dir},
      {"noise",
       {{"F_theta", b.F_theta},
        {"F_theta_prime", b.F_theta_prime},
        {"F_z", b.F_z},
        {"F_iS", b.F_iS},
        {"F_iS_prime", b.F_iS_prime},
        {"F_map", b.F_map},
        {"p_errdetect", s.noise.p_errdetect},
        {"error_detection", s.noise.error_detection}}},
      {"link",
       {{"p_herald_per_attempt", l.p_herald_per_attempt},
        {"timeout_attempts", l.timeout_attempts},
        {"attempt_us", l.attempt_us},
        {"durations",
         {{"rsp_mean", d.rsp_mean},
          {"transfer", d.transfer},
          {"iswap", d.iswap},
          {"readout", d.readout},
          {"deshelve", d.deshelve},
          {"cooling", d.cooling},
          {"outcome_comm", d.outcome_comm}}}}},
      {"timing",
       {{"lifetime_ns", t.lifetime_ns},
        {"delay_s_ns", t.delay_s_ns},
        {"delay_p_ns", t.delay_p_ns},
        {"jitter_ns", t.jitter_ns},
        {"resolution_ns", t.resolution_ns},
        {"omega_z_rad_per_ns", t.omega_z_rad_per_ns}}},
      {"povm", {{"eta_s", p.eta_s}, {"eta_p", p.eta_p}, {"eps_s", p.eps_s}, {"eps_p", p.eps_p}}},
      {"analyser", s.link.analyser ? json{{"port_mismatch_rad", s.link.analyser->port_mismatch_rad}} : json(nullptr)},
      {"verify",
       {{"n_rounds", c.verify.cfg.n_rounds},
        {"tau", c.verify.cfg.tau},
        {"omega", c.verify.cfg.omega},
        {"p_max", c.verify.cfg.p_max},
        {"omega_max", c.verify.cfg.omega_max},
        {"n_grid", c.verify.n_grid},
        {"trials", c.verify.trials},
        {"seed", c.verify.seed}}},
      {"leakage",
       {{"q_dev", c.leakage.q_dev},
        {"lambda0", c.leakage.lambda0},
        {"lambda_alt", c.leakage.lambda_alt},
        {"tomography_shots", c.leakage.tomography_shots},
        {"seed", c.leakage.seed}}},
  };
  return j.dump(2) + "\n";
}

}  // namespace vbqc
