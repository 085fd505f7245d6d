// fishmonger: simulate, verify and play the committed posted-price mechanism.
//
// Exit codes: 0 success, 1 runtime error or failed check, 2 usage/config error.

#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fishmonger/config.hpp"
#include "fishmonger/errors.hpp"
#include "fishmonger/io.hpp"
#include "fishmonger/oracle.hpp"
#include "fishmonger/server.hpp"
#include "fishmonger/session.hpp"
#include "fishmonger/verifier.hpp"

namespace fs = std::filesystem;
using namespace fishmonger;

namespace {

constexpr const char* kVersion = "0.1.0";

// Raised for bad command-line input detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  template <typename Fn>
  void write(const std::string& name, Fn&& fill) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fill(out);
    out.close();
    files_.push_back(path);
  }

  void write_manifest(const std::string& command, const nlohmann::json& config,
                      const std::vector<std::uint64_t>& seeds, const std::string& started) {
    nlohmann::json artifacts = nlohmann::json::array();
    for (const fs::path& f : files_) {
      artifacts.push_back({{"path", f.filename().string()}, {"sha256", file_digest(f)}});
    }
    const nlohmann::json manifest = {{"command", command},
                                     {"config", config},
                                     {"seeds", seeds},
                                     {"artifacts", artifacts},
                                     {"started", started},
                                     {"finished", timestamp()},
                                     {"version", kVersion}};
    std::ofstream out(dir_ / "manifest.json");
    out << manifest.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::string s = text;
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError("not a number in list: '" + tok + "'");
    }
  }
  if (out.empty()) throw UsageError("list must not be empty");
  return out;
}

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  ConfigOverrides overrides;
  std::uint64_t seed = 0;
  std::size_t rounds = 0;
  std::size_t replications = 0;
  double q = 0.0;
  double threshold = 0.0;
};

bool given(const CLI::App& cmd, const std::string& name) {
  const CLI::Option* opt = cmd.get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

RunConfig resolve_config(const CLI::App& cmd, const CommonOptions& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = load_run_config(opts.config_path);
  } else {
    cfg.curve_spec = curve_to_json(cfg.curve);
  }
  ConfigOverrides o;
  if (given(cmd, "--seed")) o.seed = opts.seed;
  if (given(cmd, "--rounds")) o.rounds = opts.rounds;
  if (given(cmd, "--replications")) o.replications = opts.replications;
  if (given(cmd, "--q")) o.cook_type = opts.q;
  if (given(cmd, "--threshold")) o.threshold = opts.threshold;
  apply_overrides(cfg, o);
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool engine_flags = true) {
  cmd->add_option("--config", opts.config_path, "Run configuration file");
  cmd->add_option("--out-dir", opts.out_dir, "Directory for output artifacts");
  cmd->add_option("--q", opts.q, "Cook type (true valuation)");
  if (engine_flags) {
    cmd->add_option("--seed", opts.seed, "Root seed");
    cmd->add_option("--rounds", opts.rounds, "Rounds per game");
    cmd->add_option("--replications", opts.replications, "Monte Carlo replications");
    cmd->add_option("--threshold", opts.threshold, "Naive threshold x played by the cook");
  }
}

int cmd_simulate(const CLI::App& cmd, const CommonOptions& opts) {
  const std::string started = timestamp();
  const RunConfig cfg = resolve_config(cmd, opts);
  const GameConfig game = cfg.game();
  const RunResult result = run(game);

  const fs::path out_dir = opts.out_dir.empty() ? fs::path("out") : fs::path(opts.out_dir);
  ArtifactWriter w(out_dir);
  w.write("config.ini", [&](std::ostream& o) { o << to_ini(cfg); });
  w.write("history.jsonl", [&](std::ostream& o) { write_history_jsonl(o, result.history); });
  w.write("stats.json", [&](std::ostream& o) { o << to_json(result.stats).dump(2) << '\n'; });
  w.write("prefix.csv", [&](std::ostream& o) { write_prefix_csv(o, result.stats.series); });
  std::vector<std::uint64_t> seeds{cfg.seed};
  if (cfg.replications > 1) {
    const MonteCarloSummary mc = monte_carlo(game, cfg.replications);
    w.write("monte_carlo.json", [&](std::ostream& o) { o << to_json(mc).dump(2) << '\n'; });
    seeds.insert(seeds.end(), mc.seeds.begin(), mc.seeds.end());
    std::cout << "monte carlo (" << mc.replications << " replications): surplus_avg mean "
              << mc.surplus_avg.mean << ", revenue_avg mean " << mc.revenue_avg.mean << '\n';
  }
  w.write_manifest("simulate", cfg.to_json(), seeds, started);

  const RunStatistics& st = result.stats;
  std::cout << "rounds " << st.rounds << "  surplus_avg " << st.surplus_avg << "  revenue_avg "
            << st.revenue_avg << "  accept_freq " << st.accept_freq << "  welfare_residual "
            << st.welfare_residual << '\n'
            << "artifacts written to " << out_dir.string() << '\n';
  return 0;
}

std::vector<std::pair<std::string, RewardCurve>> builtin_curves() {
  return {{"rational(1)", RewardCurve(AcceptanceCurve::rational())},
          {"exponential(1)", RewardCurve(AcceptanceCurve::exponential(1.0))},
          {"exponential(0.5)", RewardCurve(AcceptanceCurve::exponential(0.5))}};
}

int cmd_verify(const CLI::App& cmd, const std::string& suite, const std::string& curve_file,
               const CommonOptions& opts) {
  static const std::vector<std::string> kChecks{"simplex",  "derivative", "spence-mirrlees",
                                                "key-inequality", "distortion", "sweep-smoke",
                                                "share-bound"};
  if (suite.empty()) throw UsageError("--suite must not be empty");
  std::vector<std::string> selected;
  for (std::string item : CLI::detail::split(suite, ',')) {
    item = CLI::detail::trim_copy(item);
    if (item.empty()) continue;
    if (item == "all") {
      selected = kChecks;
    } else if (item == "default") {
      for (const char* c : {"simplex", "derivative", "spence-mirrlees", "key-inequality",
                            "distortion", "sweep-smoke"}) {
        selected.emplace_back(c);
      }
    } else if (item == "closed-form") {
      for (const char* c : {"simplex", "derivative", "spence-mirrlees", "key-inequality",
                            "distortion"}) {
        selected.emplace_back(c);
      }
    } else if (std::find(kChecks.begin(), kChecks.end(), item) != kChecks.end()) {
      selected.push_back(item);
    } else {
      throw UsageError("unknown check '" + item + "'");
    }
  }
  if (selected.empty()) throw UsageError("--suite selected no checks");
  auto wants = [&](const char* name) {
    return std::find(selected.begin(), selected.end(), name) != selected.end();
  };

  std::vector<std::pair<std::string, RewardCurve>> curves;
  if (!curve_file.empty()) {
    curves.emplace_back(curve_file, RewardCurve(AcceptanceCurve::load_csv(curve_file, false)));
  } else if (!opts.config_path.empty()) {
    const RunConfig cfg = resolve_config(cmd, opts);
    curves.emplace_back(std::string(to_string(cfg.curve.family())), RewardCurve(cfg.curve));
  } else {
    curves = builtin_curves();
  }

  std::vector<CheckReport> reports;
  const auto grid = linear_grid(0.0, 10.0, 0.1);
  for (auto& [label, rc] : curves) {
    auto tag = [&label](CheckReport r) {
      r.name += " " + label;
      return r;
    };
    if (wants("simplex")) reports.push_back(tag(check_simplex(rc, log_grid(1e-4, 1e4, 400))));
    if (wants("derivative")) reports.push_back(tag(check_derivative(rc, log_grid(1e-3, 1e3, 200))));
    if (wants("spence-mirrlees")) reports.push_back(tag(check_spence_mirrlees(rc, grid, grid)));
    if (wants("key-inequality")) reports.push_back(tag(check_key_inequality(rc, grid, grid)));
    if (wants("distortion")) {
      reports.push_back(tag(distortion_curve(rc, {1.0, 10.0, 100.0, 1000.0}).report));
    }
  }
  if (wants("sweep-smoke")) {
    GameConfig base;
    base.curve = AcceptanceCurve::rational();
    base.cook_type = 2.0;
    base.rounds = 20000;
    base.burn_in = 2000;
    base.seed = 7;
    reports.push_back(threshold_sweep(base, {1.0, 2.0, 3.0}, 2, 0.05).report);
  }
  if (wants("share-bound")) {
    GameConfig base;
    base.curve = AcceptanceCurve::rational();
    base.seed = 11;
    const RewardCurve rc(base.curve);
    reports.push_back(
        check_share_bound(rc, 1.0, 0.01, simulate_share_samples(base, 1.0, {10.0, 100.0}, 2)));
  }

  bool ok = true;
  nlohmann::json all = nlohmann::json::array();
  for (const CheckReport& r : reports) {
    std::cout << summary_line(r) << '\n';
    ok = ok && (r.passed || r.skipped);
    all.push_back(to_json(r));
  }
  if (!opts.out_dir.empty()) {
    ArtifactWriter w(opts.out_dir);
    w.write("reports.json", [&](std::ostream& o) { o << all.dump(2) << '\n'; });
    w.write("summary.txt", [&](std::ostream& o) {
      for (const CheckReport& r : reports) o << summary_line(r) << '\n';
    });
  }
  std::cout << (ok ? "all checks passed" : "some checks FAILED") << '\n';
  return ok ? 0 : 1;
}

int cmd_sweep(const CLI::App& cmd, const std::string& kind, const std::string& list,
              const CommonOptions& opts) {
  const std::vector<double> values = parse_list(list);
  RunConfig cfg = resolve_config(cmd, opts);
  std::ostringstream csv;
  CheckReport report;
  if (kind == "distortion") {
    const DistortionResult d = distortion_curve(RewardCurve(cfg.curve), values);
    write_distortion_csv(csv, d.rows);
    report = d.report;
  } else if (kind == "threshold") {
    GameConfig base = cfg.game();
    const SweepResult s = threshold_sweep(base, values, std::max<std::size_t>(1, cfg.replications));
    write_sweep_csv(csv, s.rows);
    report = s.report;
    std::cerr << "argmax threshold " << s.argmax << '\n';
  } else {
    throw UsageError("--kind must be distortion or threshold");
  }
  if (opts.out_dir.empty()) {
    std::cout << csv.str();
  } else {
    ArtifactWriter w(opts.out_dir);
    w.write(kind + ".csv", [&](std::ostream& o) { o << csv.str(); });
    w.write("report.json", [&](std::ostream& o) { o << to_json(report).dump(2) << '\n'; });
  }
  std::cerr << summary_line(report) << '\n';
  return report.passed || report.skipped ? 0 : 1;
}

int cmd_oracle(const CLI::App& cmd, const CommonOptions& opts, std::size_t horizon, std::size_t grid) {
  RunConfig cfg = resolve_config(cmd, opts);
  if (given(cmd, "--horizon")) cfg.horizon = horizon;
  if (given(cmd, "--grid")) cfg.grid = grid;
  const OracleResult r = expectimax_oracle(cfg.oracle());
  nlohmann::json j = to_json(r);
  j["horizon"] = cfg.horizon;
  j["grid"] = cfg.grid;
  j["cook_type"] = cfg.cook_type;
  j["curve"] = cfg.curve_spec;
  std::cout << j.dump(2) << '\n';
  if (!opts.out_dir.empty()) {
    ArtifactWriter w(opts.out_dir);
    w.write("oracle.json", [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }
  return 0;
}

PlayServer* g_server = nullptr;

int cmd_serve(const std::string& host, int port, const std::string& data_dir) {
  std::optional<fs::path> dir;
  if (!data_dir.empty()) dir = data_dir;
  SessionStore store(dir);
  PlayServer server(store);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ":" << port << '\n';
    return 1;
  }
  std::cout << "serving on http://" << host << ":" << bound << " (" << store.size()
            << " sessions recovered)" << std::endl;
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  server.listen_after_bind();
  g_server = nullptr;
  return 0;
}

int cmd_audit(const std::string& data_dir, const std::string& session, const std::string& out_dir) {
  SessionStore store(fs::path{data_dir});
  const nlohmann::json report = store.audit(session);
  const auto& cred = report["credibility"];
  std::cout << "session " << session << ": " << cred["rounds"] << " rounds, verdict "
            << cred["verdict"].get<std::string>() << ", replay "
            << (report["replay_matches"].get<bool>() ? "matches" : "MISMATCH") << ", commitment "
            << (report["commitment_verified"].get<bool>() ? "verified" : "INVALID") << '\n';
  if (!out_dir.empty()) {
    ArtifactWriter w(out_dir);
    w.write("audit.json", [&](std::ostream& o) { o << report.dump(2) << '\n'; });
  }
  const bool ok = cred["verdict"] != "fail" && report["replay_matches"].get<bool>() &&
                  report["commitment_verified"].get<bool>();
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Committed-strategy repeated posted-price auction toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOptions sim_opts, verify_opts, sweep_opts, oracle_opts;

  auto* simulate = app.add_subcommand("simulate", "Run the repeated game and write artifacts");
  add_common(simulate, sim_opts);

  auto* verify = app.add_subcommand("verify", "Run verification checks");
  std::string suite = "default";
  std::string curve_file;
  verify->add_option("--suite", suite,
                     "Comma-separated checks: default, closed-form, all, simplex, derivative, "
                     "spence-mirrlees, key-inequality, distortion, sweep-smoke, share-bound");
  verify->add_option("--curve-file", curve_file, "Tabulated curve CSV to check (not validated)");
  add_common(verify, verify_opts, false);

  auto* sweep = app.add_subcommand("sweep", "Distortion or threshold sweeps as CSV");
  std::string kind = "distortion";
  std::string list;
  sweep->add_option("--kind", kind, "distortion | threshold");
  sweep->add_option("--list", list, "Comma-separated q-list (distortion) or x-list (threshold)")
      ->required();
  add_common(sweep, sweep_opts);

  auto* oracle = app.add_subcommand("oracle", "Exact finite-horizon best response");
  std::size_t horizon = 4, grid = 3;
  oracle->add_option("--horizon", horizon, "Horizon H");
  oracle->add_option("--grid", grid, "Adaptation atoms per unit interval G");
  add_common(oracle, oracle_opts, false);

  auto* serve = app.add_subcommand("serve", "Run the play service");
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string serve_dir;
  serve->add_option("--port", port, "Listen port (0 picks a free port)");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--data-dir", serve_dir, "Directory for session event logs");

  auto* audit = app.add_subcommand("audit", "Audit a finished session from its event log");
  std::string audit_dir, audit_session, audit_out;
  audit->add_option("--data-dir", audit_dir, "Session log directory")->required();
  audit->add_option("--session", audit_session, "Session id")->required();
  audit->add_option("--out-dir", audit_out, "Directory for audit.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(*simulate, sim_opts);
    if (*verify) return cmd_verify(*verify, suite, curve_file, verify_opts);
    if (*sweep) return cmd_sweep(*sweep, kind, list, sweep_opts);
    if (*oracle) return cmd_oracle(*oracle, oracle_opts, horizon, grid);
    if (*serve) return cmd_serve(host, port, serve_dir);
    if (*audit) return cmd_audit(audit_dir, audit_session, audit_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ServiceError& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
