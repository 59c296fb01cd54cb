// Command-line driver: run | pep | tune | audit | gen-game | reproduce.
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "altgda/altgda.h"
#include "json.hpp"

namespace {

using json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kAuditFailure = 1, kConfigError = 2, kSolverError = 3 };

int exit_code_for(altgda_status s) {
  switch (s) {
    case ALTGDA_OK: return kOk;
    case ALTGDA_E_SOLVER:
    case ALTGDA_E_CERTIFICATE:
    case ALTGDA_E_RECONSTRUCTION: return kSolverError;
    default: return kConfigError;
  }
}

template <class T>
void put(json& j, const char* section, const char* key, const std::optional<T>& v) {
  if (!v) return;
  if (section) {
    j[section][key] = *v;
  } else {
    j[key] = *v;
  }
}

struct GameFlags {
  std::optional<std::string> preset, file, distribution;
  std::optional<long long> m, n;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--game", preset, "Preset game: rps, matching_pennies, nonint3x3");
    app->add_option("--game-file", file, "Payoff matrix file");
    app->add_option("--rows,-m", m, "Rows of a generated game");
    app->add_option("--cols,-n", n, "Columns of a generated game");
    app->add_option("--distribution", distribution,
                    "uniform01, randint, binary, normal, lognormal, exponential");
    app->add_option("--game-seed", seed, "Seed of a generated game");
  }
  void apply(json& j) const {
    // A generated-game flag turns the default preset off.
    if ((m || n || distribution || seed) && !preset) j["game"]["preset"] = "";
    put(j, "game", "preset", preset);
    put(j, "game", "file", file);
    put(j, "game", "m", m);
    put(j, "game", "n", n);
    put(j, "game", "distribution", distribution);
    put(j, "game", "seed", seed);
  }
};

struct RunFlags {
  std::optional<std::string> algorithm, init;
  std::optional<double> eta;
  std::optional<long long> horizon, x0, y0, stride;

  void add(CLI::App* app) {
    app->add_option("--algorithm,-a", algorithm, "altgda or simgda");
    app->add_option("--eta", eta, "Stepsize");
    app->add_option("--horizon,-T", horizon, "Number of iterations");
    app->add_option("--init", init, "vertices, random or uniform");
    app->add_option("--x0-vertex", x0, "Initial x vertex (init = vertices)");
    app->add_option("--y0-vertex", y0, "Initial y vertex (init = vertices)");
    app->add_option("--stride", stride, "Record every k-th iteration (0: log-spaced)");
  }
  void apply(json& j) const {
    put(j, "run", "algorithm", algorithm);
    put(j, "run", "eta", eta);
    put(j, "run", "horizon", horizon);
    put(j, "run", "init", init);
    put(j, "run", "x0_vertex", x0);
    put(j, "run", "y0_vertex", y0);
    put(j, "run", "stride", stride);
  }
};

struct PepFlags {
  std::optional<std::string> algorithm, export_path;
  std::optional<int> T;
  std::optional<double> eta;
  bool reconstruct = false;

  void add(CLI::App* app, bool with_eta) {
    app->add_option("--algorithm,-a", algorithm, "altgda or simgda");
    app->add_option("-T,--horizon", T, "Horizon");
    if (with_eta) {
      app->add_option("--eta", eta, "Stepsize");
      app->add_option("--export", export_path, "Also write the SDP in SDPA sparse format");
      app->add_flag("--reconstruct", reconstruct, "Rebuild and replay the worst-case instance");
    }
  }
  void apply(json& j) const {
    put(j, "pep", "algorithm", algorithm);
    put(j, "pep", "T", T);
    put(j, "pep", "eta", eta);
    put(j, "pep", "export", export_path);
    if (reconstruct) j["pep"]["reconstruct"] = true;
  }
};

struct SearchFlags {
  std::optional<double> eta_min, eta_max, alpha, tol;
  std::optional<int> points, rounds;

  void add(CLI::App* app) {
    app->add_option("--eta-min", eta_min, "Lower end of the initial range");
    app->add_option("--eta-max", eta_max, "Upper end of the initial range");
    app->add_option("--points", points, "Candidates per round");
    app->add_option("--alpha", alpha, "Window shrink factor");
    app->add_option("--tol", tol, "Stop when the range is narrower than this");
    app->add_option("--max-rounds", rounds, "Round cap");
  }
  void apply(json& j) const {
    put(j, "search", "eta_min", eta_min);
    put(j, "search", "eta_max", eta_max);
    put(j, "search", "points_n", points);
    put(j, "search", "shrink_alpha", alpha);
    put(j, "search", "tol_eps", tol);
    put(j, "search", "max_rounds", rounds);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alternating and simultaneous projected gradient descent ascent on matrix games"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(altgda_version()));

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs, timeout;
  std::optional<std::string> out, solver;
  std::optional<long long> repeats;
  bool print_config = false;
  app.add_option("--config", config_path, "TOML or JSON experiment file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Base seed");
  app.add_option("--jobs", jobs, "Worker threads (0: all cores)");
  app.add_option("--out", out, "Output directory");
  app.add_option("--solver", solver, "SDP solver command (PEP_SDP_SOLVER overrides)");
  app.add_option("--solver-timeout", timeout, "Seconds per solver call");
  app.add_flag("--print-config", print_config, "Print the resolved configuration and exit");

  GameFlags game;
  RunFlags runf;
  PepFlags pep;
  SearchFlags search;

  auto* run = app.add_subcommand("run", "Run the dynamics and write trace CSVs");
  game.add(run);
  runf.add(run);
  run->add_option("--repeats", repeats, "Independent repeats");

  auto* pep_cmd = app.add_subcommand("pep", "Worst-case averaged gap via the PEP SDP");
  pep.add(pep_cmd, true);

  auto* tune = app.add_subcommand("tune", "Optimize the stepsize for a horizon");
  pep.add(tune, false);
  search.add(tune);

  auto* audit = app.add_subcommand("audit", "Check every invariant on a stored trajectory");
  game.add(audit);
  runf.add(audit);
  std::optional<int> probes;
  std::optional<long long> probe_stride;
  audit->add_option("--probes", probes, "Random probes per step");
  audit->add_option("--probe-stride", probe_stride, "Probe every k-th step");

  auto* gen = app.add_subcommand("gen-game", "Write a payoff matrix file");
  game.add(gen);
  std::optional<std::string> gen_path;
  gen->add_option("--path", gen_path, "Output file (default: <out>/game.txt)");

  auto* repro = app.add_subcommand("reproduce", "Emit the data behind a figure or table");
  std::string figure;
  repro->add_option("figure", figure, "fig2, fig3, fig4 or tables")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "tables"}));
  std::optional<long long> r_horizon, r_stride, f4_horizon;
  std::optional<std::vector<std::string>> dists, algs;
  std::optional<std::vector<int>> horizons;
  repro->add_option("--horizon", r_horizon, "Iterations for fig2/fig3");
  repro->add_option("--stride", r_stride, "Trajectory sampling stride for fig2/fig3");
  repro->add_option("--fig4-horizon", f4_horizon, "Iterations for fig4");
  repro->add_option("--repeats", repeats, "Repeats for fig4");
  repro->add_option("--distributions", dists, "fig4 distributions");
  repro->add_option("--algorithms", algs, "Algorithms for fig4 and tables");
  repro->add_option("--horizons", horizons, "Horizons for tables");
  search.add(repro);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  json ov = json::object();
  put(ov, nullptr, "seed", seed);
  put(ov, nullptr, "jobs", jobs);
  put(ov, nullptr, "out", out);
  put(ov, nullptr, "solver", solver);
  put(ov, nullptr, "solver_timeout", timeout);
  put(ov, nullptr, "repeats", repeats);

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  if (sub == run || sub == audit || sub == gen) game.apply(ov);
  if (sub == run || sub == audit) runf.apply(ov);
  if (sub == pep_cmd || sub == tune) pep.apply(ov);
  if (sub == tune || sub == repro) search.apply(ov);
  if (sub == audit) {
    put(ov, "audit", "probes_per_step", probes);
    put(ov, "audit", "probe_stride", probe_stride);
  }
  if (sub == gen) put(ov, "gen_game", "path", gen_path);
  if (sub == repro) {
    ov["reproduce"]["figure"] = figure;
    put(ov, "reproduce", "horizon", r_horizon);
    put(ov, "reproduce", "stride", r_stride);
    put(ov, "reproduce", "fig4_horizon", f4_horizon);
    put(ov, "reproduce", "distributions", dists);
    put(ov, "reproduce", "algorithms", algs);
    put(ov, "reproduce", "horizons", horizons);
  }

  altgda_experiment* ex = nullptr;
  const std::string ov_text = ov.dump();
  altgda_status s = altgda_experiment_create(command.c_str(),
                                             config_path.empty() ? nullptr : config_path.c_str(),
                                             ov_text.c_str(), &ex);
  if (s != ALTGDA_OK) {
    std::fprintf(stderr, "error (%s): %s\n", altgda_status_string(s), altgda_last_error());
    return exit_code_for(s);
  }
  if (print_config) {
    std::printf("%s\n", altgda_experiment_config(ex));
    altgda_experiment_destroy(ex);
    return 0;
  }
  int code = 0;
  s = altgda_experiment_execute(ex, &code);
  if (s != ALTGDA_OK) {
    std::fprintf(stderr, "error (%s): %s\n", altgda_status_string(s), altgda_last_error());
    altgda_experiment_destroy(ex);
    return exit_code_for(s);
  }
  const std::string summary = altgda_experiment_summary(ex);
  if (!summary.empty()) {
    std::printf("%s%s", summary.c_str(), summary.back() == '\n' ? "" : "\n");
  }
  altgda_experiment_destroy(ex);
  return code == 0 ? kOk : kAuditFailure;
}
