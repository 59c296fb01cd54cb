#include "altgda/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "altgda/audit.hpp"
#include "altgda/dynamics.hpp"
#include "altgda/error.hpp"
#include "altgda/game.hpp"
#include "altgda/pep.hpp"
#include "altgda/search.hpp"

#ifndef ALTGDA_VERSION
#define ALTGDA_VERSION "0.0.0"
#endif

namespace altgda {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::kConfig, msg); }

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int nthreads = static_cast<int>(std::min<std::size_t>(jobs, count));
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

fs::path prepare_out(const json& doc) {
  const fs::path out = doc["out"].get<std::string>();
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    throw Error(ErrorKind::kIo, "output directory " + out.string() + " is not writable");
  }
  return out;
}

void write_manifest(const fs::path& out, const ExperimentConfig& cfg, double wall) {
  json m;
  m["command"] = cfg.command;
  m["version"] = library_version();
  m["wall_seconds"] = wall;
  m["config"] = cfg.doc;
  write_text(out / "manifest.json", m.dump(2) + "\n");
}

// --- config ------------------------------------------------------------------

void merge_into(json& base, const json& layer, const std::string& where) {
  if (!layer.is_object()) config_error(where + ": expected a table/object");
  for (auto it = layer.begin(); it != layer.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) config_error("unknown configuration key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_into(slot, it.value(), key);
    } else if (it.value().is_null()) {
      continue;
    } else {
      const bool num_ok = slot.is_number() && it.value().is_number();
      const bool null_slot = slot.is_null();
      if (!null_slot && !num_ok && slot.type() != it.value().type()) {
        config_error("configuration key '" + key + "' has the wrong type");
      }
      if (slot.is_number_integer() && !it.value().is_number_integer()) {
        const double v = it.value().get<double>();
        if (v != std::floor(v)) config_error("configuration key '" + key + "' must be an integer");
        slot = static_cast<long long>(v);
      } else {
        slot = it.value();
      }
    }
  }
}

template <class T>
T get(const json& j, const char* key) {
  return j.at(key).get<T>();
}

PayoffMatrix preset_game(const std::string& name) {
  if (name == "rps") return rock_paper_scissors();
  if (name == "matching_pennies") return matching_pennies();
  if (name == "nonint3x3") return noninterior_3x3();
  config_error("unknown game preset '" + name + "' (rps, matching_pennies, nonint3x3)");
}

PayoffMatrix build_game(const json& g) {
  const std::string file = get<std::string>(g, "file");
  if (!file.empty()) return read_matrix_file(file);
  const std::string preset = get<std::string>(g, "preset");
  if (!preset.empty()) return preset_game(preset);
  GameSpec spec;
  spec.m = get<long long>(g, "m");
  spec.n = get<long long>(g, "n");
  if (spec.m < 1 || spec.n < 1) config_error("game.m and game.n must be >= 1");
  spec.distribution = distribution_from_string(get<std::string>(g, "distribution"));
  spec.seed = get<std::uint64_t>(g, "seed");
  return generate_game(spec);
}

std::optional<EquilibriumProfile> try_reference(const PayoffMatrix& a) {
  if (a.rows() > 12 || a.cols() > 12) return std::nullopt;
  try {
    return solve_equilibrium_max_support(a);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kDegenerate) return std::nullopt;
    throw;
  }
}

struct RunSettings {
  Algorithm algorithm;
  double eta;
  long long horizon;
  std::string init;
  long long x0_vertex;
  long long y0_vertex;
  long long stride;
};

RunSettings run_settings(const json& r) {
  RunSettings s{algorithm_from_string(get<std::string>(r, "algorithm")),
                get<double>(r, "eta"),
                get<long long>(r, "horizon"),
                get<std::string>(r, "init"),
                get<long long>(r, "x0_vertex"),
                get<long long>(r, "y0_vertex"),
                get<long long>(r, "stride")};
  if (!(s.eta > 0.0)) config_error("run.eta must be > 0");
  if (s.horizon < 1) config_error("run.horizon must be >= 1");
  if (s.stride < 0) config_error("run.stride must be >= 0");
  if (s.init != "vertices" && s.init != "random" && s.init != "uniform") {
    config_error("run.init must be vertices, random or uniform");
  }
  return s;
}

RunConfig make_run_config(const PayoffMatrix& a, const RunSettings& s, std::uint64_t seed) {
  RunConfig rc;
  rc.eta = s.eta;
  rc.horizon = s.horizon;
  rc.algorithm = s.algorithm;
  if (s.init == "vertices") {
    if (s.x0_vertex < 0 || s.x0_vertex >= a.cols() || s.y0_vertex < 0 ||
        s.y0_vertex >= a.rows()) {
      config_error("run.x0_vertex / run.y0_vertex out of range for this game");
    }
    rc.x0 = MixedStrategy::vertex(a.cols(), s.x0_vertex);
    rc.y0 = MixedStrategy::vertex(a.rows(), s.y0_vertex);
  } else if (s.init == "uniform") {
    rc.x0 = MixedStrategy::uniform(a.cols());
    rc.y0 = MixedStrategy::uniform(a.rows());
  } else {
    rc.x0 = random_simplex_point(a.cols(), 2 * seed);
    rc.y0 = random_simplex_point(a.rows(), 2 * seed + 1);
  }
  if (s.stride > 0) {
    rc.record_stride = s.stride;
  } else {
    rc.record_stride = s.horizon;
    rc.checkpoints = log_checkpoints(s.horizon);
  }
  return rc;
}

SearchConfig search_settings(const json& s) {
  SearchConfig c;
  c.eta_min = get<double>(s, "eta_min");
  c.eta_max = get<double>(s, "eta_max");
  c.points_n = get<int>(s, "points_n");
  c.shrink_alpha = get<double>(s, "shrink_alpha");
  c.tol_eps = get<double>(s, "tol_eps");
  c.max_rounds = get<int>(s, "max_rounds");
  c.validate();
  return c;
}

SolverOptions solver_options(const json& doc) {
  SolverOptions o;
  o.command = resolve_solver_command(get<std::string>(doc, "solver"));
  o.timeout_seconds = get<int>(doc, "solver_timeout");
  if (o.command.empty()) {
    config_error("no SDP solver configured: set PEP_SDP_SOLVER or pass --solver <cmd> "
                 "(e.g. \"python3 tools/sdpa_cvxpy_solver.py\" or csdp)");
  }
  return o;
}

// Runs `repeats` trajectories with seeds base, base+1, ... and aggregates the
// averaged-gap curves.
BenchmarkReport run_repeats(const PayoffMatrix& a, const RunSettings& s, std::uint64_t base,
                            long long repeats, int jobs,
                            const std::optional<EquilibriumProfile>& reference,
                            std::vector<IterateTrace>* traces) {
  std::vector<IterateTrace> local(static_cast<std::size_t>(repeats));
  parallel_for(local.size(), jobs, [&](std::size_t r) {
    RunConfig rc = make_run_config(a, s, base + r);
    rc.reference = reference;
    local[r] = run(a, rc);
  });
  std::vector<long long> t;
  for (const auto& row : local.front().diagnostics) t.push_back(row.t);
  std::vector<RepeatCurve> curves;
  for (std::size_t r = 0; r < local.size(); ++r) {
    RepeatCurve c{base + r, {}};
    for (const auto& row : local[r].diagnostics) c.gap.push_back(row.gap_avg);
    curves.push_back(std::move(c));
  }
  if (traces) *traces = std::move(local);
  return aggregate(std::move(t), std::move(curves));
}

std::string two_digit(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", k);
  return buf;
}

// --- commands ----------------------------------------------------------------

ExperimentOutcome cmd_run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const json& doc = cfg.doc;
  const PayoffMatrix a = build_game(doc["game"]);
  const RunSettings s = run_settings(doc["run"]);
  const long long repeats = get<long long>(doc, "repeats");
  const fs::path out = prepare_out(doc);
  const auto reference = try_reference(a);
  std::vector<IterateTrace> traces;
  BenchmarkReport rep = run_repeats(a, s, get<std::uint64_t>(doc, "seed"), repeats,
                                    get<int>(doc, "jobs"), reference, &traces);
  for (std::size_t r = 0; r < traces.size(); ++r) {
    write_trace_csv((out / ("trace_r" + two_digit(r) + ".csv")).string(), traces[r]);
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.metadata["game"] = {{"rows", a.rows()}, {"cols", a.cols()},
                          {"spectral_norm", a.spectral_norm()}};
  rep.metadata["algorithm"] = to_string(s.algorithm);
  rep.metadata["eta"] = s.eta;
  rep.metadata["horizon"] = s.horizon;
  rep.metadata["version"] = library_version();
  write_text(out / "report.csv", rep.csv());
  write_text(out / "report.json", rep.to_json().dump(2) + "\n");
  write_manifest(out, cfg, rep.wall_seconds);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%s T=%lld eta=%g repeats=%lld: final averaged gap mean %.6e std %.3e (%s)",
                to_string(s.algorithm), s.horizon, s.eta, repeats, rep.mean.back(),
                rep.stddev.back(), out.string().c_str());
  return {0, buf};
}

ExperimentOutcome cmd_gen_game(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const PayoffMatrix a = build_game(cfg.doc["game"]);
  std::string path = get<std::string>(cfg.doc["gen_game"], "path");
  if (path.empty()) path = (prepare_out(cfg.doc) / "game.txt").string();
  write_matrix_file(path, a);
  if (get<std::string>(cfg.doc["gen_game"], "path").empty()) {
    write_manifest(prepare_out(cfg.doc), cfg,
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return {0, "wrote " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                 " game to " + path};
}

ExperimentOutcome cmd_audit(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const json& doc = cfg.doc;
  const PayoffMatrix a = build_game(doc["game"]);
  const RunSettings s = run_settings(doc["run"]);
  const fs::path out = prepare_out(doc);
  RunConfig rc = make_run_config(a, s, get<std::uint64_t>(doc, "seed"));
  rc.record_stride = 1;
  rc.checkpoints.clear();
  rc.store_iterates = true;
  rc.reference = try_reference(a);
  if (rc.reference && s.algorithm == Algorithm::kAltGda &&
      s.eta * a.spectral_norm() <= 0.5 * (1.0 + 1e-12)) {
    rc.regions = local_regions(a, s.eta, *rc.reference);
  }
  const IterateTrace tr = run(a, rc);
  const json& ac = doc["audit"];
  AuditConfig audit_cfg;
  audit_cfg.probes_per_step = get<int>(ac, "probes_per_step");
  audit_cfg.probe_stride = get<long long>(ac, "probe_stride");
  audit_cfg.elementary_probes = get<long long>(ac, "elementary_probes");
  audit_cfg.seed = get<std::uint64_t>(doc, "seed");
  if (audit_cfg.probes_per_step < 0 || audit_cfg.probe_stride < 1) {
    config_error("audit.probes_per_step must be >= 0 and audit.probe_stride >= 1");
  }
  const AuditReport rep = audit_trace(a, tr, audit_cfg);
  write_text(out / "audit.txt", rep.to_text());
  write_text(out / "audit.json", rep.to_json() + "\n");
  write_manifest(out, cfg,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return {rep.passed() ? 0 : 1, rep.to_text()};
}

ExperimentOutcome cmd_pep(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const json& doc = cfg.doc;
  const json& p = doc["pep"];
  PepSpec spec{algorithm_from_string(get<std::string>(p, "algorithm")), get<int>(p, "T"),
               get<double>(p, "eta")};
  const SdpInstance inst = assemble_pep_sdp(spec);
  const fs::path out = prepare_out(doc);
  const std::string exp = get<std::string>(p, "export");
  std::string summary;
  if (!exp.empty()) {
    export_sdpa(inst, exp);
    summary += "exported " + exp + "\n";
    if (resolve_solver_command(get<std::string>(doc, "solver")).empty()) {
      write_manifest(out, cfg, 0.0);
      return {0, summary};
    }
  }
  SolverOptions opts = solver_options(doc);
  const SdpSolution sol = solve_pep(spec, opts);
  std::string csv = "T,algorithm,eta,value,min_eigenvalue,max_eq_residual,max_ineq_violation\n";
  csv += std::to_string(spec.T) + "," + to_string(spec.algorithm) + "," +
         format_double(spec.eta) + "," + format_double(sol.objective_value) + "," +
         format_double(sol.min_eigenvalue) + "," + format_double(sol.max_eq_residual) + "," +
         format_double(sol.max_ineq_violation) + "\n";
  write_text(out / "pep.csv", csv);
  if (get<bool>(p, "reconstruct")) {
    const auto rec = reconstruct_worst_case(spec, sol);
    write_text(out / "worst_case_matrix.txt", format_matrix(PayoffMatrix(RowMatrix(rec.A))));
    summary += "reconstructed worst case: iterate error " +
               format_double(rec.max_iterate_error) + ", objective error " +
               format_double(rec.objective_error) + "\n";
  }
  write_manifest(out, cfg,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s T=%d eta=%.6g: worst-case averaged gap %.6f",
                to_string(spec.algorithm), spec.T, spec.eta, sol.objective_value);
  return {0, summary + buf};
}

std::string rounds_csv(const SearchTrace& tr) {
  std::string s = "round,range_lo,range_hi,eta,value\n";
  for (std::size_t r = 0; r < tr.rounds.size(); ++r) {
    const auto& rd = tr.rounds[r];
    for (std::size_t k = 0; k < rd.etas.size(); ++k) {
      s += std::to_string(r + 1) + "," + format_double(rd.range_lo) + "," +
           format_double(rd.range_hi) + "," + format_double(rd.etas[k]) + "," +
           format_double(rd.values[k]) + "\n";
    }
  }
  return s;
}

SearchTrace run_search(const json& doc, Algorithm alg, int T) {
  const SearchConfig sc = search_settings(doc["search"]);
  const SolverOptions opts = solver_options(doc);
  auto eval = [&](double eta) { return pep_value({alg, T, eta}, opts); };
  return optimize_stepsize(T, alg, sc, eval, get<int>(doc, "jobs"));
}

ExperimentOutcome cmd_tune(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const json& doc = cfg.doc;
  const json& p = doc["pep"];
  const Algorithm alg = algorithm_from_string(get<std::string>(p, "algorithm"));
  const int T = get<int>(p, "T");
  const fs::path out = prepare_out(doc);
  const SearchTrace tr = run_search(doc, alg, T);
  write_text(out / "search.csv", search_csv_header() + "\n" + search_csv_row(tr) + "\n");
  write_text(out / "rounds.csv", rounds_csv(tr));
  write_manifest(out, cfg,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%s T=%d: eta* = %.6f, worst-case gap %.6f (%lld solver calls, %zu rounds%s)",
                to_string(alg), T, tr.final_eta, tr.final_value, tr.solver_calls,
                tr.rounds.size(), tr.hit_round_cap ? ", round cap hit" : "");
  return {0, buf};
}

// Ternary-plot coordinates of a point of the 3-simplex.
std::pair<double, double> ternary(const Vector& p) {
  return {p[1] + 0.5 * p[2], 0.5 * std::sqrt(3.0) * p[2]};
}

void reproduce_trajectory(const json& doc, const PayoffMatrix& a, const std::string& tag,
                          const fs::path& out) {
  const json& rp = doc["reproduce"];
  RunSettings s = run_settings(doc["run"]);
  s.horizon = get<long long>(rp, "horizon");
  s.stride = get<long long>(rp, "stride");
  if (s.horizon < 1 || s.stride < 1) config_error("reproduce.horizon and reproduce.stride must be >= 1");
  RunConfig rc = make_run_config(a, s, get<std::uint64_t>(doc, "seed"));
  rc.reference = solve_equilibrium_max_support(a);
  rc.store_iterates = true;
  const IterateTrace tr = run(a, rc);
  write_trace_csv((out / (tag + "_curves.csv")).string(), tr);
  std::string csv = "t";
  for (Index i = 0; i < a.cols(); ++i) csv += ",x" + std::to_string(i + 1);
  for (Index j = 0; j < a.rows(); ++j) csv += ",y" + std::to_string(j + 1);
  const bool tern = a.rows() == 3 && a.cols() == 3;
  if (tern) csv += ",x_u,x_v,y_u,y_v";
  csv += "\n";
  for (long long t = 0; t <= s.horizon; t += s.stride) {
    csv += std::to_string(t);
    for (Index i = 0; i < a.cols(); ++i) csv += "," + format_double(tr.xs[t][i]);
    for (Index j = 0; j < a.rows(); ++j) csv += "," + format_double(tr.ys[t][j]);
    if (tern) {
      const auto [xu, xv] = ternary(tr.xs[t]);
      const auto [yu, yv] = ternary(tr.ys[t]);
      csv += "," + format_double(xu) + "," + format_double(xv) + "," + format_double(yu) + "," +
             format_double(yv);
    }
    csv += "\n";
  }
  write_text(out / (tag + "_trajectory.csv"), csv);
}

struct ReferenceRow {
  int T;
  double eta;
  double value;
};

// Optimized stepsizes and worst-case gaps for T = 5..50.
const std::vector<ReferenceRow>& reference_table(Algorithm alg) {
  static const std::vector<ReferenceRow> alt = {
      {5, 1.527, 0.614},  {6, 1.389, 0.555},  {7, 1.632, 0.488},  {8, 1.574, 0.411},
      {9, 1.467, 0.371},  {10, 1.370, 0.345}, {11, 1.304, 0.327}, {12, 1.517, 0.302},
      {13, 1.454, 0.274}, {14, 1.377, 0.256}, {15, 1.314, 0.243}, {16, 1.262, 0.233},
      {17, 1.438, 0.220}, {18, 1.387, 0.207}, {19, 1.333, 0.196}, {20, 1.283, 0.188},
      {21, 1.239, 0.181}, {22, 1.389, 0.174}, {23, 1.347, 0.166}, {24, 1.302, 0.159},
      {25, 1.263, 0.153}, {26, 1.229, 0.149}, {27, 1.355, 0.144}, {28, 1.319, 0.139},
      {29, 1.283, 0.134}, {30, 1.249, 0.130}, {31, 1.220, 0.126}, {32, 1.332, 0.123},
      {33, 1.301, 0.119}, {34, 1.269, 0.116}, {35, 1.240, 0.112}, {36, 1.214, 0.110},
      {37, 1.314, 0.107}, {38, 1.286, 0.104}, {39, 1.258, 0.102}, {40, 1.232, 0.099},
      {41, 1.209, 0.097}, {42, 1.300, 0.095}, {43, 1.275, 0.093}, {44, 1.250, 0.091},
      {45, 1.226, 0.089}, {46, 1.206, 0.087}, {47, 1.288, 0.086}, {48, 1.266, 0.084},
      {49, 1.243, 0.082}, {50, 1.221, 0.080}};
  static const std::vector<ReferenceRow> sim = {
      {5, 1.989, 1.238},  {6, 1.450, 1.150},  {7, 1.165, 1.072},  {8, 1.018, 1.009},
      {9, 0.877, 0.958},  {10, 0.769, 0.916}, {11, 0.684, 0.880}, {12, 0.616, 0.850},
      {13, 0.567, 0.823}, {14, 0.527, 0.801}, {15, 0.492, 0.781}, {16, 0.466, 0.763},
      {17, 0.440, 0.747}, {18, 0.417, 0.733}, {19, 0.398, 0.721}, {20, 0.379, 0.710},
      {21, 0.362, 0.699}, {22, 0.347, 0.690}, {23, 0.333, 0.681}, {24, 0.320, 0.673},
      {25, 0.308, 0.665}, {26, 0.298, 0.658}, {27, 0.487, 0.654}, {28, 0.472, 0.643},
      {29, 0.456, 0.633}, {30, 0.443, 0.623}, {31, 0.431, 0.613}, {32, 0.416, 0.604},
      {33, 0.406, 0.596}, {34, 0.394, 0.588}, {35, 0.384, 0.580}, {36, 0.373, 0.573},
      {37, 0.363, 0.565}, {38, 0.353, 0.559}, {39, 0.345, 0.552}, {40, 0.335, 0.546},
      {41, 0.326, 0.539}, {42, 0.318, 0.533}, {43, 0.310, 0.528}, {44, 0.303, 0.522},
      {45, 0.296, 0.517}, {46, 0.289, 0.511}, {47, 0.284, 0.506}, {48, 0.278, 0.501},
      {49, 0.272, 0.497}, {50, 0.266, 0.492}};
  return alg == Algorithm::kAltGda ? alt : sim;
}

ExperimentOutcome cmd_reproduce(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const json& doc = cfg.doc;
  const json& rp = doc["reproduce"];
  const std::string fig = get<std::string>(rp, "figure");
  std::string summary;
  if (fig != "fig2" && fig != "fig3" && fig != "fig4" && fig != "tables") {
    config_error("reproduce.figure must be fig2, fig3, fig4 or tables");
  }
  if (fig == "tables") solver_options(doc);
  const fs::path out = prepare_out(doc);
  if (fig == "fig2") {
    reproduce_trajectory(doc, rock_paper_scissors(), "fig2", out);
    summary = "wrote fig2_trajectory.csv and fig2_curves.csv";
  } else if (fig == "fig3") {
    reproduce_trajectory(doc, noninterior_3x3(), "fig3", out);
    summary = "wrote fig3_trajectory.csv and fig3_curves.csv";
  } else if (fig == "fig4") {
    RunSettings s = run_settings(doc["run"]);
    s.horizon = get<long long>(rp, "fig4_horizon");
    s.init = "random";
    s.stride = 0;
    const long long repeats = get<long long>(doc, "repeats");
    const Index m = get<long long>(rp, "fig4_rows");
    const Index n = get<long long>(rp, "fig4_cols");
    for (const auto& dist : rp["distributions"]) {
      GameSpec gs;
      gs.m = m;
      gs.n = n;
      gs.distribution = distribution_from_string(dist.get<std::string>());
      gs.seed = get<std::uint64_t>(doc, "seed");
      const PayoffMatrix a = generate_game(gs);
      for (const auto& alg_name : rp["algorithms"]) {
        s.algorithm = algorithm_from_string(alg_name.get<std::string>());
        const BenchmarkReport rep = run_repeats(a, s, get<std::uint64_t>(doc, "seed"), repeats,
                                                get<int>(doc, "jobs"), std::nullopt, nullptr);
        const std::string tag = "fig4_" + dist.get<std::string>() + "_" + to_string(s.algorithm);
        write_text(out / (tag + ".csv"), rep.csv());
        char buf[200];
        std::snprintf(buf, sizeof buf, "%s: final averaged gap mean %.4e std %.2e\n",
                      tag.c_str(), rep.mean.back(), rep.stddev.back());
        summary += buf;
      }
    }
  } else {
    std::string cmp = "T,algorithm,eta_reference,value_reference,eta_found,value_found,solver_calls\n";
    for (const auto& alg_name : rp["algorithms"]) {
      const Algorithm alg = algorithm_from_string(alg_name.get<std::string>());
      std::string csv = search_csv_header() + "\n";
      for (const auto& Tj : rp["horizons"]) {
        const int T = Tj.get<int>();
        const SearchTrace tr = run_search(doc, alg, T);
        csv += search_csv_row(tr) + "\n";
        std::string ref_eta = "nan", ref_val = "nan";
        for (const auto& row : reference_table(alg)) {
          if (row.T == T) {
            ref_eta = format_double(row.eta);
            ref_val = format_double(row.value);
          }
        }
        cmp += std::to_string(T) + "," + to_string(alg) + "," + ref_eta + "," + ref_val + "," +
               format_double(tr.final_eta) + "," + format_double(tr.final_value) + "," +
               std::to_string(tr.solver_calls) + "\n";
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s T=%d: eta* %.4f value %.4f (reference %s / %s)\n",
                      to_string(alg), T, tr.final_eta, tr.final_value, ref_eta.c_str(),
                      ref_val.c_str());
        summary += buf;
      }
      write_text(out / (std::string("tables_") + to_string(alg) + ".csv"), csv);
    }
    write_text(out / "tables_compare.csv", cmp);
  }
  write_manifest(out, cfg,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return {0, summary};
}

// --- TOML subset ---------------------------------------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"' && (k == 0 || line[k - 1] != '\\')) in_str = !in_str;
    if (line[k] == '#' && !in_str) return line.substr(0, k);
  }
  return line;
}

json parse_toml_value(const std::string& raw, int lineno) {
  const std::string v = trim(raw);
  auto bad = [&] {
    config_error("TOML line " + std::to_string(lineno) + ": unsupported value '" + v + "'");
  };
  if (v.empty()) bad();
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"' || v.front() == '\'') {
    if (v.size() < 2 || v.back() != v.front()) bad();
    return json::parse("\"" + v.substr(1, v.size() - 2) + "\"");
  }
  if (v.front() == '[') {
    if (v.back() != ']') bad();
    json arr = json::array();
    const std::string inner = trim(v.substr(1, v.size() - 2));
    if (inner.empty()) return arr;
    std::string cur;
    bool in_str = false;
    for (char ch : inner) {
      if (ch == '"') in_str = !in_str;
      if (ch == ',' && !in_str) {
        if (!trim(cur).empty()) arr.push_back(parse_toml_value(cur, lineno));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!trim(cur).empty()) arr.push_back(parse_toml_value(cur, lineno));
    return arr;
  }
  std::string num;
  for (char ch : v) {
    if (ch != '_') num += ch;
  }
  try {
    std::size_t used = 0;
    if (num.find_first_of(".eEn") == std::string::npos) {
      const long long i = std::stoll(num, &used);
      if (used == num.size()) return i;
    }
    const double d = std::stod(num, &used);
    if (used == num.size()) return d;
  } catch (const std::exception&) {
  }
  bad();
  return {};
}

}  // namespace

std::vector<long long> log_checkpoints(long long T, int per_decade) {
  if (T < 1) throw Error(ErrorKind::kConfig, "checkpoint horizon must be >= 1");
  if (per_decade < 1) throw Error(ErrorKind::kConfig, "per_decade must be >= 1");
  std::vector<long long> out{1};
  const double top = std::log10(static_cast<double>(T));
  for (long long k = 1;; ++k) {
    const double e = static_cast<double>(k) / per_decade;
    if (e >= top) break;
    const long long t = std::llround(std::pow(10.0, e));
    if (t > out.back() && t < T) out.push_back(t);
  }
  if (out.back() != T) out.push_back(T);
  return out;
}

BenchmarkReport aggregate(std::vector<long long> t, std::vector<RepeatCurve> repeats) {
  if (repeats.empty()) throw Error(ErrorKind::kContract, "aggregate needs at least one repeat");
  for (const auto& r : repeats) {
    if (r.gap.size() != t.size()) {
      throw Error(ErrorKind::kContract, "repeat curves must share the checkpoint grid");
    }
  }
  BenchmarkReport rep;
  rep.t = std::move(t);
  rep.repeats = std::move(repeats);
  const std::size_t R = rep.repeats.size();
  rep.mean.assign(rep.t.size(), 0.0);
  rep.stddev.assign(rep.t.size(), 0.0);
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    double s = 0.0;
    for (const auto& r : rep.repeats) s += r.gap[k];
    const double mean = s / static_cast<double>(R);
    double ss = 0.0;
    for (const auto& r : rep.repeats) ss += (r.gap[k] - mean) * (r.gap[k] - mean);
    rep.mean[k] = mean;
    rep.stddev[k] = R > 1 ? std::sqrt(ss / static_cast<double>(R - 1)) : 0.0;
  }
  return rep;
}

std::string BenchmarkReport::csv() const {
  std::string s = "t,mean_gap,std_gap";
  for (std::size_t r = 0; r < repeats.size(); ++r) s += ",gap_r" + std::to_string(r);
  s += "\n";
  for (std::size_t k = 0; k < t.size(); ++k) {
    s += std::to_string(t[k]) + "," + format_double(mean[k]) + "," + format_double(stddev[k]);
    for (const auto& r : repeats) s += "," + format_double(r.gap[k]);
    s += "\n";
  }
  return s;
}

nlohmann::ordered_json BenchmarkReport::to_json() const {
  json j;
  j["metadata"] = metadata;
  j["wall_seconds"] = wall_seconds;
  j["t"] = t;
  j["mean"] = mean;
  j["std"] = stddev;
  json reps = json::array();
  for (const auto& r : repeats) reps.push_back({{"seed", r.seed}, {"gap", r.gap}});
  j["repeats"] = reps;
  return j;
}

nlohmann::ordered_json default_config() {
  json d;
  d["seed"] = 0;
  d["jobs"] = 0;
  d["out"] = "out";
  d["solver"] = "";
  d["solver_timeout"] = 600;
  d["repeats"] = 1;
  d["game"] = {{"preset", "rps"}, {"file", ""}, {"m", 3}, {"n", 3},
               {"distribution", "uniform01"}, {"seed", 0}};
  d["run"] = {{"algorithm", "altgda"}, {"eta", 0.01}, {"horizon", 10000},
              {"init", "vertices"}, {"x0_vertex", 0}, {"y0_vertex", 1}, {"stride", 0}};
  d["pep"] = {{"algorithm", "altgda"}, {"T", 5}, {"eta", 1.527}, {"export", ""},
              {"reconstruct", false}};
  d["search"] = {{"eta_min", 0.5}, {"eta_max", 2.5}, {"points_n", 20},
                 {"shrink_alpha", 1.0}, {"tol_eps", 1e-3}, {"max_rounds", 50}};
  d["audit"] = {{"probes_per_step", 100}, {"probe_stride", 1}, {"elementary_probes", 10000}};
  d["gen_game"] = {{"path", ""}};
  d["reproduce"] = {
      {"figure", "fig2"},
      {"horizon", 100000},
      {"stride", 10},
      {"fig4_horizon", 1000000},
      {"fig4_rows", 10},
      {"fig4_cols", 20},
      {"distributions",
       {"uniform01", "randint", "binary", "normal", "lognormal", "exponential"}},
      {"algorithms", {"altgda", "simgda"}},
      {"horizons", {5, 10, 15, 20, 25, 30, 35, 40, 45, 50}}};
  return d;
}

nlohmann::ordered_json parse_toml(const std::string& text) {
  json root = json::object();
  json* table = &root;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3 || s[1] == '[') {
        config_error("TOML line " + std::to_string(lineno) + ": unsupported table header");
      }
      table = &root;
      std::string path = trim(s.substr(1, s.size() - 2));
      std::stringstream ps(path);
      std::string part;
      while (std::getline(ps, part, '.')) {
        part = trim(part);
        if (!table->contains(part)) (*table)[part] = json::object();
        table = &(*table)[part];
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      config_error("TOML line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(s.substr(0, eq));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') {
      key = key.substr(1, key.size() - 2);
    }
    if (key.empty()) config_error("TOML line " + std::to_string(lineno) + ": empty key");
    if (table->contains(key)) {
      config_error("TOML line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    (*table)[key] = parse_toml_value(s.substr(eq + 1), lineno);
  }
  return root;
}

nlohmann::ordered_json load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::kConfig, "cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  const auto first = text.find_first_not_of(" \t\r\n");
  if (is_json || (first != std::string::npos && text[first] == '{')) {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kConfig, "bad JSON in " + path + ": " + e.what());
    }
  }
  return parse_toml(text);
}

ExperimentConfig resolve_config(const std::string& command, const nlohmann::ordered_json& file,
                                const nlohmann::ordered_json& overrides) {
  static const std::set<std::string> commands = {"run",      "pep",      "tune",
                                                 "audit",    "gen-game", "reproduce"};
  if (!commands.count(command)) config_error("unknown command '" + command + "'");
  ExperimentConfig cfg;
  cfg.command = command;
  cfg.doc = default_config();
  if (!file.is_null()) merge_into(cfg.doc, file, "");
  if (!overrides.is_null()) merge_into(cfg.doc, overrides, "");
  if (cfg.doc["repeats"].get<long long>() < 1) config_error("repeats must be >= 1");
  if (cfg.doc["jobs"].get<long long>() < 0) config_error("jobs must be >= 0");
  if (cfg.doc["solver_timeout"].get<long long>() < 1) config_error("solver_timeout must be >= 1");
  if (cfg.doc["seed"].is_number_integer() && cfg.doc["seed"].get<long long>() < 0 &&
      !cfg.doc["seed"].is_number_unsigned()) {
    config_error("seed must be a non-negative integer");
  }
  if (cfg.doc["out"].get<std::string>().empty()) config_error("out must not be empty");
  return cfg;
}

ExperimentOutcome execute_experiment(const ExperimentConfig& cfg) {
  try {
    if (cfg.command == "run") return cmd_run(cfg);
    if (cfg.command == "pep") return cmd_pep(cfg);
    if (cfg.command == "tune") return cmd_tune(cfg);
    if (cfg.command == "audit") return cmd_audit(cfg);
    if (cfg.command == "gen-game") return cmd_gen_game(cfg);
    if (cfg.command == "reproduce") return cmd_reproduce(cfg);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("configuration: ") + e.what());
  }
  config_error("unknown command '" + cfg.command + "'");
}

const char* library_version() { return ALTGDA_VERSION; }

}  // namespace altgda
