#include "altgda/altgda.h"

#include <cstring>
#include <string>

#include "altgda/bench.hpp"
#include "altgda/dynamics.hpp"
#include "altgda/error.hpp"
#include "altgda/game.hpp"
#include "altgda/pep.hpp"

struct altgda_game {
  altgda::PayoffMatrix matrix;
};

struct altgda_trace {
  altgda::IterateTrace trace;
};

struct altgda_experiment {
  altgda::ExperimentConfig config;
  std::string config_text;
  std::string summary;
};

namespace {

thread_local std::string g_last_error;

altgda_status fail(altgda_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
altgda_status guard(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const altgda::Error& e) {
    return fail(static_cast<altgda_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ALTGDA_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ALTGDA_E_INTERNAL, e.what());
  }
}

#define ALTGDA_REQUIRE(p)                                               \
  do {                                                                  \
    if (!(p)) return fail(ALTGDA_E_NULL_ARGUMENT, #p " must not be NULL"); \
  } while (0)

altgda::Algorithm to_alg(altgda_algorithm a) {
  if (a == ALTGDA_ALTERNATING) return altgda::Algorithm::kAltGda;
  if (a == ALTGDA_SIMULTANEOUS) return altgda::Algorithm::kSimGda;
  throw altgda::Error(altgda::ErrorKind::kContract, "unknown algorithm code");
}

altgda::Vector copy_vec(const double* p, altgda::Index n) {
  return Eigen::Map<const altgda::Vector>(p, n);
}

}  // namespace

extern "C" {

const char* altgda_version(void) { return altgda::library_version(); }

const char* altgda_status_string(altgda_status status) {
  switch (status) {
    case ALTGDA_OK: return "ok";
    case ALTGDA_E_NULL_ARGUMENT: return "null argument";
    case ALTGDA_E_INTERNAL: return "internal error";
    default:
      if (status >= ALTGDA_E_CONTRACT && status <= ALTGDA_E_RECONSTRUCTION) {
        return altgda::to_string(static_cast<altgda::ErrorKind>(status));
      }
      return "unknown status";
  }
}

const char* altgda_last_error(void) { return g_last_error.c_str(); }

altgda_status altgda_game_create(int m, int n, const double* entries, altgda_game** out) {
  ALTGDA_REQUIRE(entries);
  ALTGDA_REQUIRE(out);
  return guard([&] {
    if (m < 1 || n < 1) return fail(ALTGDA_E_CONTRACT, "game dimensions must be >= 1");
    altgda::RowMatrix a = Eigen::Map<const altgda::RowMatrix>(entries, m, n);
    *out = new altgda_game{altgda::PayoffMatrix(std::move(a))};
    return ALTGDA_OK;
  });
}

altgda_status altgda_game_generate(int m, int n, const char* distribution, uint64_t seed,
                                   altgda_game** out) {
  ALTGDA_REQUIRE(distribution);
  ALTGDA_REQUIRE(out);
  return guard([&] {
    if (m < 1 || n < 1) return fail(ALTGDA_E_CONTRACT, "game dimensions must be >= 1");
    altgda::GameSpec spec;
    spec.m = m;
    spec.n = n;
    spec.distribution = altgda::distribution_from_string(distribution);
    spec.seed = seed;
    *out = new altgda_game{altgda::generate_game(spec)};
    return ALTGDA_OK;
  });
}

altgda_status altgda_game_preset(const char* name, altgda_game** out) {
  ALTGDA_REQUIRE(name);
  ALTGDA_REQUIRE(out);
  return guard([&] {
    const std::string s = name;
    if (s == "rps") {
      *out = new altgda_game{altgda::rock_paper_scissors()};
    } else if (s == "matching_pennies") {
      *out = new altgda_game{altgda::matching_pennies()};
    } else if (s == "nonint3x3") {
      *out = new altgda_game{altgda::noninterior_3x3()};
    } else {
      return fail(ALTGDA_E_CONFIG, "unknown game preset '" + s + "'");
    }
    return ALTGDA_OK;
  });
}

altgda_status altgda_game_load(const char* path, altgda_game** out) {
  ALTGDA_REQUIRE(path);
  ALTGDA_REQUIRE(out);
  return guard([&] {
    *out = new altgda_game{altgda::read_matrix_file(path)};
    return ALTGDA_OK;
  });
}

altgda_status altgda_game_save(const altgda_game* game, const char* path) {
  ALTGDA_REQUIRE(game);
  ALTGDA_REQUIRE(path);
  return guard([&] {
    altgda::write_matrix_file(path, game->matrix);
    return ALTGDA_OK;
  });
}

void altgda_game_destroy(altgda_game* game) { delete game; }

altgda_status altgda_game_shape(const altgda_game* game, int* m, int* n) {
  ALTGDA_REQUIRE(game);
  if (m) *m = static_cast<int>(game->matrix.rows());
  if (n) *n = static_cast<int>(game->matrix.cols());
  return ALTGDA_OK;
}

altgda_status altgda_game_entries(const altgda_game* game, double* out) {
  ALTGDA_REQUIRE(game);
  ALTGDA_REQUIRE(out);
  const auto& e = game->matrix.entries();
  std::memcpy(out, e.data(), sizeof(double) * static_cast<std::size_t>(e.size()));
  return ALTGDA_OK;
}

altgda_status altgda_game_spectral_norm(const altgda_game* game, double* out) {
  ALTGDA_REQUIRE(game);
  ALTGDA_REQUIRE(out);
  *out = game->matrix.spectral_norm();
  return ALTGDA_OK;
}

altgda_status altgda_game_duality_gap(const altgda_game* game, const double* x, const double* y,
                                      double* out) {
  ALTGDA_REQUIRE(game);
  ALTGDA_REQUIRE(x);
  ALTGDA_REQUIRE(y);
  ALTGDA_REQUIRE(out);
  return guard([&] {
    *out = altgda::duality_gap(game->matrix,
                               altgda::MixedStrategy(copy_vec(x, game->matrix.cols())),
                               altgda::MixedStrategy(copy_vec(y, game->matrix.rows())));
    return ALTGDA_OK;
  });
}

altgda_status altgda_game_equilibrium(const altgda_game* game, double* x_out, double* y_out,
                                      double* value, double* delta, int* interior) {
  ALTGDA_REQUIRE(game);
  return guard([&] {
    const auto p = altgda::solve_equilibrium_max_support(game->matrix);
    if (x_out) std::memcpy(x_out, p.x_star.probs().data(), sizeof(double) * p.x_star.dim());
    if (y_out) std::memcpy(y_out, p.y_star.probs().data(), sizeof(double) * p.y_star.dim());
    if (value) *value = p.nu_star;
    if (delta) *delta = p.delta;
    if (interior) *interior = p.is_interior ? 1 : 0;
    return ALTGDA_OK;
  });
}

altgda_status altgda_run(const altgda_game* game, const altgda_run_options* options,
                         const double* x0, const double* y0, altgda_trace** out) {
  ALTGDA_REQUIRE(game);
  ALTGDA_REQUIRE(options);
  ALTGDA_REQUIRE(out);
  return guard([&] {
    const auto& a = game->matrix;
    altgda::RunConfig rc;
    rc.algorithm = to_alg(options->algorithm);
    rc.eta = options->eta;
    rc.horizon = options->horizon;
    if (options->horizon < 1) return fail(ALTGDA_E_CONTRACT, "horizon must be >= 1");
    if (options->record_stride < 0) return fail(ALTGDA_E_CONTRACT, "record_stride must be >= 0");
    if (options->record_stride > 0) {
      rc.record_stride = options->record_stride;
    } else {
      rc.record_stride = options->horizon;
      rc.checkpoints = altgda::log_checkpoints(options->horizon);
    }
    rc.x0 = x0 ? altgda::MixedStrategy(copy_vec(x0, a.cols()))
               : altgda::MixedStrategy::uniform(a.cols());
    rc.y0 = y0 ? altgda::MixedStrategy(copy_vec(y0, a.rows()))
               : altgda::MixedStrategy::uniform(a.rows());
    *out = new altgda_trace{altgda::run(a, rc)};
    return ALTGDA_OK;
  });
}

void altgda_trace_destroy(altgda_trace* trace) { delete trace; }

altgda_status altgda_trace_rows(const altgda_trace* trace, long long* rows) {
  ALTGDA_REQUIRE(trace);
  ALTGDA_REQUIRE(rows);
  *rows = static_cast<long long>(trace->trace.diagnostics.size());
  return ALTGDA_OK;
}

altgda_status altgda_trace_row(const altgda_trace* trace, long long index, long long* t,
                               double* gap_avg) {
  ALTGDA_REQUIRE(trace);
  const auto& d = trace->trace.diagnostics;
  if (index < 0 || index >= static_cast<long long>(d.size())) {
    return fail(ALTGDA_E_INDEX, "trace row out of range");
  }
  if (t) *t = d[index].t;
  if (gap_avg) *gap_avg = d[index].gap_avg;
  return ALTGDA_OK;
}

altgda_status altgda_trace_final(const altgda_trace* trace, double* x, double* y, double* avg_x,
                                 double* avg_y) {
  ALTGDA_REQUIRE(trace);
  const auto& tr = trace->trace;
  auto put = [](double* dst, const altgda::Vector& v) {
    if (dst) std::memcpy(dst, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  };
  put(x, tr.final_x);
  put(y, tr.final_y);
  put(avg_x, tr.final_avg_x);
  put(avg_y, tr.final_avg_y);
  return ALTGDA_OK;
}

altgda_status altgda_trace_write_csv(const altgda_trace* trace, const char* path) {
  ALTGDA_REQUIRE(trace);
  ALTGDA_REQUIRE(path);
  return guard([&] {
    altgda::write_trace_csv(path, trace->trace);
    return ALTGDA_OK;
  });
}

altgda_status altgda_pep_export_sdpa(altgda_algorithm algorithm, int T, double eta,
                                     const char* path) {
  ALTGDA_REQUIRE(path);
  return guard([&] {
    altgda::export_sdpa(altgda::assemble_pep_sdp({to_alg(algorithm), T, eta}), path);
    return ALTGDA_OK;
  });
}

altgda_status altgda_pep_value(altgda_algorithm algorithm, int T, double eta, const char* solver,
                               int timeout_seconds, double* value) {
  ALTGDA_REQUIRE(value);
  return guard([&] {
    altgda::SolverOptions o;
    o.command = solver ? solver : "";
    if (timeout_seconds > 0) o.timeout_seconds = timeout_seconds;
    *value = altgda::pep_value({to_alg(algorithm), T, eta}, o);
    return ALTGDA_OK;
  });
}

altgda_status altgda_experiment_create(const char* command, const char* config_path,
                                       const char* overrides_json, altgda_experiment** out) {
  ALTGDA_REQUIRE(command);
  ALTGDA_REQUIRE(out);
  return guard([&] {
    nlohmann::ordered_json file;
    if (config_path && *config_path) file = altgda::load_config_file(config_path);
    nlohmann::ordered_json overrides;
    if (overrides_json && *overrides_json) {
      try {
        overrides = nlohmann::ordered_json::parse(overrides_json);
      } catch (const nlohmann::json::exception& e) {
        return fail(ALTGDA_E_CONFIG, std::string("bad overrides: ") + e.what());
      }
    }
    auto* ex = new altgda_experiment{altgda::resolve_config(command, file, overrides), {}, {}};
    ex->config_text = ex->config.doc.dump(2);
    *out = ex;
    return ALTGDA_OK;
  });
}

void altgda_experiment_destroy(altgda_experiment* experiment) { delete experiment; }

const char* altgda_experiment_config(const altgda_experiment* experiment) {
  return experiment ? experiment->config_text.c_str() : "";
}

altgda_status altgda_experiment_execute(altgda_experiment* experiment, int* exit_code) {
  ALTGDA_REQUIRE(experiment);
  ALTGDA_REQUIRE(exit_code);
  return guard([&] {
    const auto outcome = altgda::execute_experiment(experiment->config);
    experiment->summary = outcome.summary;
    *exit_code = outcome.exit_code;
    return ALTGDA_OK;
  });
}

const char* altgda_experiment_summary(const altgda_experiment* experiment) {
  return experiment ? experiment->summary.c_str() : "";
}

}  // extern "C"
