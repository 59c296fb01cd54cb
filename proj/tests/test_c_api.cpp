#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "altgda/altgda.h"

TEST_CASE("game lifecycle through the C API") {
  const double rps[9] = {0, -1, 1, 1, 0, -1, -1, 1, 0};
  altgda_game* g = nullptr;
  REQUIRE(altgda_game_create(3, 3, rps, &g) == ALTGDA_OK);
  int m = 0, n = 0;
  CHECK(altgda_game_shape(g, &m, &n) == ALTGDA_OK);
  CHECK(m == 3);
  CHECK(n == 3);
  double norm = 0.0;
  CHECK(altgda_game_spectral_norm(g, &norm) == ALTGDA_OK);
  CHECK(norm == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  const double e1[3] = {1, 0, 0}, e2[3] = {0, 1, 0};
  double gap = 0.0;
  CHECK(altgda_game_duality_gap(g, e1, e2, &gap) == ALTGDA_OK);
  CHECK(gap == 2.0);
  double x[3], y[3], value = -1, delta = 0;
  int interior = 0;
  CHECK(altgda_game_equilibrium(g, x, y, &value, &delta, &interior) == ALTGDA_OK);
  CHECK(interior == 1);
  CHECK(std::abs(value) <= 1e-12);
  CHECK(x[0] == doctest::Approx(1.0 / 3.0));
  double back[9];
  CHECK(altgda_game_entries(g, back) == ALTGDA_OK);
  CHECK(std::memcmp(back, rps, sizeof rps) == 0);
  altgda_game_destroy(g);
  altgda_game_destroy(nullptr);
}

TEST_CASE("status codes and last error") {
  altgda_game* g = nullptr;
  CHECK(altgda_game_create(0, 3, nullptr, &g) == ALTGDA_E_NULL_ARGUMENT);
  const double one = 1.0;
  CHECK(altgda_game_create(0, 3, &one, &g) == ALTGDA_E_CONTRACT);
  CHECK(std::string(altgda_last_error()).find("dimensions") != std::string::npos);
  CHECK(altgda_game_generate(2, 2, "cauchy", 0, &g) == ALTGDA_E_CONFIG);
  CHECK(altgda_game_preset("chess", &g) == ALTGDA_E_CONFIG);
  CHECK(altgda_game_load("/nonexistent/game.txt", &g) == ALTGDA_E_IO);
  CHECK(std::string(altgda_status_string(ALTGDA_E_SOLVER)).size() > 0);
  CHECK(std::string(altgda_status_string(ALTGDA_OK)) == "ok");
  const double dup[4] = {1, 1, 1, 1};
  REQUIRE(altgda_game_create(2, 2, dup, &g) == ALTGDA_OK);
  const double bad[2] = {0.7, 0.7};
  double gap = 0;
  CHECK(altgda_game_duality_gap(g, bad, bad, &gap) == ALTGDA_E_CONTRACT);
  altgda_game_destroy(g);
  CHECK(altgda_version() != nullptr);
}

TEST_CASE("run and trace through the C API") {
  altgda_game* g = nullptr;
  REQUIRE(altgda_game_preset("rps", &g) == ALTGDA_OK);
  altgda_run_options opt{ALTGDA_ALTERNATING, 0.01, 1, 1};
  const double e1[3] = {1, 0, 0}, e2[3] = {0, 1, 0};
  altgda_trace* tr = nullptr;
  REQUIRE(altgda_run(g, &opt, e1, e2, &tr) == ALTGDA_OK);
  long long rows = 0;
  CHECK(altgda_trace_rows(tr, &rows) == ALTGDA_OK);
  CHECK(rows == 1);
  double x[3], y[3];
  CHECK(altgda_trace_final(tr, x, y, nullptr, nullptr) == ALTGDA_OK);
  CHECK(std::abs(x[0] - 0.99) <= 1e-15);
  CHECK(std::abs(x[2] - 0.01) <= 1e-15);
  CHECK(y[1] == 1.0);
  long long t = 0;
  CHECK(altgda_trace_row(tr, 5, &t, nullptr) == ALTGDA_E_INDEX);
  altgda_trace_destroy(tr);

  opt.horizon = 1000;
  opt.record_stride = 0;
  REQUIRE(altgda_run(g, &opt, nullptr, nullptr, &tr) == ALTGDA_OK);
  CHECK(altgda_trace_rows(tr, &rows) == ALTGDA_OK);
  CHECK(altgda_trace_row(tr, rows - 1, &t, nullptr) == ALTGDA_OK);
  CHECK(t == 1000);
  altgda_trace_destroy(tr);

  opt.algorithm = static_cast<altgda_algorithm>(7);
  CHECK(altgda_run(g, &opt, nullptr, nullptr, &tr) == ALTGDA_E_CONTRACT);
  altgda_game_destroy(g);
}

TEST_CASE("PEP export and missing solver through the C API") {
  const std::string path = "/tmp/altgda_test_c_api.dat-s";
  CHECK(altgda_pep_export_sdpa(ALTGDA_ALTERNATING, 2, 1.0, path.c_str()) == ALTGDA_OK);
  FILE* f = std::fopen(path.c_str(), "r");
  REQUIRE(f != nullptr);
  int mdim = 0;
  CHECK(std::fscanf(f, "%d", &mdim) == 1);
  CHECK(mdim == 76);
  std::fclose(f);
  std::remove(path.c_str());
  std::remove((path + ".manifest.json").c_str());
  unsetenv("PEP_SDP_SOLVER");
  double v = 0;
  CHECK(altgda_pep_value(ALTGDA_ALTERNATING, 2, 1.0, nullptr, 0, &v) == ALTGDA_E_CONFIG);
  CHECK(altgda_pep_value(ALTGDA_ALTERNATING, 2, 1.0, "false", 0, &v) == ALTGDA_E_SOLVER);
}

TEST_CASE("experiments through the C API") {
  altgda_experiment* ex = nullptr;
  CHECK(altgda_experiment_create("run", nullptr, "{not json", &ex) == ALTGDA_E_CONFIG);
  CHECK(altgda_experiment_create("nope", nullptr, nullptr, &ex) == ALTGDA_E_CONFIG);
  REQUIRE(altgda_experiment_create(
              "audit", nullptr,
              R"({"out": "/tmp/altgda_test_c_api_exp", "run": {"horizon": 200, "eta": 0.1},
                  "audit": {"probes_per_step": 3, "elementary_probes": 50}})",
              &ex) == ALTGDA_OK);
  CHECK(std::string(altgda_experiment_config(ex)).find("\"horizon\": 200") != std::string::npos);
  int code = -1;
  CHECK(altgda_experiment_execute(ex, &code) == ALTGDA_OK);
  CHECK(code == 0);
  CHECK(std::string(altgda_experiment_summary(ex)).find("PASS") != std::string::npos);
  altgda_experiment_destroy(ex);
}
