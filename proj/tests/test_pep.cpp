#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "altgda/pep.hpp"
#include "altgda/projection.hpp"
#include "json.hpp"

using namespace altgda;

namespace {

Vector unit(int n, int k) {
  Vector v = Vector::Zero(n);
  v[k - 1] = 1.0;
  return v;
}

double dense_trace(const SparseSym& s, const Eigen::MatrixXd& g) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(g.rows(), g.cols());
  for (const auto& e : s.entries) {
    m(e.i, e.j) = e.value;
    m(e.j, e.i) = e.value;
  }
  return (m.cwiseProduct(g)).sum();
}

Eigen::MatrixXd random_psd(int n, unsigned seed) {
  std::srand(seed);
  Eigen::MatrixXd h = Eigen::MatrixXd::Random(n, n);
  return h.transpose() * h;
}

}  // namespace

TEST_CASE("selection basis dimensions and vectors") {
  const auto b5 = build_selection_basis({Algorithm::kAltGda, 5, 1.0});
  CHECK(b5.ambient_dim == 16);
  const double eta = 0.7;
  const auto b1 = build_selection_basis({Algorithm::kAltGda, 1, eta});
  CHECK(b1.ambient_dim == 8);
  CHECK(b1.x_tilde.at(-1) == unit(8, 1));
  CHECK(b1.x_tilde.at(0) == unit(8, 2));
  CHECK(b1.x_tilde.at(1) == Vector(unit(8, 2) - unit(8, 5) - eta * unit(8, 7)));
  CHECK(b1.y_tilde.at(1) == Vector(unit(8, 2) - unit(8, 5) + eta * unit(8, 8)));
  const auto s1 = build_selection_basis({Algorithm::kSimGda, 1, eta});
  CHECK(s1.y_tilde.at(1) == Vector(unit(8, 2) - unit(8, 5) + eta * unit(8, 7)));
  CHECK(b1.g_x.at(-1) == unit(8, 3));
  CHECK(b1.q_bar.at(-1) == unit(8, 6));
  CHECK(b1.q_bar.at(1) == unit(8, 8));
}

TEST_CASE("basis rejects bad specs") {
  CHECK_THROWS_AS(build_selection_basis({Algorithm::kAltGda, 0, 1.0}), Error);
  CHECK_THROWS_AS(build_selection_basis({Algorithm::kAltGda, 3, 0.0}), Error);
}

TEST_CASE("constraint counts for T = 2") {
  const auto inst = assemble_pep_sdp({Algorithm::kAltGda, 2, 1.0});
  CHECK(inst.gram_order == 10);
  CHECK(inst.count("interpolation_x") + inst.count("interpolation_y") == 32);
  CHECK(inst.count("radius_x") + inst.count("radius_y") == 8);
  CHECK(inst.count("coupling") == 16);
  REQUIRE(inst.psd_maps.size() == 2);
  CHECK(inst.psd_maps[0].order == 4);
  CHECK(inst.psd_maps[1].order == 4);
  CHECK(inst.psd_maps[0].entries.size() == 10);
  const auto enc = encode_sdpa(inst);
  CHECK(enc.problem.block_sizes == std::vector<int>{10, 10, 4, 4, -40});
  CHECK(enc.problem.b.size() == 40 + 16 + 20);
}

TEST_CASE("sparse coefficients match dense symmetric traces") {
  const auto inst = assemble_pep_sdp({Algorithm::kSimGda, 3, 1.3});
  const Eigen::MatrixXd g = random_psd(inst.gram_order, 3);
  for (const auto& c : inst.ineq) {
    for (const auto& e : c.coeff.x.entries) CHECK(e.i <= e.j);
    CHECK(c.coeff.x.trace_with(g) == doctest::Approx(dense_trace(c.coeff.x, g)));
    CHECK(c.coeff.y.trace_with(g) == doctest::Approx(dense_trace(c.coeff.y, g)));
  }
  CHECK(inst.objective.x.trace_with(g) ==
        doctest::Approx(dense_trace(inst.objective.x, g)));
}

TEST_CASE("zero Grams are feasible with objective zero") {
  const auto inst = assemble_pep_sdp({Algorithm::kAltGda, 4, 1.2});
  SdpSolution s;
  s.gram_x = Eigen::MatrixXd::Zero(inst.gram_order, inst.gram_order);
  s.gram_y = s.gram_x;
  s = verify_certificate(inst, s);
  CHECK(s.accepted);
  CHECK(s.objective_value == 0.0);
}

TEST_CASE("verification flags perturbed certificates") {
  const PepSpec spec{Algorithm::kAltGda, 3, 0.9};
  const auto inst = assemble_pep_sdp(spec);
  const PayoffMatrix a = rock_paper_scissors().scaled(1.0 / std::sqrt(3.0));
  const auto good = planted_solution(spec, a, MixedStrategy::vertex(3, 0),
                                     MixedStrategy::vertex(3, 1));
  REQUIRE(good.accepted);

  SdpSolution neg = good;
  neg.gram_x(4, 4) -= 1e-3;
  neg.gram_x -= 0.5 * Eigen::MatrixXd::Identity(inst.gram_order, inst.gram_order);
  CHECK(!verify_certificate(inst, neg).accepted);

  SdpSolution big = good;
  big.gram_x *= 5.0;
  big = verify_certificate(inst, big);
  CHECK(!big.accepted);
  CHECK(big.max_ineq_violation > 1e-6);

  SdpSolution cpl = good;
  cpl.gram_y(2 * 3 + 5, 2 * 3 + 5) += 0.1;
  cpl = verify_certificate(inst, cpl);
  CHECK(!cpl.accepted);
}

TEST_CASE("SDPA text round trip is exact") {
  SdpaProblem p;
  p.block_sizes = {2, -1};
  p.b = {1.0, 0.1};
  p.entries = {{0, 1, 1, 1, 1.0}, {1, 1, 1, 2, 0.5},
               {1, 2, 1, 1, 1.0}, {2, 1, 2, 2, 1.0 / 3.0}};
  const std::string text = format_sdpa(p);
  const SdpaProblem q = parse_sdpa(text);
  CHECK(q.block_sizes == p.block_sizes);
  CHECK(q.b == p.b);
  REQUIRE(q.entries.size() == p.entries.size());
  for (std::size_t k = 0; k < p.entries.size(); ++k) {
    CHECK(q.entries[k].matno == p.entries[k].matno);
    CHECK(q.entries[k].value == p.entries[k].value);
  }
  CHECK(format_sdpa(q) == text);
  CHECK(parse_sdpa("* comment\n\"title\n1 =mdim\n1\n{2}\n{1.0}\n0 1 1 1 1\n")
            .block_sizes == std::vector<int>{2});
  CHECK_THROWS_AS(parse_sdpa("1\n1\n2\n1\n0 7 1 1 1\n"), Error);
  CHECK_THROWS_AS(parse_sdpa("x"), Error);
}

TEST_CASE("export writes problem and manifest") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "altgda_test_pep_export";
  fs::create_directories(dir);
  const auto inst = assemble_pep_sdp({Algorithm::kAltGda, 2, 1.0});
  const std::string path = (dir / "p.dat-s").string();
  export_sdpa(inst, path);
  const SdpaProblem back = read_sdpa(path);
  CHECK(back.b.size() == 76);
  std::ifstream mf(path + ".manifest.json");
  const auto man = nlohmann::json::parse(mf);
  CHECK(man["T"] == 2);
  CHECK(man["block_map"].size() == 5);
  CHECK(man["block_map"][0]["name"] == "G_x");
  int total = 0;
  for (const auto& c : man["constraint_map"]) total += c["count"].get<int>();
  CHECK(total == 76);
  fs::remove_all(dir);
}

TEST_CASE("encoded SDPA reproduces constraint values") {
  const PepSpec spec{Algorithm::kAltGda, 2, 1.1};
  const auto inst = assemble_pep_sdp(spec);
  const auto enc = encode_sdpa(inst);
  const PayoffMatrix a = matching_pennies().scaled(0.5);
  const auto sol = planted_solution(spec, a, MixedStrategy::vertex(2, 0),
                                    MixedStrategy::vertex(2, 1));
  // tr(C X) over the two Gram blocks equals the objective.
  double obj = 0.0;
  for (const auto& e : enc.problem.entries) {
    if (e.matno != 0) continue;
    const auto& g = e.block == 1 ? sol.gram_x : sol.gram_y;
    obj += (e.i == e.j ? 1.0 : 2.0) * e.value * g(e.i - 1, e.j - 1);
  }
  CHECK(obj == doctest::Approx(sol.objective_value).epsilon(1e-12));
}

TEST_CASE("solution parser reads CSDP primal blocks") {
  const std::string text =
      "0.5 0.25\n"
      "1 1 1 1 9.0\n"
      "2 1 1 1 2.0\n"
      "2 1 1 2 0.5\n"
      "2 2 2 2 3.0\n"
      "2 3 1 1 7.0\n";
  const auto s = parse_solution_file(text, 2);
  CHECK(s.gram_x(0, 0) == 2.0);
  CHECK(s.gram_x(1, 0) == 0.5);
  CHECK(s.gram_y(1, 1) == 3.0);
  CHECK_THROWS_AS(parse_solution_file("1\n1 1 1 1 1\n", 2), Error);
  CHECK_THROWS_AS(parse_solution_file("", 2), Error);
}

TEST_CASE("planted trajectory is feasible and its value is the average gap") {
  const PayoffMatrix a = rock_paper_scissors().scaled(1.0 / std::sqrt(3.0));
  for (Algorithm alg : {Algorithm::kAltGda, Algorithm::kSimGda}) {
    const PepSpec spec{alg, 5, 1.2};
    const auto x0 = MixedStrategy::vertex(3, 0);
    const auto y0 = MixedStrategy::vertex(3, 1);
    const auto sol = planted_solution(spec, a, x0, y0);
    CHECK(sol.accepted);
    CHECK(sol.max_eq_residual <= 1e-12);
    CHECK(sol.max_ineq_violation <= 1e-12);
    RunConfig rc;
    rc.eta = 1.2;
    rc.horizon = 5;
    rc.x0 = x0;
    rc.y0 = y0;
    rc.algorithm = alg;
    const auto tr = run(a, rc);
    CHECK(sol.objective_value ==
          doctest::Approx(duality_gap(a, tr.final_avg_x, tr.final_avg_y)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(planted_solution({Algorithm::kAltGda, 2, 1.0}, rock_paper_scissors(),
                                   MixedStrategy::vertex(3, 0),
                                   MixedStrategy::vertex(3, 1)),
                  Error);
}

TEST_CASE("reconstruction replays a planted trajectory") {
  const PayoffMatrix a = noninterior_3x3().scaled(1.0 / noninterior_3x3().spectral_norm());
  const PepSpec spec{Algorithm::kAltGda, 4, 1.1};
  const auto sol = planted_solution(spec, a, MixedStrategy::vertex(3, 2),
                                    MixedStrategy::vertex(3, 2));
  const auto rec = reconstruct_worst_case(spec, sol);
  CHECK(rec.max_iterate_error <= 1e-6);
  CHECK(rec.objective_error <= 1e-6);
  CHECK(rec.replay_x.size() == 5);
  SdpSolution bad = sol;
  bad.gram_x(0, 0) = -1.0;
  CHECK_THROWS_AS(reconstruct_worst_case(spec, bad), Error);
}

TEST_CASE("hull projection") {
  std::vector<Vector> pts{unit(3, 1), unit(3, 2), unit(3, 3)};
  Vector z(3);
  z << 1.0, 1.0, -2.0;
  const Vector p = project_onto_hull(pts, z);
  CHECK((p - project_simplex(z).point).cwiseAbs().maxCoeff() <= 1e-12);
  std::vector<Vector> seg{Vector::Zero(2), Vector::Ones(2)};
  Vector w(2);
  w << 2.0, 0.0;
  CHECK((project_onto_hull(seg, w) - Vector::Constant(2, 1.0)).norm() <= 1e-12);
  CHECK_THROWS_AS(project_onto_hull({}, w), Error);
}

TEST_CASE("missing solver is a configuration error") {
  unsetenv("PEP_SDP_SOLVER");
  SolverOptions o;
  try {
    solve_pep({Algorithm::kAltGda, 2, 1.0}, o);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
  o.command = "false";
  try {
    solve_pep({Algorithm::kAltGda, 2, 1.0}, o);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSolver);
  }
  setenv("PEP_SDP_SOLVER", "true", 1);
  CHECK(resolve_solver_command("x") == "true");
  unsetenv("PEP_SDP_SOLVER");
}
