#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "altgda/dynamics.hpp"
#include "altgda/projection.hpp"

using namespace altgda;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

RunConfig rps_config(Algorithm alg, long long T, double eta) {
  RunConfig cfg;
  cfg.eta = eta;
  cfg.horizon = T;
  cfg.x0 = MixedStrategy::vertex(3, 0);
  cfg.y0 = MixedStrategy::vertex(3, 1);
  cfg.algorithm = alg;
  return cfg;
}

}  // namespace

TEST_CASE("one AltGDA step on rock paper scissors") {
  RunConfig cfg = rps_config(Algorithm::kAltGda, 1, 0.01);
  cfg.store_iterates = true;
  const auto tr = run(rock_paper_scissors(), cfg);
  CHECK((tr.final_x - vec({0.99, 0, 0.01})).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(tr.final_y == vec({0, 1, 0}));
  REQUIRE(tr.diagnostics.size() == 1);
  CHECK(tr.diagnostics[0].gap_avg ==
        doctest::Approx(duality_gap(rock_paper_scissors(), tr.final_x, tr.final_y)));
  CHECK(tr.xs.size() == 2);
}

TEST_CASE("SimGDA uses x^t in the y update") {
  const PayoffMatrix rps = rock_paper_scissors();
  RunConfig cfg = rps_config(Algorithm::kSimGda, 1, 0.01);
  cfg.y0 = MixedStrategy(vec({0.5, 0.3, 0.2}));
  const auto sim = run(rps, cfg);
  cfg.algorithm = Algorithm::kAltGda;
  const auto alt = run(rps, cfg);
  CHECK(sim.final_x == alt.final_x);
  const Vector expect =
      project_simplex(cfg.y0.probs() + 0.01 * rps.entries() * cfg.x0.probs()).point;
  CHECK((sim.final_y - expect).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((sim.final_y - alt.final_y).cwiseAbs().maxCoeff() > 1e-6);
  CHECK(!sim.diagnostics[0].residual_r.has_value());
}

TEST_CASE("zero game keeps iterates fixed") {
  RunConfig cfg;
  cfg.eta = 0.5;
  cfg.horizon = 50;
  cfg.x0 = MixedStrategy(vec({0.2, 0.8}));
  cfg.y0 = MixedStrategy(vec({0.1, 0.6, 0.3}));
  const auto tr = run(PayoffMatrix(RowMatrix::Zero(3, 2)), cfg);
  CHECK((tr.final_x - cfg.x0.probs()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((tr.final_y - cfg.y0.probs()).cwiseAbs().maxCoeff() <= 1e-15);
  for (const auto& d : tr.diagnostics) CHECK(d.gap_avg == 0.0);
  CHECK(tr.diagnostics.size() == 50);
}

TEST_CASE("record stride, checkpoints and streaming averages") {
  const PayoffMatrix a = noninterior_3x3();
  RunConfig cfg;
  cfg.eta = 0.1;
  cfg.horizon = 1000;
  cfg.x0 = MixedStrategy::uniform(3);
  cfg.y0 = MixedStrategy::vertex(3, 2);
  cfg.record_stride = 300;
  cfg.checkpoints = {1, 7, 300};
  cfg.store_iterates = true;
  const auto tr = run(a, cfg);
  std::vector<long long> ts;
  for (const auto& d : tr.diagnostics) ts.push_back(d.t);
  CHECK(ts == std::vector<long long>{1, 7, 300, 600, 900, 1000});
  Vector sx = Vector::Zero(3);
  Vector sy = Vector::Zero(3);
  std::size_t row = 0;
  for (long long t = 1; t <= 1000; ++t) {
    sx += tr.xs[t];
    sy += tr.ys[t];
    if (row < ts.size() && ts[row] == t) {
      CHECK((tr.avg_x[row] - sx / t).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((tr.avg_y[row] - sy / t).cwiseAbs().maxCoeff() <= 1e-10);
      ++row;
    }
  }
}

TEST_CASE("energies") {
  const PayoffMatrix rps = rock_paper_scissors();
  const auto p = solve_equilibrium_max_support(rps);
  const Vector e1 = vec({1, 0, 0});
  const Vector e2 = vec({0, 1, 0});
  CHECK(std::abs(energy(rps, 0.3, p.x_star.probs(), p.y_star.probs(), p)) <= 1e-15);
  CHECK(energy(rps, 0.01, e1, e2, p) == doctest::Approx(4.0 / 3 - 0.01).epsilon(1e-14));
  CHECK(energy(rps, 0.0, e1, e2, p) == doctest::Approx(4.0 / 3).epsilon(1e-14));
  CHECK(energy_variant(rps, 0.0, e1, e2, p) == doctest::Approx(4.0 / 3).epsilon(1e-14));
  CHECK(energy_variant(rps, 0.01, e1, e2, p) ==
        doctest::Approx(energy(rps, 0.01, e1, e2, p)).epsilon(1e-14));
  const PayoffMatrix a = noninterior_3x3();
  const auto q = solve_equilibrium_max_support(a);
  CHECK(std::abs(energy_variant(a, 0.2, q.x_star.probs(), q.y_star.probs(), q)) <= 1e-15);
}

TEST_CASE("residual") {
  const PayoffMatrix rps = rock_paper_scissors();
  const double eta = 0.01;
  const Vector x0 = vec({1, 0, 0}), y0 = vec({0, 1, 0});
  const Vector x1 = vec({0.99, 0, 0.01}), y1 = vec({0, 1, 0});
  const double r = residual(rps, eta, x0, y0, x1, y1);
  const auto d = decompose_update(rps, eta, x0, y0, x1, y1);
  CHECK(r == doctest::Approx(eta * d.gamma.dot(x1 - x0) + eta * d.lambda.dot(y1 - y0)));
  CHECK(r >= -1e-10);
  // Interior step: both projections inactive.
  const Vector xa = vec({0.3, 0.3, 0.4}), ya = vec({0.35, 0.35, 0.3});
  const Vector xb = project_simplex(xa - 0.05 * rps.entries().transpose() * ya).point;
  const Vector yb = project_simplex(ya + 0.05 * rps.entries() * xb).point;
  CHECK(std::abs(residual(rps, 0.05, xa, ya, xb, yb)) <= 1e-15);
  CHECK_THROWS_AS(residual(rps, eta, x0, y0, x0, y0), Error);
}

TEST_CASE("residual is bounded by energy decay on an interior trajectory") {
  const PayoffMatrix rps = rock_paper_scissors();
  const auto p = solve_equilibrium_max_support(rps);
  RunConfig cfg = rps_config(Algorithm::kAltGda, 2000, 0.15);
  cfg.store_iterates = true;
  const auto tr = run(rps, cfg);
  for (long long t = 0; t < 2000; ++t) {
    const double r = residual(rps, 0.15, tr.xs[t], tr.ys[t], tr.xs[t + 1], tr.ys[t + 1]);
    const double de = energy(rps, 0.15, tr.xs[t], tr.ys[t], p) -
                      energy(rps, 0.15, tr.xs[t + 1], tr.ys[t + 1], p);
    CHECK(r >= -1e-10);
    CHECK(r <= de + 1e-9);
  }
}

TEST_CASE("potentials") {
  const PayoffMatrix rps = rock_paper_scissors();
  const double eta = 0.2;
  RunConfig cfg = rps_config(Algorithm::kAltGda, 30, eta);
  cfg.store_iterates = true;
  const auto tr = run(rps, cfg);
  const auto pt = potentials(rps, eta, tr, 5, tr.xs[5], tr.ys[5]);
  CHECK(pt.phi == doctest::Approx(eta * tr.ys[5].dot(rps.entries() * tr.xs[5])));
  const PayoffMatrix zero(RowMatrix::Zero(3, 3));
  const Vector px = vec({0.2, 0.2, 0.6}), py = vec({0.5, 0.5, 0});
  CHECK(phi_potential(zero, eta, tr, 3, px, py) ==
        doctest::Approx(0.5 * (tr.xs[3] - px).squaredNorm() + 0.5 * (tr.ys[3] - py).squaredNorm()));
  try {
    potentials(rps, eta, tr, 0, px, py);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIndex);
  }
  CHECK_THROWS_AS(phi_potential(rps, eta, tr, 31, px, py), Error);
  // First descent inequality at this probe, t = 4.
  const long long t = 4;
  const auto& e = rps.entries();
  const double lhs = eta * (py.dot(e * tr.xs[t + 1]) - tr.ys[t + 1].dot(e * px));
  const double rhs = phi_potential(rps, eta, tr, t, px, py) -
                     phi_potential(rps, eta, tr, t + 1, px, py) +
                     eta * (e * tr.xs[t + 1]).dot(tr.ys[t + 1] - tr.ys[t]) -
                     0.5 * (tr.xs[t + 1] - tr.xs[t]).squaredNorm() -
                     0.5 * (tr.ys[t + 1] - tr.ys[t]).squaredNorm();
  CHECK(rhs - lhs >= -1e-9);
}

TEST_CASE("interior stepsize bound") {
  const PayoffMatrix rps = rock_paper_scissors();
  const auto p = solve_equilibrium_max_support(rps);
  CHECK(interior_stepsize_bound(rps, p) == doctest::Approx(0.19245008972987526).epsilon(1e-12));
  const PayoffMatrix mp = matching_pennies();
  CHECK(interior_stepsize_bound(mp, solve_equilibrium_max_support(mp)) ==
        doctest::Approx(0.25).epsilon(1e-12));
  const PayoffMatrix big = rps.scaled(3.0);
  CHECK(interior_stepsize_bound(big, solve_equilibrium_max_support(big)) ==
        doctest::Approx(0.19245008972987526 / 3).epsilon(1e-12));
  const PayoffMatrix a = noninterior_3x3();
  try {
    interior_stepsize_bound(a, solve_equilibrium_max_support(a));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kPrecondition);
  }
}

TEST_CASE("theorem bounds") {
  const double s3 = std::sqrt(3.0);
  CHECK(theorem_bound(BoundKind::kInterior, 1000, 0.1, s3) ==
        doctest::Approx(0.096928203230275512).epsilon(1e-12));
  CHECK(theorem_bound(BoundKind::kInterior, 2000, 0.1, s3) ==
        doctest::Approx(theorem_bound(BoundKind::kInterior, 1000, 0.1, s3) / 2));
  CHECK(theorem_bound(BoundKind::kLocal, 10, 0.1, 2.0, 0.0) ==
        doctest::Approx((9 + 7 * 0.2) / 1.0));
  CHECK(theorem_bound(BoundKind::kLocal, 10, 0.1, 2.0, 0.4) ==
        doctest::Approx((9 + 7 * 0.2 + 0.16 / 128) / 1.0));
  try {
    theorem_bound(BoundKind::kLocal, 10, 0.1, 2.0);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
}

TEST_CASE("local regions and membership") {
  SUBCASE("interior game") {
    const PayoffMatrix rps = rock_paper_scissors();
    const auto p = solve_equilibrium_max_support(rps);
    const double eta = 0.5 / rps.spectral_norm();
    const auto r = local_regions(rps, eta, p);
    CHECK(r.tail_x_redundant);
    CHECK(r.tail_y_redundant);
    CHECK(r.radius_S == doctest::Approx(1.0 / 12));
    CHECK(r.c <= eta * rps.spectral_norm());
    try {
      local_regions(rps, 0.3, p);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kPrecondition);
    }
  }
  SUBCASE("non-interior game") {
    const PayoffMatrix a = noninterior_3x3();
    const auto p = solve_equilibrium_max_support(a);
    const double norm = a.spectral_norm();
    const double eta = 0.5 / norm;
    const auto r = local_regions(a, eta, p);
    CHECK(!r.tail_x_redundant);
    CHECK(!r.tail_y_redundant);
    CHECK(r.delta == doctest::Approx(p.delta).epsilon(1e-12));
    CHECK(r.r_x == 2.0);
    CHECK(r.r_y == 2.0);
    CHECK(r.c == doctest::Approx(std::min(0.5, p.delta / 384)).epsilon(1e-12));
    CHECK(r.tail_cap_S_x == doctest::Approx(0.25 * 2 * p.delta).epsilon(1e-12));
    CHECK(r.tail_cap_S0_x == doctest::Approx(r.c * p.delta).epsilon(1e-12));
    CHECK(r.radius_S0 <= r.radius_S);
    CHECK(r.tail_cap_S0_y <= r.tail_cap_S_y);

    const Vector& xs = p.x_star.probs();
    const Vector& ys = p.y_star.probs();
    CHECK(membership(xs, ys, r, p, Region::kS0));
    CHECK(membership(xs, ys, r, p, Region::kS));
    // Move along a support direction slightly past delta/4.
    Vector x = xs;
    const double step = (r.radius_S + 1e-6) / std::sqrt(2.0);
    x[1] += step;
    x[2] -= step;
    CHECK(!membership(x, ys, r, p, Region::kS));
    // Off-support mass above the S cap.
    Vector y = ys;
    y[2] = r.tail_cap_S_y * 1.01;
    y[0] -= y[2];
    CHECK(!membership(xs, y, r, p, Region::kS));

    const auto z = sample_init_in_S0(r, p, 1, 0.0);
    CHECK(z.first.probs() == xs);
    CHECK(z.second.probs() == ys);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto s = sample_init_in_S0(r, p, seed);
      CHECK(membership(s.first.probs(), s.second.probs(), r, p, Region::kS0));
      const auto s2 = sample_init_in_S0(r, p, seed);
      CHECK(s.first.probs() == s2.first.probs());
      CHECK(s.second.probs() == s2.second.probs());
    }
  }
}

TEST_CASE("trace CSV layout") {
  const PayoffMatrix rps = rock_paper_scissors();
  RunConfig cfg = rps_config(Algorithm::kAltGda, 3, 0.1);
  cfg.reference = solve_equilibrium_max_support(rps);
  cfg.regions = local_regions(rps, 0.1, *cfg.reference);
  const std::string csv = trace_csv(run(rps, cfg));
  CHECK(csv.rfind("t,gap_avg,energy_E,energy_V,residual_r,gamma_bar,lambda_bar,in_S,in_S0\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  cfg.algorithm = Algorithm::kSimGda;
  cfg.reference.reset();
  cfg.regions.reset();
  const std::string sim = trace_csv(run(rps, cfg));
  CHECK(sim.find(",nan,nan,nan,nan,nan,nan,nan\n") != std::string::npos);
}

TEST_CASE("random simplex points") {
  const auto p = random_simplex_point(7, 3);
  CHECK(p.probs().minCoeff() > 0.0);
  CHECK(std::abs(p.probs().sum() - 1.0) <= 1e-15);
  CHECK(random_simplex_point(7, 3).probs() == p.probs());
}
