#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "altgda/audit.hpp"

using namespace altgda;

namespace {

IterateTrace rps_trace(double eta, long long T) {
  const PayoffMatrix rps = rock_paper_scissors();
  RunConfig cfg;
  cfg.eta = eta;
  cfg.horizon = T;
  cfg.x0 = MixedStrategy::vertex(3, 0);
  cfg.y0 = MixedStrategy::vertex(3, 1);
  cfg.reference = solve_equilibrium_max_support(rps);
  cfg.store_iterates = true;
  return run(rps, cfg);
}

}  // namespace

TEST_CASE("interior regime on rock paper scissors") {
  AuditConfig ac;
  ac.probes_per_step = 10;
  const auto rep = audit_trace(rock_paper_scissors(), rps_trace(0.1, 10000), ac);
  INFO(rep.to_text());
  CHECK(rep.passed());
  for (const char* name : {"energy_monotone", "energy_decay_identity",
                           "residual_energy_sandwich", "theorem1_bound",
                           "descent_inequality_1", "descent_inequality_2",
                           "nonsmooth_terms", "tau_identity", "pos_qtt",
                           "inp_identity", "refined_energy_change"}) {
    const auto* r = rep.find(name);
    REQUIRE(r != nullptr);
    CHECK(r->active);
    CHECK(r->checks > 0);
  }
}

TEST_CASE("large stepsize switches the interior invariants off") {
  AuditConfig ac;
  ac.probes_per_step = 20;
  const auto rep = audit_trace(rock_paper_scissors(), rps_trace(1.0, 2000), ac);
  INFO(rep.to_text());
  CHECK(rep.passed());
  CHECK(!rep.find("energy_monotone")->active);
  CHECK(rep.find("descent_inequality_1")->active);
  CHECK(rep.find("descent_inequality_2")->active);
}

TEST_CASE("local regime on the non-interior instance") {
  const PayoffMatrix a = noninterior_3x3();
  const auto p = solve_equilibrium_max_support(a);
  const double eta = 0.5 / a.spectral_norm();
  const auto regions = local_regions(a, eta, p);
  const auto init = sample_init_in_S0(regions, p, 4);
  RunConfig cfg;
  cfg.eta = eta;
  cfg.horizon = 20000;
  cfg.x0 = init.first;
  cfg.y0 = init.second;
  cfg.reference = p;
  cfg.regions = regions;
  cfg.record_stride = 100;
  cfg.store_iterates = true;
  AuditConfig ac;
  ac.probes_per_step = 2;
  const auto rep = audit_trace(a, run(a, cfg), ac);
  INFO(rep.to_text());
  CHECK(rep.passed());
  CHECK(rep.find("local_stays_in_S")->active);
  CHECK(rep.find("lemma3_separation")->checks > 0);
  CHECK(!rep.find("energy_monotone")->active);
}

TEST_CASE("SimGDA audit only evaluates the generic invariants") {
  const PayoffMatrix rps = rock_paper_scissors();
  RunConfig cfg;
  cfg.eta = 0.1;
  cfg.horizon = 500;
  cfg.x0 = MixedStrategy::vertex(3, 0);
  cfg.y0 = MixedStrategy::vertex(3, 1);
  cfg.algorithm = Algorithm::kSimGda;
  cfg.store_iterates = true;
  const auto rep = audit_trace(rps, run(rps, cfg));
  CHECK(rep.passed());
  CHECK(!rep.find("residual_nonnegative")->active);
  CHECK(rep.find("simplex_elementary")->checks == 40000);
}

TEST_CASE("a broken trace is reported") {
  auto tr = rps_trace(0.1, 50);
  tr.avg_x[10][0] += 1e-6;
  const auto rep = audit_trace(rock_paper_scissors(), tr);
  CHECK(!rep.passed());
  CHECK(!rep.find("average_consistency")->passed);
  CHECK(rep.to_json().find("\"passed\": false") != std::string::npos);
}

TEST_CASE("audit requires stored iterates") {
  auto tr = rps_trace(0.1, 5);
  tr.xs.clear();
  CHECK_THROWS_AS(audit_trace(rock_paper_scissors(), tr), Error);
}
