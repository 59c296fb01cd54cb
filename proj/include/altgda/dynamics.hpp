#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "altgda/game.hpp"

namespace altgda {

enum class Algorithm { kAltGda, kSimGda };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct LocalRegionParams {
  double eta = 0.0;
  double delta = 0.0;
  double r_x = 0.0;
  double r_y = 0.0;
  double c = 0.0;
  double radius_S = 0.0;
  double radius_S0 = 0.0;
  double tail_cap_S_x = 0.0;
  double tail_cap_S_y = 0.0;
  double tail_cap_S0_x = 0.0;
  double tail_cap_S0_y = 0.0;
  bool tail_x_redundant = false;  // |I*| = n
  bool tail_y_redundant = false;  // |J*| = m
};

struct RunConfig {
  double eta = 0.01;
  long long horizon = 1;
  MixedStrategy x0 = MixedStrategy::uniform(1);
  MixedStrategy y0 = MixedStrategy::uniform(1);
  Algorithm algorithm = Algorithm::kAltGda;
  long long record_stride = 1;
  std::optional<EquilibriumProfile> reference;
  // When set, in_S / in_S0 are evaluated at recorded steps.
  std::optional<LocalRegionParams> regions;
  // Extra recorded iterations (besides the stride grid and t = T).
  std::vector<long long> checkpoints;
  // Keep every iterate (x^0..x^T); needed by potentials() and the audit.
  bool store_iterates = false;
};

// Row t describes the state after t steps. residual_r, gamma_bar and
// lambda_bar belong to the transition t-1 -> t (AltGDA only).
struct StepDiagnostics {
  long long t = 0;
  double gap_avg = 0.0;
  std::optional<double> energy_E;
  std::optional<double> energy_V;
  std::optional<double> residual_r;
  std::optional<double> gamma_bar;
  std::optional<double> lambda_bar;
  std::optional<bool> in_S;
  std::optional<bool> in_S0;
};

struct IterateTrace {
  RunConfig config;
  std::vector<Vector> xs;  // x^0..x^T when stored
  std::vector<Vector> ys;
  std::vector<Vector> avg_x;  // running averages at recorded rows
  std::vector<Vector> avg_y;
  std::vector<StepDiagnostics> diagnostics;
  Vector final_x;
  Vector final_y;
  Vector final_avg_x;
  Vector final_avg_y;
};

IterateTrace run(const PayoffMatrix& a, const RunConfig& cfg);

double energy(const PayoffMatrix& a, double eta, VectorRef x, VectorRef y,
              const EquilibriumProfile& profile);
double energy_variant(const PayoffMatrix& a, double eta, VectorRef x,
                      VectorRef y, const EquilibriumProfile& profile);

// Replay-checked residual of one AltGDA step.
double residual(const PayoffMatrix& a, double eta, VectorRef x_t, VectorRef y_t,
                VectorRef x_next, VectorRef y_next);

struct Potentials {
  double phi = 0.0;
  double psi = 0.0;
};

// phi_t and psi_t at probe (x, y); requires stored iterates and 1 <= t <= T.
Potentials potentials(const PayoffMatrix& a, double eta,
                      const IterateTrace& trace, long long t, VectorRef x,
                      VectorRef y);
// phi_t alone, valid for t = 0 as well.
double phi_potential(const PayoffMatrix& a, double eta,
                     const IterateTrace& trace, long long t, VectorRef x,
                     VectorRef y);

double interior_stepsize_bound(const PayoffMatrix& a,
                               const EquilibriumProfile& profile);

enum class BoundKind { kInterior, kLocal };

double theorem_bound(BoundKind kind, long long T, double eta, double norm_a,
                     std::optional<double> delta = std::nullopt);

LocalRegionParams local_regions(const PayoffMatrix& a, double eta,
                                const EquilibriumProfile& profile);

enum class Region { kS, kS0 };

bool membership(VectorRef x, VectorRef y, const LocalRegionParams& params,
                const EquilibriumProfile& profile, Region which);

// Rejection-samples (x, y) in S0 around the profile. `radius` overrides the
// sampling ball (default: the S0 radius); radius 0 returns (x*, y*).
std::pair<MixedStrategy, MixedStrategy> sample_init_in_S0(
    const LocalRegionParams& params, const EquilibriumProfile& profile,
    std::uint64_t seed, std::optional<double> radius = std::nullopt);

// Uniform point of the simplex (normalized exponentials).
MixedStrategy random_simplex_point(Index dim, std::uint64_t seed);

std::string trace_csv(const IterateTrace& trace);
void write_trace_csv(const std::string& path, const IterateTrace& trace);

}  // namespace altgda
