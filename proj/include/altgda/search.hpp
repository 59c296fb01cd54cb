#pragma once

#include <functional>
#include <string>
#include <vector>

#include "altgda/dynamics.hpp"

namespace altgda {

struct SearchConfig {
  double eta_min = 0.5;
  double eta_max = 2.5;
  int points_n = 20;
  double shrink_alpha = 1.0;
  double tol_eps = 1e-3;
  int max_rounds = 50;

  void validate() const;
};

struct SearchRound {
  double range_lo = 0.0;
  double range_hi = 0.0;
  std::vector<double> etas;
  std::vector<double> values;
  double best_eta = 0.0;
  double best_value = 0.0;
};

struct SearchTrace {
  int T = 0;
  Algorithm algorithm = Algorithm::kAltGda;
  std::vector<SearchRound> rounds;
  double final_eta = 0.0;
  double final_value = 0.0;
  long long solver_calls = 0;
  bool hit_round_cap = false;
};

// Stepsizes from eta_min to eta_max whose reciprocals are equally spaced.
std::vector<double> reciprocal_grid(double eta_min, double eta_max, int n);

using StepsizeEvaluator = std::function<double(double eta)>;

// jobs <= 0 uses the available hardware parallelism.
SearchTrace optimize_stepsize(int T, Algorithm algorithm, const SearchConfig& cfg,
                              const StepsizeEvaluator& evaluator, int jobs = 1);

std::string search_csv_header();
std::string search_csv_row(const SearchTrace& trace);

}  // namespace altgda
