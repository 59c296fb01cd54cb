#include "altgda/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "altgda/error.hpp"
#include "altgda/game.hpp"

namespace altgda {

namespace {

constexpr double kEtaFloor = 1e-6;

}  // namespace

void SearchConfig::validate() const {
  if (!(eta_min > 0.0) || !(eta_min < eta_max) || !std::isfinite(eta_max)) {
    throw Error(ErrorKind::kConfig, "search range needs 0 < eta_min < eta_max");
  }
  if (points_n < 3) throw Error(ErrorKind::kConfig, "search needs points_n >= 3");
  if (!(tol_eps > 0.0)) throw Error(ErrorKind::kConfig, "search needs tol_eps > 0");
  if (!(shrink_alpha > 0.0)) throw Error(ErrorKind::kConfig, "search needs shrink_alpha > 0");
  if (max_rounds < 1) throw Error(ErrorKind::kConfig, "search needs max_rounds >= 1");
}

std::vector<double> reciprocal_grid(double eta_min, double eta_max, int n) {
  if (!(eta_min > 0.0) || !(eta_min < eta_max) || n < 2) {
    throw Error(ErrorKind::kConfig, "reciprocal grid needs 0 < eta_min < eta_max and n >= 2");
  }
  const double r0 = 1.0 / eta_min;
  const double r1 = 1.0 / eta_max;
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = 1.0 / (r0 + (r1 - r0) * k / (n - 1));
  out.front() = eta_min;
  out.back() = eta_max;
  return out;
}

SearchTrace optimize_stepsize(int T, Algorithm algorithm, const SearchConfig& cfg,
                              const StepsizeEvaluator& evaluator, int jobs) {
  cfg.validate();
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  SearchTrace trace;
  trace.T = T;
  trace.algorithm = algorithm;
  std::map<double, double> memo;
  bool have_best = false;
  double lo = cfg.eta_min, hi = cfg.eta_max;

  for (int round = 0; round < cfg.max_rounds; ++round) {
    SearchRound r;
    r.range_lo = lo;
    r.range_hi = hi;
    r.etas = reciprocal_grid(lo, hi, cfg.points_n);
    r.values.assign(r.etas.size(), 0.0);

    std::vector<std::size_t> todo;
    for (std::size_t k = 0; k < r.etas.size(); ++k) {
      if (auto it = memo.find(r.etas[k]); it != memo.end()) {
        r.values[k] = it->second;
      } else if (std::find_if(todo.begin(), todo.end(), [&](std::size_t j) {
                   return r.etas[j] == r.etas[k];
                 }) == todo.end()) {
        todo.push_back(k);
      }
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    auto worker = [&] {
      for (std::size_t w = next++; w < todo.size(); w = next++) {
        const std::size_t k = todo[w];
        try {
          r.values[k] = evaluator(r.etas[k]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    };
    const int nthreads = std::min<int>(jobs, static_cast<int>(todo.size()));
    if (nthreads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (err) {
      try {
        std::rethrow_exception(err);
      } catch (const Error& e) {
        throw Error(e.kind(), "stepsize search round " + std::to_string(round + 1) +
                                  " [" + format_double(lo) + ", " + format_double(hi) +
                                  "]: " + e.what());
      }
    }
    trace.solver_calls += static_cast<long long>(todo.size());
    for (std::size_t k : todo) memo[r.etas[k]] = r.values[k];
    for (std::size_t k = 0; k < r.etas.size(); ++k) r.values[k] = memo.at(r.etas[k]);

    // Ties go to the smallest stepsize; the grid is ascending.
    std::size_t best = 0;
    for (std::size_t k = 1; k < r.etas.size(); ++k) {
      if (r.values[k] < r.values[best]) best = k;
    }
    r.best_eta = r.etas[best];
    r.best_value = r.values[best];
    if (!have_best || r.best_value < trace.final_value ||
        (r.best_value == trace.final_value && r.best_eta < trace.final_eta)) {
      trace.final_eta = r.best_eta;
      trace.final_value = r.best_value;
      have_best = true;
    }
    const bool flat = std::all_of(r.values.begin(), r.values.end(),
                                  [&](double v) { return v == r.values.front(); });
    trace.rounds.push_back(std::move(r));
    if (hi - lo <= cfg.tol_eps || flat) return trace;

    const double half = cfg.shrink_alpha * (hi - lo) / (cfg.points_n - 1);
    lo = std::max(trace.final_eta - half, kEtaFloor);
    hi = trace.final_eta + half;
    if (!(lo < hi)) return trace;
  }
  trace.hit_round_cap = trace.rounds.back().range_hi - trace.rounds.back().range_lo > cfg.tol_eps;
  return trace;
}

std::string search_csv_header() { return "T,algorithm,eta_star,value,solver_calls,rounds"; }

std::string search_csv_row(const SearchTrace& trace) {
  return std::to_string(trace.T) + "," + to_string(trace.algorithm) + "," +
         format_double(trace.final_eta) + "," + format_double(trace.final_value) + "," +
         std::to_string(trace.solver_calls) + "," + std::to_string(trace.rounds.size());
}

}  // namespace altgda
