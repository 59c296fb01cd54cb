#include "altgda/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "altgda/projection.hpp"
#include "rng.hpp"

namespace altgda {

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

// Compensated running sum (Neumaier) used for the streaming averages.
class KahanVector {
 public:
  explicit KahanVector(Index d) : sum_(Vector::Zero(d)), comp_(Vector::Zero(d)) {}

  void add(const Vector& v) {
    for (Index i = 0; i < v.size(); ++i) {
      const double s = sum_[i];
      const double t = s + v[i];
      if (std::abs(s) >= std::abs(v[i])) {
        comp_[i] += (s - t) + v[i];
      } else {
        comp_[i] += (v[i] - t) + s;
      }
      sum_[i] = t;
    }
  }

  Vector mean(long long count) const {
    return (sum_ + comp_) / static_cast<double>(count);
  }

 private:
  Vector sum_;
  Vector comp_;
};

double residual_value(const PayoffMatrix& a, double eta, VectorRef x_t,
                      VectorRef y_t, VectorRef x_next, VectorRef y_next) {
  const auto& e = a.entries();
  const Vector dx = x_next - x_t;
  const Vector dy = y_next - y_t;
  const Vector gx = -eta * (e.transpose() * y_t) - dx;
  const Vector gy = eta * (e * x_next) - dy;
  return gx.dot(dx) + gy.dot(dy);
}

void check_profile(const PayoffMatrix& a, const EquilibriumProfile& p) {
  if (p.x_star.dim() != a.cols() || p.y_star.dim() != a.rows()) {
    fail(ErrorKind::kContract, "profile dimensions do not match the game");
  }
}

double max_off_support(VectorRef z, const std::vector<Index>& support) {
  double worst = 0.0;
  std::size_t k = 0;
  for (Index i = 0; i < z.size(); ++i) {
    if (k < support.size() && support[k] == i) {
      ++k;
      continue;
    }
    worst = std::max(worst, z[i]);
  }
  return worst;
}

Vector sample_player(std::mt19937_64& g, rng::Normal& normal,
                     const Vector& star, const std::vector<Index>& support,
                     double cap, bool cap_redundant, double radius) {
  const Index d = star.size();
  const Index k = static_cast<Index>(support.size());
  std::vector<bool> on(d, false);
  for (Index i : support) on[i] = true;
  Vector z = star;
  const Index off = d - k;
  double off_mass = 0.0;
  if (off > 0) {
    double hi = radius / std::sqrt(static_cast<double>(off));
    if (!cap_redundant) hi = std::min(hi, cap);
    for (Index i = 0; i < d; ++i) {
      if (on[i]) continue;
      z[i] = rng::unit(g) * hi;
      off_mass += z[i];
    }
  }
  Vector dir = Vector::Zero(k);
  for (Index i = 0; i < k; ++i) dir[i] = normal(g);
  dir.array() -= dir.mean();
  const double nd = dir.norm();
  const double len =
      nd > 0.0 ? radius * std::pow(rng::unit(g), 1.0 / std::max<Index>(k - 1, 1))
               : 0.0;
  for (Index i = 0; i < k; ++i) {
    const double step = nd > 0.0 ? len * dir[i] / nd : 0.0;
    z[support[i]] = star[support[i]] + step - off_mass / static_cast<double>(k);
  }
  return z;
}

}  // namespace

const char* to_string(Algorithm a) {
  return a == Algorithm::kAltGda ? "altgda" : "simgda";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "altgda" || name == "AltGDA") return Algorithm::kAltGda;
  if (name == "simgda" || name == "SimGDA") return Algorithm::kSimGda;
  fail(ErrorKind::kConfig, "unknown algorithm '" + name + "'");
}

IterateTrace run(const PayoffMatrix& a, const RunConfig& cfg) {
  const Index n = a.cols();
  const Index m = a.rows();
  if (cfg.x0.dim() != n || cfg.y0.dim() != m) {
    fail(ErrorKind::kContract, "initial strategies do not match the game");
  }
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) {
    fail(ErrorKind::kContract, "eta must be finite and > 0");
  }
  if (cfg.horizon < 1) fail(ErrorKind::kContract, "horizon must be >= 1");
  if (cfg.record_stride < 1) {
    fail(ErrorKind::kContract, "record_stride must be >= 1");
  }
  if (cfg.reference) check_profile(a, *cfg.reference);
  if (cfg.regions && !cfg.reference) {
    fail(ErrorKind::kContract, "region flags require a reference profile");
  }

  const auto& e = a.entries();
  const double eta = cfg.eta;
  const bool alt = cfg.algorithm == Algorithm::kAltGda;
  std::vector<long long> checkpoints = cfg.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  std::size_t next_cp = 0;

  IterateTrace tr;
  tr.config = cfg;
  Vector x = cfg.x0.probs();
  Vector y = cfg.y0.probs();
  Vector x_prev(n), y_prev(m), aty(n), ax(m);
  Vector scratch(std::max(n, m));
  KahanVector sum_x(n), sum_y(m);
  if (cfg.store_iterates) {
    tr.xs.reserve(static_cast<std::size_t>(cfg.horizon) + 1);
    tr.ys.reserve(static_cast<std::size_t>(cfg.horizon) + 1);
    tr.xs.push_back(x);
    tr.ys.push_back(y);
  }

  for (long long t = 1; t <= cfg.horizon; ++t) {
    x_prev = x;
    y_prev = y;
    aty.noalias() = e.transpose() * y;
    if (!alt) ax.noalias() = e * x;
    x.noalias() -= eta * aty;
    project_simplex_inplace(x.data(), n, scratch.data());
    if (alt) ax.noalias() = e * x;
    y.noalias() += eta * ax;
    project_simplex_inplace(y.data(), m, scratch.data());
    sum_x.add(x);
    sum_y.add(y);
    if (cfg.store_iterates) {
      tr.xs.push_back(x);
      tr.ys.push_back(y);
    }

    while (next_cp < checkpoints.size() && checkpoints[next_cp] < t) ++next_cp;
    const bool at_cp = next_cp < checkpoints.size() && checkpoints[next_cp] == t;
    if (!(t % cfg.record_stride == 0 || t == cfg.horizon || at_cp)) continue;

    StepDiagnostics d;
    d.t = t;
    Vector ax_avg = sum_x.mean(t);
    Vector ay_avg = sum_y.mean(t);
    d.gap_avg = duality_gap(a, ax_avg, ay_avg);
    if (cfg.reference) {
      d.energy_E = energy(a, eta, x, y, *cfg.reference);
      d.energy_V = energy_variant(a, eta, x, y, *cfg.reference);
      if (cfg.regions) {
        d.in_S = membership(x, y, *cfg.regions, *cfg.reference, Region::kS);
        d.in_S0 = membership(x, y, *cfg.regions, *cfg.reference, Region::kS0);
      }
    }
    if (alt) {
      const UpdateDecomposition dec =
          decompose_update(a, eta, x_prev, y_prev, x, y);
      d.residual_r = residual_value(a, eta, x_prev, y_prev, x, y);
      d.gamma_bar = dec.gamma_bar;
      d.lambda_bar = dec.lambda_bar;
    }
    tr.avg_x.push_back(std::move(ax_avg));
    tr.avg_y.push_back(std::move(ay_avg));
    tr.diagnostics.push_back(d);
  }
  tr.final_x = x;
  tr.final_y = y;
  tr.final_avg_x = tr.avg_x.back();
  tr.final_avg_y = tr.avg_y.back();
  return tr;
}

double energy(const PayoffMatrix& a, double eta, VectorRef x, VectorRef y,
              const EquilibriumProfile& p) {
  check_profile(a, p);
  return (x - p.x_star.probs()).squaredNorm() +
         (y - p.y_star.probs()).squaredNorm() -
         eta * y.dot(a.entries() * x);
}

double energy_variant(const PayoffMatrix& a, double eta, VectorRef x,
                      VectorRef y, const EquilibriumProfile& p) {
  check_profile(a, p);
  const Vector dx = x - p.x_star.probs();
  const Vector dy = y - p.y_star.probs();
  return dx.squaredNorm() + dy.squaredNorm() - eta * dy.dot(a.entries() * dx);
}

double residual(const PayoffMatrix& a, double eta, VectorRef x_t, VectorRef y_t,
                VectorRef x_next, VectorRef y_next) {
  decompose_update(a, eta, x_t, y_t, x_next, y_next);
  return residual_value(a, eta, x_t, y_t, x_next, y_next);
}

double phi_potential(const PayoffMatrix& a, double eta,
                     const IterateTrace& trace, long long t, VectorRef x,
                     VectorRef y) {
  const long long stored = static_cast<long long>(trace.xs.size());
  if (stored == 0) {
    fail(ErrorKind::kContract, "potentials need a trace with stored iterates");
  }
  if (t < 0 || t >= stored) {
    fail(ErrorKind::kIndex, "iterate index " + std::to_string(t) +
                                " outside [0, " + std::to_string(stored - 1) +
                                "]");
  }
  const Vector& xt = trace.xs[static_cast<std::size_t>(t)];
  const Vector& yt = trace.ys[static_cast<std::size_t>(t)];
  return 0.5 * (xt - x).squaredNorm() + 0.5 * (yt - y).squaredNorm() +
         eta * yt.dot(a.entries() * x);
}

Potentials potentials(const PayoffMatrix& a, double eta,
                      const IterateTrace& trace, long long t, VectorRef x,
                      VectorRef y) {
  if (t == 0) fail(ErrorKind::kIndex, "psi_t is defined for t >= 1 only");
  Potentials p;
  p.phi = phi_potential(a, eta, trace, t, x, y);
  const auto ti = static_cast<std::size_t>(t);
  const Vector& xt = trace.xs[ti];
  const Vector& yt = trace.ys[ti];
  const Vector& yp = trace.ys[ti - 1];
  p.psi = 0.5 * (xt - x).squaredNorm() + 0.5 * (yp - y).squaredNorm() -
          0.5 * (yt - yp).squaredNorm();
  return p;
}

double interior_stepsize_bound(const PayoffMatrix& a,
                               const EquilibriumProfile& p) {
  check_profile(a, p);
  if (!p.is_interior) {
    fail(ErrorKind::kPrecondition,
         "interior stepsize bound needs an interior equilibrium");
  }
  const double mn =
      std::min(p.x_star.probs().minCoeff(), p.y_star.probs().minCoeff());
  if (a.spectral_norm() == 0.0) return std::numeric_limits<double>::infinity();
  return mn / a.spectral_norm();
}

double theorem_bound(BoundKind kind, long long T, double eta, double norm_a,
                     std::optional<double> delta) {
  if (T < 1) fail(ErrorKind::kContract, "theorem bound needs T >= 1");
  if (!(eta > 0.0)) fail(ErrorKind::kContract, "theorem bound needs eta > 0");
  const double denom = eta * static_cast<double>(T);
  if (kind == BoundKind::kInterior) return (9.0 + 4.0 * eta * norm_a) / denom;
  if (!delta) {
    fail(ErrorKind::kConfig, "local theorem bound requires delta");
  }
  return (9.0 + 7.0 * eta * norm_a + (*delta) * (*delta) / 128.0) / denom;
}

LocalRegionParams local_regions(const PayoffMatrix& a, double eta,
                                const EquilibriumProfile& p) {
  check_profile(a, p);
  const double norm = a.spectral_norm();
  if (!(eta > 0.0)) fail(ErrorKind::kContract, "eta must be > 0");
  if (norm > 0.0 && eta * norm > 0.5 * (1.0 + 1e-12)) {
    fail(ErrorKind::kPrecondition,
         "local regions require eta <= 1/(2||A||) (separation regime); got "
         "eta*||A|| = " + format_double(eta * norm));
  }
  LocalRegionParams r;
  r.eta = eta;
  r.delta = delta_margin(a, p);
  const double n = static_cast<double>(a.cols());
  const double m = static_cast<double>(a.rows());
  const double kx = static_cast<double>(p.support_x.size());
  const double ky = static_cast<double>(p.support_y.size());
  r.tail_x_redundant = kx == n;
  r.tail_y_redundant = ky == m;
  r.r_x = r.tail_x_redundant ? n : std::min(kx / (n - kx), n);
  r.r_y = r.tail_y_redundant ? m : std::min(ky / (m - ky), m);
  r.c = std::min({eta * norm, r.delta / (192.0 * kx), r.delta / (192.0 * ky)});
  r.radius_S = r.delta / 4.0;
  r.radius_S0 = r.delta / 8.0;
  r.tail_cap_S_x = 0.5 * eta * norm * r.r_x * r.delta;
  r.tail_cap_S_y = 0.5 * eta * norm * r.r_y * r.delta;
  r.tail_cap_S0_x = 0.5 * r.c * r.r_x * r.delta;
  r.tail_cap_S0_y = 0.5 * r.c * r.r_y * r.delta;
  return r;
}

bool membership(VectorRef x, VectorRef y, const LocalRegionParams& params,
                const EquilibriumProfile& p, Region which) {
  const bool s0 = which == Region::kS0;
  const double radius = s0 ? params.radius_S0 : params.radius_S;
  if ((x - p.x_star.probs()).norm() > radius) return false;
  if ((y - p.y_star.probs()).norm() > radius) return false;
  if (!params.tail_x_redundant &&
      max_off_support(x, p.support_x) >
          (s0 ? params.tail_cap_S0_x : params.tail_cap_S_x)) {
    return false;
  }
  if (!params.tail_y_redundant &&
      max_off_support(y, p.support_y) >
          (s0 ? params.tail_cap_S0_y : params.tail_cap_S_y)) {
    return false;
  }
  return true;
}

std::pair<MixedStrategy, MixedStrategy> sample_init_in_S0(
    const LocalRegionParams& params, const EquilibriumProfile& p,
    std::uint64_t seed, std::optional<double> radius) {
  const double r = radius ? std::min(*radius, params.radius_S0)
                          : params.radius_S0;
  if (r <= 0.0) return {p.x_star, p.y_star};
  std::mt19937_64 g(seed);
  rng::Normal normal;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vector x = sample_player(g, normal, p.x_star.probs(), p.support_x,
                             params.tail_cap_S0_x, params.tail_x_redundant, r);
    Vector y = sample_player(g, normal, p.y_star.probs(), p.support_y,
                             params.tail_cap_S0_y, params.tail_y_redundant, r);
    if (x.minCoeff() < 0.0 || y.minCoeff() < 0.0) continue;
    if ((x - p.x_star.probs()).norm() > r) continue;
    if ((y - p.y_star.probs()).norm() > r) continue;
    MixedStrategy xs(std::move(x));
    MixedStrategy ys(std::move(y));
    if (membership(xs.probs(), ys.probs(), params, p, Region::kS0)) {
      return {xs, ys};
    }
  }
  fail(ErrorKind::kSampling,
       "no point of S0 found after 1e5 draws; the region is numerically thin");
}

MixedStrategy random_simplex_point(Index dim, std::uint64_t seed) {
  if (dim < 1) fail(ErrorKind::kContract, "empty strategy");
  std::mt19937_64 g(seed);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = rng::exponential(g);
  v /= v.sum();
  return MixedStrategy(std::move(v));
}

std::string trace_csv(const IterateTrace& trace) {
  std::string out =
      "t,gap_avg,energy_E,energy_V,residual_r,gamma_bar,lambda_bar,in_S,in_S0\n";
  auto num = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("nan");
  };
  auto flag = [](const std::optional<bool>& v) {
    return v ? std::string(*v ? "1" : "0") : std::string("nan");
  };
  for (const auto& d : trace.diagnostics) {
    out += std::to_string(d.t) + ',' + format_double(d.gap_avg) + ',' +
           num(d.energy_E) + ',' + num(d.energy_V) + ',' + num(d.residual_r) +
           ',' + num(d.gamma_bar) + ',' + num(d.lambda_bar) + ',' +
           flag(d.in_S) + ',' + flag(d.in_S0) + '\n';
  }
  return out;
}

void write_trace_csv(const std::string& path, const IterateTrace& trace) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::kIo, "cannot write trace " + path);
  f << trace_csv(trace);
  if (!f) fail(ErrorKind::kIo, "write failed for " + path);
}

}  // namespace altgda
