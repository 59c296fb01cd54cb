#include "altgda/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "altgda/projection.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace altgda {

namespace {

class Tally {
 public:
  Tally(std::string name, bool active) {
    r_.name = std::move(name);
    r_.active = active;
    r_.worst_slack = std::numeric_limits<double>::infinity();
  }

  // Records slack = allowed - observed; the check fails when slack < -tol.
  void check(double slack, double tol, long long t = -1) {
    ++r_.checks;
    if (slack < r_.worst_slack) {
      r_.worst_slack = slack;
      worst_t_ = t;
    }
    if (!(slack >= -tol)) r_.passed = false;
  }

  InvariantResult finish() {
    if (!r_.active) {
      r_.passed = true;
      r_.worst_slack = 0.0;
      r_.checks = 0;
      if (r_.detail.empty()) r_.detail = "regime inactive";
    } else if (r_.checks == 0) {
      r_.worst_slack = 0.0;
    } else if (worst_t_ >= 0 && r_.detail.empty()) {
      r_.detail = "worst at t=" + std::to_string(worst_t_);
    }
    return r_;
  }

  void note(std::string d) { r_.detail = std::move(d); }
  bool active() const { return r_.active; }

 private:
  InvariantResult r_;
  long long worst_t_ = -1;
};

Vector random_point(std::mt19937_64& g, Index d) {
  Vector v(d);
  // Mix vertices and interior points.
  if (rng::unit(g) < 0.2) {
    v.setZero();
    v[static_cast<Index>(rng::bounded(g, static_cast<std::uint64_t>(d)))] = 1.0;
    return v;
  }
  for (Index i = 0; i < d; ++i) v[i] = rng::exponential(g);
  return v / v.sum();
}

bool contains(const std::vector<Index>& s, Index i) {
  return std::binary_search(s.begin(), s.end(), i);
}

}  // namespace

bool AuditReport::passed() const {
  return std::all_of(invariants.begin(), invariants.end(),
                     [](const InvariantResult& r) { return r.passed; });
}

const InvariantResult* AuditReport::find(const std::string& name) const {
  for (const auto& r : invariants) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::string AuditReport::to_text() const {
  std::string out;
  for (const auto& r : invariants) {
    const char* tag = !r.active ? "SKIP" : (r.passed ? "PASS" : "FAIL");
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s %-30s worst_slack=%.3e checks=%lld",
                  tag, r.name.c_str(), r.worst_slack, r.checks);
    out += buf;
    if (!r.detail.empty()) out += "  (" + r.detail + ")";
    out += '\n';
  }
  return out;
}

std::string AuditReport::to_json() const {
  nlohmann::ordered_json j = nlohmann::json::array();
  for (const auto& r : invariants) {
    j.push_back({{"name", r.name},
                 {"active", r.active},
                 {"passed", r.passed},
                 {"worst_slack", r.worst_slack},
                 {"checks", r.checks},
                 {"detail", r.detail}});
  }
  nlohmann::ordered_json root;
  root["passed"] = passed();
  root["invariants"] = j;
  return root.dump(2);
}

AuditReport audit_trace(const PayoffMatrix& a, const IterateTrace& trace,
                        const AuditConfig& cfg) {
  const RunConfig& rc = trace.config;
  const long long T = rc.horizon;
  if (static_cast<long long>(trace.xs.size()) != T + 1) {
    throw Error(ErrorKind::kContract, "audit needs a trace with stored iterates");
  }
  const auto& e = a.entries();
  const double eta = rc.eta;
  const double norm = a.spectral_norm();
  const Index n = a.cols();
  const Index m = a.rows();
  const bool alt = rc.algorithm == Algorithm::kAltGda;
  const bool has_ref = rc.reference.has_value();
  std::mt19937_64 g(cfg.seed);

  bool interior = false;
  bool local = false;
  LocalRegionParams regions;
  if (has_ref) {
    const auto& p = *rc.reference;
    interior = alt && p.is_interior &&
               eta <= interior_stepsize_bound(a, p) * (1.0 + 1e-12);
    if (alt && (norm == 0.0 || eta * norm <= 0.5 * (1.0 + 1e-12))) {
      regions = local_regions(a, eta, p);
      local = membership(trace.xs[0], trace.ys[0], regions, p, Region::kS0);
    }
  }

  Tally gap_nonneg("gap_nonnegative", true);
  Tally avg("average_consistency", true);
  Tally elementary("simplex_elementary", true);
  Tally hull("projection_hull_equivalence", true);
  Tally res_nonneg("residual_nonnegative", alt);
  Tally nonsmooth("nonsmooth_terms", alt);
  Tally tau("tau_identity", alt);
  Tally posqtt("pos_qtt", alt);
  Tally descent1("descent_inequality_1", alt);
  Tally descent2("descent_inequality_2", alt);
  Tally inp("inp_identity", alt && has_ref);
  Tally refined("refined_energy_change", alt && has_ref);
  Tally monotone("energy_monotone", interior);
  Tally decay("energy_decay_identity", interior);
  Tally sandwich("residual_energy_sandwich", interior);
  Tally thm1("theorem1_bound", interior);
  Tally in_s("local_stays_in_S", local);
  Tally sep("lemma3_separation", local);
  Tally l4("lemma4_energy_increase", local);
  Tally l4g("lemma4_gamma_form", local);
  Tally thm2("theorem2_bound", local);
  if (!has_ref) {
    for (Tally* t : {&inp, &refined}) t->note("no reference profile");
  }
  if (has_ref && !interior) {
    for (Tally* t : {&monotone, &decay, &sandwich, &thm1}) {
      t->note(!alt ? "SimGDA trace"
                   : (!rc.reference->is_interior ? "equilibrium not interior"
                                                 : "eta above interior bound"));
    }
  }
  if (has_ref && !local) {
    for (Tally* t : {&in_s, &l4, &l4g, &sep, &thm2}) {
      t->note(!alt ? "SimGDA trace"
                   : (eta * norm > 0.5 ? "eta above 1/(2||A||)"
                                       : "initial point outside S0"));
    }
  }

  // Recorded rows.
  const Vector* xstar = has_ref ? &rc.reference->x_star.probs() : nullptr;
  const Vector* ystar = has_ref ? &rc.reference->y_star.probs() : nullptr;
  Vector sx = Vector::Zero(n), sy = Vector::Zero(m);
  std::size_t row = 0;
  for (long long t = 1; t <= T; ++t) {
    sx += trace.xs[t];
    sy += trace.ys[t];
    if (row >= trace.diagnostics.size() || trace.diagnostics[row].t != t) continue;
    const auto& d = trace.diagnostics[row];
    gap_nonneg.check(d.gap_avg, 1e-12, t);
    const double dev =
        std::max((trace.avg_x[row] - sx / static_cast<double>(t)).cwiseAbs().maxCoeff(),
                 (trace.avg_y[row] - sy / static_cast<double>(t)).cwiseAbs().maxCoeff());
    avg.check(-dev, 1e-10, t);
    if (interior) {
      thm1.check(theorem_bound(BoundKind::kInterior, t, eta, norm) - d.gap_avg,
                 cfg.tol, t);
    }
    if (local) {
      thm2.check(theorem_bound(BoundKind::kLocal, t, eta, norm, regions.delta) -
                     d.gap_avg,
                 cfg.tol, t);
    }
    ++row;
  }

  for (long long k = 0; k < cfg.elementary_probes; ++k) {
    const Vector x = random_point(g, n), x2 = random_point(g, n);
    const Vector y = random_point(g, m), y2 = random_point(g, m);
    elementary.check(2.0 - (x - x2).norm(), cfg.tight_tol);
    elementary.check(norm - y.dot(e * x), cfg.tight_tol);
    elementary.check(norm - (e.transpose() * y).norm(), cfg.tight_tol);
    elementary.check(4.0 * norm - (y - y2).dot(e * (x - x2)), cfg.tight_tol);
  }

  double lemma4_sum = 0.0;
  double lemma4_gamma = 0.0;
  for (long long t = 0; t < T; ++t) {
    const Vector& x = trace.xs[t];
    const Vector& y = trace.ys[t];
    const Vector& xn = trace.xs[t + 1];
    const Vector& yn = trace.ys[t + 1];

    // Pre-projection points of this step.
    const Vector zx = x - eta * (e.transpose() * y);
    const Vector zy = y + eta * (e * (alt ? xn : x));
    hull.check(-(project_simplex(zx).point -
                 project_simplex(project_affine_hull(zx)).point)
                    .cwiseAbs()
                    .maxCoeff(),
               cfg.tight_tol, t);
    hull.check(-(project_simplex(zy).point -
                 project_simplex(project_affine_hull(zy)).point)
                    .cwiseAbs()
                    .maxCoeff(),
               cfg.tight_tol, t);
    if (!alt) continue;

    const UpdateDecomposition dec = decompose_update(a, eta, x, y, xn, yn);
    const Vector dx = xn - x;
    const Vector dy = yn - y;
    const double r = (-eta * (e.transpose() * y) - dx).dot(dx) +
                     (eta * (e * xn) - dy).dot(dy);
    res_nonneg.check(r, cfg.tight_tol, t);

    for (Index i : dec.active_x) {
      nonsmooth.check(-std::abs(dec.gamma[i] - dec.gamma_bar), cfg.tight_tol, t);
    }
    for (Index j : dec.active_y) {
      nonsmooth.check(-std::abs(dec.lambda[j] - dec.lambda_bar), cfg.tight_tol, t);
    }
    nonsmooth.check(dec.gamma_bar, cfg.tight_tol, t);
    nonsmooth.check(dec.lambda_bar, cfg.tight_tol, t);
    for (Index i = 0; i < n; ++i) {
      if (dec.gamma[i] <= 0.0) {
        nonsmooth.check(std::abs(dec.v[i]) - std::abs(dec.gamma[i]), cfg.tight_tol, t);
      }
    }
    for (Index j = 0; j < m; ++j) {
      if (dec.lambda[j] <= 0.0) {
        nonsmooth.check(std::abs(dec.u[j]) - std::abs(dec.lambda[j]), cfg.tight_tol, t);
      }
    }
    tau.check(-std::abs(eta * dec.gamma_bar - dec.tau_x), cfg.tight_tol, t);
    tau.check(-std::abs(eta * dec.lambda_bar - dec.tau_y), cfg.tight_tol, t);

    if (cfg.probes_per_step > 0 && t % cfg.probe_stride == 0) {
      const double gxn = dec.gamma.dot(xn);
      const double lyn = dec.lambda.dot(yn);
      const Vector axn = e * xn;
      const Vector aty = e.transpose() * y;
      const double half_steps = 0.5 * dx.squaredNorm() + 0.5 * dy.squaredNorm();
      const double d1_extra = eta * axn.dot(dy) - half_steps;
      const double d2_extra = -eta * aty.dot(dx) - half_steps;
      for (int k = 0; k < cfg.probes_per_step; ++k) {
        const Vector px = random_point(g, n);
        const Vector py = random_point(g, m);
        posqtt.check(gxn - dec.gamma.dot(px), cfg.tight_tol, t);
        posqtt.check(lyn - dec.lambda.dot(py), cfg.tight_tol, t);
        const Vector apx = e * px;
        // descent 1: phi_t - phi_{t+1} + extra - eta (y^T A x^{t+1} - y^{t+1 T} A x)
        const double phi_t = 0.5 * (x - px).squaredNorm() +
                             0.5 * (y - py).squaredNorm() + eta * y.dot(apx);
        const double phi_n = 0.5 * (xn - px).squaredNorm() +
                             0.5 * (yn - py).squaredNorm() + eta * yn.dot(apx);
        const double lhs1 = eta * (py.dot(axn) - yn.dot(apx));
        descent1.check(phi_t - phi_n + d1_extra - lhs1, cfg.tol, t);
        if (t >= 1) {
          const Vector& yp = trace.ys[t - 1];
          const double psi_t = 0.5 * (x - px).squaredNorm() +
                               0.5 * (yp - py).squaredNorm() -
                               0.5 * (y - yp).squaredNorm();
          const double psi_n = 0.5 * (xn - px).squaredNorm() +
                               0.5 * (y - py).squaredNorm() -
                               0.5 * dy.squaredNorm();
          const double lhs2 = eta * (py.dot(e * x) - y.dot(apx));
          descent2.check(psi_t - psi_n + d2_extra - lhs2, cfg.tol, t);
        }
      }
    }

    if (!has_ref) continue;
    const auto& p = *rc.reference;
    const double g_in = dec.gamma.dot(x - *xstar);
    const double l_in = dec.lambda.dot(y - *ystar);
    double g_alt = 0.0, l_alt = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (!contains(dec.active_x, i)) {
        g_alt += (dec.gamma[i] - dec.gamma_bar) * (x[i] - (*xstar)[i]);
      }
    }
    for (Index j = 0; j < m; ++j) {
      if (!contains(dec.active_y, j)) {
        l_alt += (dec.lambda[j] - dec.lambda_bar) * (y[j] - (*ystar)[j]);
      }
    }
    inp.check(-std::abs(g_in - g_alt), cfg.tol, t);
    inp.check(-std::abs(l_in - l_alt), cfg.tol, t);
    const double v_t = energy_variant(a, eta, x, y, p);
    const double v_n = energy_variant(a, eta, xn, yn, p);
    refined.check(-eta * g_in - eta * l_in - (v_n - v_t), cfg.tol, t);

    if (interior) {
      const double e_t = energy(a, eta, x, y, p);
      const double e_n = energy(a, eta, xn, yn, p);
      monotone.check(e_t - e_n, cfg.tol, t);
      const double ident = eta * dec.gamma.dot(xn + x - 2.0 * *xstar) +
                           eta * dec.lambda.dot(yn + y - 2.0 * *ystar);
      decay.check(-std::abs((e_t - e_n) - ident), cfg.tol, t);
      sandwich.check(r, cfg.tight_tol, t);
      sandwich.check(e_t - e_n - r, cfg.tol, t);
    }
    if (local) {
      lemma4_sum += std::max(v_n - v_t, 0.0);
      lemma4_gamma += -eta * (g_in + l_in);
      const bool inside = membership(x, y, regions, p, Region::kS);
      const double half = regions.delta / 2.0;
      if (inside) {
        for (Index i = 0; i < n; ++i) {
          if (contains(p.support_x, i)) {
            sep.check(x[i] - half, cfg.tol, t);
            sep.check(xn[i] - half, cfg.tol, t);
          } else {
            sep.check(x[i] - xn[i], cfg.tol, t);
          }
        }
        for (Index j = 0; j < m; ++j) {
          if (contains(p.support_y, j)) {
            sep.check(y[j] - half, cfg.tol, t);
            sep.check(yn[j] - half, cfg.tol, t);
          } else {
            sep.check(y[j] - yn[j], cfg.tol, t);
          }
        }
      }
      in_s.check(membership(xn, yn, regions, p, Region::kS) ? 0.0 : -1.0, 0.0,
                 t + 1);
    }
  }
  if (local) {
    const double cap = regions.delta * regions.delta / 128.0;
    l4.check(cap - lemma4_sum, cfg.lemma4_tol);
    l4.note("sum=" + format_double(lemma4_sum) + " cap=" + format_double(cap));
    l4g.check(cap - lemma4_gamma, cfg.lemma4_tol);
    l4g.note("sum=" + format_double(lemma4_gamma) + " cap=" + format_double(cap));
  }

  AuditReport rep;
  for (Tally* t : {&gap_nonneg, &avg, &elementary, &hull, &res_nonneg,
                   &nonsmooth, &tau, &posqtt, &descent1, &descent2, &inp,
                   &refined, &monotone, &decay, &sandwich, &thm1, &in_s, &sep,
                   &l4, &l4g, &thm2}) {
    rep.invariants.push_back(t->finish());
  }
  return rep;
}

}  // namespace altgda
