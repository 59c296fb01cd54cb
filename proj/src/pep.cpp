#include "altgda/pep.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "altgda/projection.hpp"
#include "json.hpp"

namespace altgda {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

class SymBuilder {
 public:
  // Adds scale * (a b^T + b a^T) / 2.
  void add_sym(const Vector& a, const Vector& b, double scale = 1.0) {
    for (Index r = 0; r < a.size(); ++r) {
      if (a[r] == 0.0) continue;
      for (Index c = 0; c < b.size(); ++c) {
        if (b[c] == 0.0) continue;
        const double v = 0.5 * scale * a[r] * b[c];
        const int i = static_cast<int>(std::min(r, c));
        const int j = static_cast<int>(std::max(r, c));
        // (r, c) and (c, r) both land on the same upper-triangle slot; the
        // diagonal receives both halves.
        acc_[{i, j}] += (r == c) ? 2.0 * v : v;
      }
    }
  }

  SparseSym build() const {
    SparseSym s;
    for (const auto& [k, v] : acc_) {
      if (v != 0.0) s.entries.push_back({k.first, k.second, v});
    }
    return s;
  }

 private:
  std::map<std::pair<int, int>, double> acc_;
};

SparseSym sym(const Vector& a, const Vector& b, double scale = 1.0) {
  SymBuilder sb;
  sb.add_sym(a, b, scale);
  return sb.build();
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  if (!f) return {};
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string tail(const std::string& s, std::size_t n) {
  return s.size() <= n ? s : "..." + s.substr(s.size() - n);
}

std::vector<int> index_set(int T) {
  std::vector<int> out;
  for (int i = -1; i <= T; ++i) out.push_back(i);
  return out;
}

}  // namespace

double SparseSym::trace_with(const Eigen::MatrixXd& g) const {
  double s = 0.0;
  for (const auto& e : entries) {
    s += (e.i == e.j) ? e.value * g(e.i, e.j)
                      : e.value * (g(e.i, e.j) + g(e.j, e.i));
  }
  return s;
}

double GramPair::evaluate(const Eigen::MatrixXd& gx,
                          const Eigen::MatrixXd& gy) const {
  return x.trace_with(gx) + y.trace_with(gy);
}

Eigen::MatrixXd PsdMap::evaluate(const Eigen::MatrixXd& gx,
                                 const Eigen::MatrixXd& gy) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(order, order);
  for (const auto& [ab, c] : entries) {
    const double v = c.evaluate(gx, gy);
    out(ab.first, ab.second) = v;
    out(ab.second, ab.first) = v;
  }
  return out;
}

std::size_t SdpInstance::count(const std::string& family) const {
  std::size_t n = 0;
  for (const auto& c : ineq) n += c.family == family;
  for (const auto& c : eq) n += c.family == family;
  return n;
}

SelectionBasis build_selection_basis(const PepSpec& spec) {
  if (spec.T < 1) fail(ErrorKind::kConfig, "PEP horizon T must be >= 1");
  if (!(spec.eta > 0.0) || !std::isfinite(spec.eta)) {
    fail(ErrorKind::kConfig, "PEP stepsize must be finite and > 0");
  }
  const int T = spec.T;
  const int N = 2 * T + 6;
  auto e = [N](int k) {
    Vector v = Vector::Zero(N);
    v[k - 1] = 1.0;
    return v;
  };
  SelectionBasis b;
  b.T = T;
  b.ambient_dim = N;
  for (int i = -1; i <= T; ++i) {
    b.g_x[i] = e(i + 4);
    b.g_y[i] = e(i + 4);
    b.q_bar[i] = e(i + T + 6);
    b.p_bar[i] = e(i + T + 6);
  }
  const double eta = spec.eta;
  const bool alt = spec.algorithm == Algorithm::kAltGda;
  b.x_tilde[-1] = e(1);
  b.x_tilde[0] = e(2);
  b.y_tilde[-1] = e(1);
  b.y_tilde[0] = e(2);
  for (int i = 1; i <= T; ++i) {
    Vector x = e(2);
    Vector y = e(2);
    for (int j = 1; j <= i; ++j) {
      x -= b.g_x[j];
      y -= b.g_y[j];
    }
    for (int j = 0; j <= i - 1; ++j) x -= eta * b.q_bar[j];
    const int lo = alt ? 1 : 0;
    const int hi = alt ? i : i - 1;
    for (int j = lo; j <= hi; ++j) y += eta * b.p_bar[j];
    b.x_tilde[i] = std::move(x);
    b.y_tilde[i] = std::move(y);
  }
  return b;
}

SdpInstance assemble_pep_sdp(const PepSpec& spec) {
  const SelectionBasis b = build_selection_basis(spec);
  const int T = spec.T;
  const auto I = index_set(T);
  SdpInstance inst;
  inst.spec = spec;
  inst.gram_order = b.ambient_dim;

  for (int i : I) {
    for (int j : I) {
      LinearConstraint cx{"interpolation_x", {}, 0.0};
      cx.coeff.x = sym(b.g_x.at(j), b.x_tilde.at(i) - b.x_tilde.at(j));
      inst.ineq.push_back(std::move(cx));
      LinearConstraint cy{"interpolation_y", {}, 0.0};
      cy.coeff.y = sym(b.g_y.at(j), b.y_tilde.at(i) - b.y_tilde.at(j));
      inst.ineq.push_back(std::move(cy));
    }
  }
  for (int i : I) {
    LinearConstraint rx{"radius_x", {}, 1.0};
    rx.coeff.x = sym(b.x_tilde.at(i), b.x_tilde.at(i));
    inst.ineq.push_back(std::move(rx));
    LinearConstraint ry{"radius_y", {}, 1.0};
    ry.coeff.y = sym(b.y_tilde.at(i), b.y_tilde.at(i));
    inst.ineq.push_back(std::move(ry));
  }
  for (int i : I) {
    for (int j : I) {
      LinearConstraint c{"coupling", {}, 0.0};
      c.coeff.x = sym(b.x_tilde.at(i), b.q_bar.at(j));
      c.coeff.y = sym(b.p_bar.at(i), b.y_tilde.at(j), -1.0);
      inst.eq.push_back(std::move(c));
    }
  }
  PsdMap xp{"XP", T + 2, {}};
  PsdMap yq{"YQ", T + 2, {}};
  for (std::size_t a = 0; a < I.size(); ++a) {
    for (std::size_t c = a; c < I.size(); ++c) {
      const int ia = I[a], ic = I[c];
      GramPair m1;
      m1.x = sym(b.x_tilde.at(ia), b.x_tilde.at(ic));
      m1.y = sym(b.p_bar.at(ia), b.p_bar.at(ic), -1.0);
      xp.entries.push_back({{static_cast<int>(a), static_cast<int>(c)}, m1});
      GramPair m2;
      m2.y = sym(b.y_tilde.at(ia), b.y_tilde.at(ic));
      m2.x = sym(b.q_bar.at(ia), b.q_bar.at(ic), -1.0);
      yq.entries.push_back({{static_cast<int>(a), static_cast<int>(c)}, m2});
    }
  }
  inst.psd_maps.push_back(std::move(xp));
  inst.psd_maps.push_back(std::move(yq));

  SymBuilder ox, oy;
  const double w = 1.0 / static_cast<double>(T);
  for (int i = 1; i <= T; ++i) {
    ox.add_sym(b.q_bar.at(-1), b.x_tilde.at(i), w);
    oy.add_sym(b.y_tilde.at(i), b.p_bar.at(-1), -w);
  }
  inst.objective.x = ox.build();
  inst.objective.y = oy.build();
  return inst;
}

SdpSolution verify_certificate(const SdpInstance& inst, SdpSolution sol,
                               const VerifyTolerances& tol) {
  const int N = inst.gram_order;
  if (sol.gram_x.rows() != N || sol.gram_x.cols() != N ||
      sol.gram_y.rows() != N || sol.gram_y.cols() != N) {
    fail(ErrorKind::kContract, "Gram blocks do not match the instance order");
  }
  const auto& gx = sol.gram_x;
  const auto& gy = sol.gram_y;
  sol.objective_value = inst.objective.evaluate(gx, gy);
  sol.max_ineq_violation = 0.0;
  for (const auto& c : inst.ineq) {
    sol.max_ineq_violation =
        std::max(sol.max_ineq_violation, c.coeff.evaluate(gx, gy) - c.rhs);
  }
  sol.max_eq_residual = 0.0;
  for (const auto& c : inst.eq) {
    sol.max_eq_residual =
        std::max(sol.max_eq_residual, std::abs(c.coeff.evaluate(gx, gy) - c.rhs));
  }
  double asym = std::max((gx - gx.transpose()).cwiseAbs().maxCoeff(),
                         (gy - gy.transpose()).cwiseAbs().maxCoeff());
  sol.max_eq_residual = std::max(sol.max_eq_residual, asym);
  sol.min_eigenvalue = std::min(min_eigenvalue(gx), min_eigenvalue(gy));
  for (const auto& m : inst.psd_maps) {
    sol.min_eigenvalue = std::min(sol.min_eigenvalue, min_eigenvalue(m.evaluate(gx, gy)));
  }
  sol.accepted = std::isfinite(sol.objective_value) &&
                 sol.min_eigenvalue >= -tol.eigenvalue &&
                 sol.max_eq_residual <= tol.equality &&
                 sol.max_ineq_violation <= tol.inequality;
  return sol;
}

// --- SDPA ------------------------------------------------------------------

std::string format_sdpa(const SdpaProblem& p) {
  std::string out;
  out += std::to_string(p.b.size()) + "\n";
  out += std::to_string(p.block_sizes.size()) + "\n";
  for (std::size_t k = 0; k < p.block_sizes.size(); ++k) {
    if (k) out += ' ';
    out += std::to_string(p.block_sizes[k]);
  }
  out += "\n";
  for (std::size_t k = 0; k < p.b.size(); ++k) {
    if (k) out += ' ';
    out += format_double(p.b[k]);
  }
  out += "\n";
  char buf[128];
  for (const auto& e : p.entries) {
    std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g\n", e.matno, e.block,
                  e.i, e.j, e.value);
    out += buf;
  }
  return out;
}

SdpaProblem parse_sdpa(const std::string& text) {
  // The two header lines may carry trailing annotations ("2 =mdim").
  std::string body;
  long long mdim = -1, nblock = -1;
  int header = 0;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && (line[0] == '*' || line[0] == '"')) continue;
      if (header < 2) {
        std::istringstream ls(line);
        long long v = -1;
        if (!(ls >> v)) continue;
        (header == 0 ? mdim : nblock) = v;
        ++header;
        continue;
      }
      for (char& ch : line) {
        if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
      }
      body += line + "\n";
    }
  }
  if (mdim < 0 || nblock < 1) fail(ErrorKind::kIo, "SDPA: bad header");
  std::istringstream in(body);
  SdpaProblem p;
  for (long long k = 0; k < nblock; ++k) {
    int s = 0;
    if (!(in >> s) || s == 0) fail(ErrorKind::kIo, "SDPA: bad block structure");
    p.block_sizes.push_back(s);
  }
  for (long long k = 0; k < mdim; ++k) {
    std::string tok;
    if (!(in >> tok)) fail(ErrorKind::kIo, "SDPA: short constraint vector");
    p.b.push_back(std::strtod(tok.c_str(), nullptr));
  }
  SdpaEntry e;
  std::string v;
  while (in >> e.matno >> e.block >> e.i >> e.j >> v) {
    e.value = std::strtod(v.c_str(), nullptr);
    if (e.matno < 0 || e.matno > mdim || e.block < 1 || e.block > nblock) {
      fail(ErrorKind::kIo, "SDPA: entry index out of range");
    }
    p.entries.push_back(e);
  }
  if (!in.eof()) fail(ErrorKind::kIo, "SDPA: malformed entry line");
  return p;
}

void write_sdpa(const std::string& path, const SdpaProblem& p) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::kIo, "cannot write " + path);
  f << format_sdpa(p);
  if (!f) fail(ErrorKind::kIo, "write failed for " + path);
}

SdpaProblem read_sdpa(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_sdpa(ss.str());
}

SdpaEncoding encode_sdpa(const SdpInstance& inst) {
  const int N = inst.gram_order;
  SdpaEncoding enc;
  SdpaProblem& p = enc.problem;
  const int nineq = static_cast<int>(inst.ineq.size());
  p.block_sizes = {N, N};
  for (const auto& m : inst.psd_maps) p.block_sizes.push_back(m.order);
  const int slack_block = static_cast<int>(p.block_sizes.size()) + 1;
  if (nineq > 0) p.block_sizes.push_back(-nineq);

  auto emit = [&p](int matno, const GramPair& c) {
    for (const auto& e : c.x.entries) {
      p.entries.push_back({matno, 1, e.i + 1, e.j + 1, e.value});
    }
    for (const auto& e : c.y.entries) {
      p.entries.push_back({matno, 2, e.i + 1, e.j + 1, e.value});
    }
  };
  emit(0, inst.objective);

  nlohmann::ordered_json cmap = nlohmann::json::array();
  auto add_family = [&cmap](const std::string& fam, int first) {
    if (!cmap.empty() && cmap.back()["family"] == fam) {
      cmap.back()["count"] = cmap.back()["count"].get<int>() + 1;
    } else {
      cmap.push_back({{"family", fam}, {"first", first}, {"count", 1}});
    }
  };

  int matno = 0;
  for (int k = 0; k < nineq; ++k) {
    ++matno;
    emit(matno, inst.ineq[k].coeff);
    p.entries.push_back({matno, slack_block, k + 1, k + 1, 1.0});
    p.b.push_back(inst.ineq[k].rhs);
    add_family(inst.ineq[k].family, matno);
  }
  for (const auto& c : inst.eq) {
    ++matno;
    emit(matno, c.coeff);
    p.b.push_back(c.rhs);
    add_family(c.family, matno);
  }
  for (std::size_t r = 0; r < inst.psd_maps.size(); ++r) {
    const int blk = 3 + static_cast<int>(r);
    for (const auto& [ab, c] : inst.psd_maps[r].entries) {
      ++matno;
      emit(matno, c);
      const double s = ab.first == ab.second ? -1.0 : -0.5;
      p.entries.push_back({matno, blk, ab.first + 1, ab.second + 1, s});
      p.b.push_back(0.0);
      add_family("psd_map_" + inst.psd_maps[r].name, matno);
    }
  }

  nlohmann::ordered_json man;
  man["algorithm"] = to_string(inst.spec.algorithm);
  man["T"] = inst.spec.T;
  man["eta"] = inst.spec.eta;
  nlohmann::ordered_json bmap = nlohmann::json::array();
  bmap.push_back({{"block", 1}, {"name", "G_x"}, {"size", N}});
  bmap.push_back({{"block", 2}, {"name", "G_y"}, {"size", N}});
  for (std::size_t r = 0; r < inst.psd_maps.size(); ++r) {
    bmap.push_back({{"block", 3 + static_cast<int>(r)},
                    {"name", "slack_" + inst.psd_maps[r].name},
                    {"size", inst.psd_maps[r].order}});
  }
  if (nineq > 0) {
    bmap.push_back({{"block", slack_block}, {"name", "slack_ineq"}, {"size", -nineq}});
  }
  man["block_map"] = bmap;
  man["constraint_map"] = cmap;
  man["objective_sign"] = 1;
  enc.manifest_json = man.dump(2);
  return enc;
}

void export_sdpa(const SdpInstance& inst, const std::string& path) {
  const SdpaEncoding enc = encode_sdpa(inst);
  write_sdpa(path, enc.problem);
  std::ofstream f(path + ".manifest.json");
  if (!f) fail(ErrorKind::kIo, "cannot write " + path + ".manifest.json");
  f << enc.manifest_json << "\n";
}

SdpSolution parse_solution_file(const std::string& text, int gram_order) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kSolver, "empty solution file");
  SdpSolution sol;
  sol.gram_x = Eigen::MatrixXd::Zero(gram_order, gram_order);
  sol.gram_y = Eigen::MatrixXd::Zero(gram_order, gram_order);
  bool any = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    int mat = 0, blk = 0, i = 0, j = 0;
    std::string v;
    if (!(ls >> mat >> blk >> i >> j >> v)) continue;
    if (mat != 2 || blk > 2) continue;
    if (i < 1 || j < 1 || i > gram_order || j > gram_order) {
      fail(ErrorKind::kSolver, "solution entry outside the Gram blocks");
    }
    const double val = std::strtod(v.c_str(), nullptr);
    auto& g = blk == 1 ? sol.gram_x : sol.gram_y;
    g(i - 1, j - 1) = val;
    g(j - 1, i - 1) = val;
    any = true;
  }
  if (!any) fail(ErrorKind::kSolver, "solution file has no primal matrix entries");
  return sol;
}

std::string resolve_solver_command(const std::string& configured) {
  if (const char* env = std::getenv("PEP_SDP_SOLVER"); env && *env) return env;
  return configured;
}

SdpSolution solve_pep(const PepSpec& spec, const SolverOptions& opts) {
  const std::string cmd = resolve_solver_command(opts.command);
  if (cmd.empty()) {
    fail(ErrorKind::kConfig,
         "no SDP solver configured; set PEP_SDP_SOLVER or pass --solver");
  }
  const SdpInstance inst = assemble_pep_sdp(spec);
  const fs::path root =
      opts.scratch_root.empty() ? fs::temp_directory_path() : fs::path(opts.scratch_root);
  std::string templ = (root / "altgda-pep-XXXXXX").string();
  std::vector<char> buf(templ.begin(), templ.end());
  buf.push_back('\0');
  if (!mkdtemp(buf.data())) fail(ErrorKind::kIo, "cannot create scratch directory");
  const fs::path dir(buf.data());
  struct Cleanup {
    fs::path dir;
    bool keep;
    ~Cleanup() {
      std::error_code ec;
      if (!keep) fs::remove_all(dir, ec);
    }
  } cleanup{dir, opts.keep_scratch};

  export_sdpa(inst, (dir / "problem.dat-s").string());
  const std::string shell = "cd '" + dir.string() + "' && timeout " +
                            std::to_string(opts.timeout_seconds) + " " + cmd +
                            " problem.dat-s solution > solver.log 2>&1";
  const int status = std::system(shell.c_str());
  const std::string log = read_file(dir / "solver.log");
  const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  if (code == 124) {
    fail(ErrorKind::kSolver, "solver timed out after " +
                                 std::to_string(opts.timeout_seconds) + " s: " +
                                 tail(log, 2000));
  }
  if (code != 0 && code != 3) {
    fail(ErrorKind::kSolver,
         "solver exited with code " + std::to_string(code) + ": " + tail(log, 2000));
  }
  const std::string soltext = read_file(dir / "solution");
  if (soltext.empty()) {
    fail(ErrorKind::kSolver, "solver produced no solution file: " + tail(log, 2000));
  }
  SdpSolution sol = parse_solution_file(soltext, inst.gram_order);
  sol = verify_certificate(inst, std::move(sol), opts.tolerances);
  if (!sol.accepted) {
    char msg[256];
    std::snprintf(msg, sizeof msg,
                  "solution rejected (min eigenvalue %.3e, max equality residual "
                  "%.3e, max inequality violation %.3e)",
                  sol.min_eigenvalue, sol.max_eq_residual, sol.max_ineq_violation);
    fail(ErrorKind::kCertificateRejected, msg);
  }
  return sol;
}

double pep_value(const PepSpec& spec, const SolverOptions& opts) {
  return solve_pep(spec, opts).objective_value;
}

SdpSolution planted_solution(const PepSpec& spec, const PayoffMatrix& a,
                             const MixedStrategy& x0, const MixedStrategy& y0) {
  if (a.spectral_norm() > 1.0 + 1e-12) {
    fail(ErrorKind::kPrecondition, "planted instance needs ||A|| <= 1");
  }
  const int T = spec.T;
  const double eta = spec.eta;
  const bool alt = spec.algorithm == Algorithm::kAltGda;
  RunConfig rc;
  rc.eta = eta;
  rc.horizon = T;
  rc.x0 = x0;
  rc.y0 = y0;
  rc.algorithm = spec.algorithm;
  rc.record_stride = T;
  rc.store_iterates = true;
  const IterateTrace tr = run(a, rc);
  const auto& e = a.entries();
  Index bx = 0, by = 0;
  (e.transpose() * tr.final_avg_y).minCoeff(&bx);
  (e * tr.final_avg_x).maxCoeff(&by);
  const Vector xs = MixedStrategy::vertex(a.cols(), bx).probs();
  const Vector ys = MixedStrategy::vertex(a.rows(), by).probs();

  const int N = 2 * T + 6;
  Eigen::MatrixXd hx = Eigen::MatrixXd::Zero(a.cols(), N);
  Eigen::MatrixXd hy = Eigen::MatrixXd::Zero(a.rows(), N);
  hx.col(0) = xs;
  hx.col(1) = tr.xs[0];
  hy.col(0) = ys;
  hy.col(1) = tr.ys[0];
  auto xi = [&](int i) -> Vector { return i < 0 ? xs : tr.xs[i]; };
  auto yi = [&](int i) -> Vector { return i < 0 ? ys : tr.ys[i]; };
  for (int i = 1; i <= T; ++i) {
    hx.col(i + 3) = tr.xs[i - 1] - eta * e.transpose() * tr.ys[i - 1] - tr.xs[i];
    const Vector& xdrive = alt ? tr.xs[i] : tr.xs[i - 1];
    hy.col(i + 3) = tr.ys[i - 1] + eta * e * xdrive - tr.ys[i];
  }
  for (int i = -1; i <= T; ++i) {
    hx.col(i + T + 5) = e.transpose() * yi(i);
    hy.col(i + T + 5) = e * xi(i);
  }
  SdpSolution sol;
  sol.gram_x = hx.transpose() * hx;
  sol.gram_y = hy.transpose() * hy;
  return verify_certificate(assemble_pep_sdp(spec), std::move(sol));
}

Vector project_onto_hull(const std::vector<Vector>& points, VectorRef z) {
  if (points.empty()) fail(ErrorKind::kContract, "hull of an empty point set");
  const std::size_t K = points.size();
  std::vector<Vector> p(K);
  double scale = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    p[k] = points[k] - z;
    scale = std::max(scale, p[k].squaredNorm());
  }
  const double eps = 1e-14 * std::max(scale, 1e-300);
  std::size_t k0 = 0;
  for (std::size_t k = 1; k < K; ++k) {
    if (p[k].squaredNorm() < p[k0].squaredNorm()) k0 = k;
  }
  std::vector<std::size_t> S{k0};
  std::vector<double> lam{1.0};
  Vector x = p[k0];
  for (int major = 0; major < 1000; ++major) {
    std::size_t j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      const double v = x.dot(p[k]);
      if (v < best) {
        best = v;
        j = k;
      }
    }
    if (x.squaredNorm() - best <= eps) break;
    if (std::find(S.begin(), S.end(), j) != S.end()) break;
    S.push_back(j);
    lam.push_back(0.0);
    for (int minor = 0; minor < 1000; ++minor) {
      const Index s = static_cast<Index>(S.size());
      Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(s + 1, s + 1);
      for (Index a = 0; a < s; ++a) {
        for (Index b = 0; b < s; ++b) sys(a, b) = p[S[a]].dot(p[S[b]]);
        sys(a, s) = 1.0;
        sys(s, a) = 1.0;
      }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
      rhs[s] = 1.0;
      Eigen::VectorXd mu = sys.completeOrthogonalDecomposition().solve(rhs).head(s);
      bool positive = true;
      for (Index a = 0; a < s; ++a) positive &= mu[a] > 1e-14;
      if (positive) {
        for (Index a = 0; a < s; ++a) lam[a] = mu[a];
        break;
      }
      double theta = 1.0;
      for (Index a = 0; a < s; ++a) {
        if (mu[a] <= 1e-14 && lam[a] - mu[a] > 0.0) {
          theta = std::min(theta, lam[a] / (lam[a] - mu[a]));
        }
      }
      std::vector<std::size_t> S2;
      std::vector<double> lam2;
      for (Index a = 0; a < s; ++a) {
        const double v = (1.0 - theta) * lam[a] + theta * mu[a];
        if (v > 1e-15) {
          S2.push_back(S[a]);
          lam2.push_back(v);
        }
      }
      if (S2.empty()) {
        S2.push_back(S.back());
        lam2.push_back(1.0);
      }
      S = std::move(S2);
      lam = std::move(lam2);
      double tot = 0.0;
      for (double v : lam) tot += v;
      for (double& v : lam) v /= tot;
    }
    x.setZero();
    for (std::size_t a = 0; a < S.size(); ++a) x += lam[a] * p[S[a]];
  }
  return x + z;
}

ReconstructedInstance reconstruct_worst_case(const PepSpec& spec,
                                             const SdpSolution& solution) {
  const SelectionBasis b = build_selection_basis(spec);
  const int N = b.ambient_dim;
  if (solution.gram_x.rows() != N || solution.gram_y.rows() != N) {
    fail(ErrorKind::kContract, "Gram order does not match the PEP spec");
  }
  auto factor = [](const Eigen::MatrixXd& g, const char* name) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
    const Vector& ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-6) {
      fail(ErrorKind::kReconstruction,
           std::string(name) + " has eigenvalue " + format_double(ev.minCoeff()));
    }
    const double cut = 1e-12 * std::max(1.0, ev.maxCoeff());
    std::vector<Index> keep;
    for (Index k = 0; k < ev.size(); ++k) {
      if (ev[k] > cut) keep.push_back(k);
    }
    Eigen::MatrixXd h(std::max<Index>(keep.size(), 1), g.rows());
    h.setZero();
    for (std::size_t r = 0; r < keep.size(); ++r) {
      h.row(static_cast<Index>(r)) =
          std::sqrt(ev[keep[r]]) * es.eigenvectors().col(keep[r]).transpose();
    }
    return h;
  };
  const Eigen::MatrixXd hx = factor(solution.gram_x, "G_x");
  const Eigen::MatrixXd hy = factor(solution.gram_y, "G_y");

  const int T = spec.T;
  const auto I = index_set(T);
  const Index K = static_cast<Index>(I.size());
  ReconstructedInstance out;
  Eigen::MatrixXd X(hx.rows(), K), Q(hx.rows(), K), Y(hy.rows(), K), P(hy.rows(), K);
  for (Index k = 0; k < K; ++k) {
    const int i = I[k];
    out.x[i] = hx * b.x_tilde.at(i);
    out.q[i] = hx * b.q_bar.at(i);
    out.y[i] = hy * b.y_tilde.at(i);
    out.p[i] = hy * b.p_bar.at(i);
    X.col(k) = out.x[i];
    Q.col(k) = out.q[i];
    Y.col(k) = out.y[i];
    P.col(k) = out.p[i];
  }
  // Least squares A X ~ P, A^T Y ~ Q via the Sylvester normal equations.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(X * X.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ey(Y * Y.transpose());
  const Eigen::MatrixXd& U = ex.eigenvectors();
  const Eigen::MatrixXd& W = ey.eigenvectors();
  const Eigen::MatrixXd R = W.transpose() * (P * X.transpose() + Y * Q.transpose()) * U;
  const double scale = std::max(ex.eigenvalues().maxCoeff(), ey.eigenvalues().maxCoeff());
  Eigen::MatrixXd At(R.rows(), R.cols());
  for (Index r = 0; r < R.rows(); ++r) {
    for (Index c = 0; c < R.cols(); ++c) {
      const double d = ey.eigenvalues()[r] + ex.eigenvalues()[c];
      At(r, c) = d > 1e-12 * std::max(scale, 1e-300) ? R(r, c) / d : 0.0;
    }
  }
  Eigen::MatrixXd A = W * At * U.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sv = svd.singularValues().cwiseMin(1.0);
  A = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
  out.A = A;

  std::vector<Vector> hull_x, hull_y;
  for (int i : I) {
    hull_x.push_back(out.x[i]);
    hull_y.push_back(out.y[i]);
  }
  const double eta = spec.eta;
  const bool alt = spec.algorithm == Algorithm::kAltGda;
  Vector x = out.x[0], y = out.y[0];
  out.replay_x.push_back(x);
  out.replay_y.push_back(y);
  double obj = 0.0;
  const Vector q_star = A.transpose() * out.y[-1];
  const Vector p_star = A * out.x[-1];
  for (int t = 1; t <= T; ++t) {
    const Vector xn = project_onto_hull(hull_x, x - eta * A.transpose() * y);
    const Vector yn = project_onto_hull(hull_y, y + eta * A * (alt ? xn : x));
    x = xn;
    y = yn;
    out.replay_x.push_back(x);
    out.replay_y.push_back(y);
    const double err = std::max((x - out.x[t]).norm(), (y - out.y[t]).norm());
    out.max_iterate_error = std::max(out.max_iterate_error, err);
    if (err > 1e-4) {
      fail(ErrorKind::kReconstruction,
           "replay diverges at step " + std::to_string(t) + " (error " +
               format_double(err) + ")");
    }
    obj += q_star.dot(x) - y.dot(p_star);
  }
  out.replay_objective = obj / T;
  out.objective_error = std::abs(out.replay_objective - solution.objective_value);
  if (out.objective_error > 1e-3) {
    fail(ErrorKind::kReconstruction,
         "replayed objective " + format_double(out.replay_objective) +
             " differs from the certificate value " +
             format_double(solution.objective_value));
  }
  return out;
}

}  // namespace altgda
