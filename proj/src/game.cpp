#include "altgda/game.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"
#include "rng.hpp"

namespace altgda {

namespace {

constexpr double kNeTol = 1e-9;

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

// Repeated squaring of a symmetric PSD matrix; the column of largest norm of
// G^(2^k) approximates a dominant eigenvector.
double dominant_eigenvalue(const Eigen::MatrixXd& gram) {
  const Index d = gram.rows();
  if (d == 0) return 0.0;
  const double scale = gram.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  Eigen::MatrixXd p = gram / scale;
  double prev = -1.0;
  double rq = 0.0;
  for (int k = 0; k < 64; ++k) {
    Index col = 0;
    p.colwise().squaredNorm().maxCoeff(&col);
    Eigen::VectorXd v = p.col(col);
    const double vv = v.squaredNorm();
    if (vv == 0.0) break;
    rq = v.dot(gram * v) / vv;
    if (k > 2 && std::abs(rq - prev) <= 1e-15 * std::abs(rq)) break;
    prev = rq;
    p = p * p;
    const double mx = p.cwiseAbs().maxCoeff();
    if (mx == 0.0 || !std::isfinite(mx)) break;
    p /= mx;
  }
  return std::max(rq, 0.0);
}

class Sampler {
 public:
  Sampler(Distribution d, std::uint64_t seed) : dist_(d), gen_(seed) {}

  double next() {
    switch (dist_) {
      case Distribution::kUniform01: return rng::unit(gen_);
      case Distribution::kRandInt:
        return static_cast<double>(static_cast<int>(rng::bounded(gen_, 21)) -
                                   10);
      case Distribution::kBinary: return rng::unit(gen_) < 0.8 ? 0.0 : 1.0;
      case Distribution::kNormal: return normal_(gen_);
      case Distribution::kLogNormal: return std::exp(normal_(gen_));
      case Distribution::kExponential: return rng::exponential(gen_);
      case Distribution::kExplicit: break;
    }
    fail(ErrorKind::kConfig, "sampler: explicit distribution has no sampler");
  }

 private:
  Distribution dist_;
  std::mt19937_64 gen_;
  rng::Normal normal_;
};

void check_dims(const PayoffMatrix& a, Index nx, Index ny) {
  if (nx != a.cols() || ny != a.rows()) {
    fail(ErrorKind::kContract, "strategy dimensions (" + std::to_string(nx) +
                                   ", " + std::to_string(ny) +
                                   ") do not match a " +
                                   std::to_string(a.rows()) + "x" +
                                   std::to_string(a.cols()) + " game");
  }
}

// Clamps solver dust and renormalizes; returns false if the vector is not a
// distribution within kNeTol.
bool clean_distribution(Vector& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] < -kNeTol) return false;
    if (v[i] <= 1e-12) v[i] = 0.0;
  }
  const double s = v.sum();
  if (std::abs(s - 1.0) > kNeTol || s <= 0.0) return false;
  v /= s;
  return true;
}

void next_subset(std::vector<Index>& idx, Index n, bool& done) {
  const Index k = static_cast<Index>(idx.size());
  Index i = k - 1;
  while (i >= 0 && idx[i] == n - k + i) --i;
  if (i < 0) {
    done = true;
    return;
  }
  ++idx[i];
  for (Index j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
}

// Solves [M -1; 1^T 0] [z; nu] = [0; 1] where M is the square payoff block
// seen by the opponent. Returns false when the bordered system is singular.
bool solve_bordered(const Eigen::MatrixXd& m, Vector& z) {
  const Index k = m.rows();
  Eigen::MatrixXd sys(k + 1, k + 1);
  sys.topLeftCorner(k, k) = m;
  sys.topRightCorner(k, 1).setConstant(-1.0);
  sys.bottomLeftCorner(1, k).setOnes();
  sys(k, k) = 0.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) return false;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs[k] = 1.0;
  Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) return false;
  z = sol.head(k);
  return true;
}

void add_distinct(std::vector<Vector>& pool, const Vector& v) {
  for (const auto& p : pool) {
    if ((p - v).cwiseAbs().maxCoeff() <= kNeTol) return;
  }
  pool.push_back(v);
}

}  // namespace

double spectral_norm(const RowMatrix& entries) {
  Eigen::MatrixXd gram;
  if (entries.rows() >= entries.cols()) {
    gram = entries.transpose() * entries;
  } else {
    gram = entries * entries.transpose();
  }
  return std::sqrt(dominant_eigenvalue(gram));
}

PayoffMatrix::PayoffMatrix(RowMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    fail(ErrorKind::kContract, "payoff matrix must be at least 1x1");
  }
  if (!entries_.allFinite()) {
    fail(ErrorKind::kContract, "payoff matrix has non-finite entries");
  }
  spectral_norm_ = altgda::spectral_norm(entries_);
}

PayoffMatrix PayoffMatrix::scaled(double factor) const {
  return PayoffMatrix(entries_ * factor);
}

MixedStrategy::MixedStrategy(Vector probs) : probs_(std::move(probs)) {
  if (probs_.size() < 1) fail(ErrorKind::kContract, "empty strategy");
  if (!probs_.allFinite()) {
    fail(ErrorKind::kContract, "strategy has non-finite entries");
  }
  for (Index i = 0; i < probs_.size(); ++i) {
    if (probs_[i] < -1e-12) {
      fail(ErrorKind::kContract,
           "strategy entry " + std::to_string(i) + " is negative (" +
               format_double(probs_[i]) + ")");
    }
    if (probs_[i] < 0.0) probs_[i] = 0.0;
  }
  const double s = probs_.sum();
  if (std::abs(s - 1.0) > 1e-10) {
    fail(ErrorKind::kContract,
         "strategy entries sum to " + format_double(s) + ", expected 1");
  }
  probs_ /= s;
}

MixedStrategy MixedStrategy::uniform(Index dim) {
  if (dim < 1) fail(ErrorKind::kContract, "empty strategy");
  return MixedStrategy(Vector::Constant(dim, 1.0 / static_cast<double>(dim)));
}

MixedStrategy MixedStrategy::vertex(Index dim, Index i) {
  if (dim < 1 || i < 0 || i >= dim) {
    fail(ErrorKind::kContract, "vertex index out of range");
  }
  Vector v = Vector::Zero(dim);
  v[i] = 1.0;
  return MixedStrategy(std::move(v));
}

const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::kUniform01: return "uniform01";
    case Distribution::kRandInt: return "randint";
    case Distribution::kBinary: return "binary";
    case Distribution::kNormal: return "normal";
    case Distribution::kLogNormal: return "lognormal";
    case Distribution::kExponential: return "exponential";
    case Distribution::kExplicit: return "explicit";
  }
  return "unknown";
}

Distribution distribution_from_string(const std::string& name) {
  if (name == "uniform01" || name == "uniform") return Distribution::kUniform01;
  if (name == "randint") return Distribution::kRandInt;
  if (name == "binary") return Distribution::kBinary;
  if (name == "normal") return Distribution::kNormal;
  if (name == "lognormal") return Distribution::kLogNormal;
  if (name == "exponential") return Distribution::kExponential;
  if (name == "explicit") return Distribution::kExplicit;
  fail(ErrorKind::kConfig, "unknown distribution '" + name + "'");
}

double duality_gap(const PayoffMatrix& a, VectorRef x, VectorRef y) {
  check_dims(a, x.size(), y.size());
  const double best_y = (a.entries() * x).maxCoeff();
  const double best_x = (a.entries().transpose() * y).minCoeff();
  return best_y - best_x;
}

double duality_gap(const PayoffMatrix& a, const MixedStrategy& x,
                   const MixedStrategy& y) {
  return duality_gap(a, x.probs(), y.probs());
}

EquilibriumProfile make_profile(const PayoffMatrix& a, const MixedStrategy& x,
                                const MixedStrategy& y, double tol) {
  const double gap = duality_gap(a, x, y);
  if (gap > tol) {
    fail(ErrorKind::kDegenerate,
         "supplied pair is not an equilibrium (gap " + format_double(gap) +
             ")");
  }
  EquilibriumProfile p{x, y, 0.0, {}, {}, false, 0.0};
  p.nu_star = y.probs().dot(a.entries() * x.probs());
  for (Index i = 0; i < x.dim(); ++i) {
    if (x[i] > 0.0) p.support_x.push_back(i);
  }
  for (Index j = 0; j < y.dim(); ++j) {
    if (y[j] > 0.0) p.support_y.push_back(j);
  }
  p.is_interior = static_cast<Index>(p.support_x.size()) == a.cols() &&
                  static_cast<Index>(p.support_y.size()) == a.rows();
  p.delta = delta_margin(a, p);
  return p;
}

EquilibriumProfile solve_equilibrium_max_support(const PayoffMatrix& a) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (m > 12 || n > 12) {
    fail(ErrorKind::kScale,
         "support enumeration is limited to 12x12 games; supply an "
         "equilibrium profile for larger instances");
  }
  const auto& e = a.entries();
  std::vector<Vector> xs;
  std::vector<Vector> ys;
  bool full = false;
  for (Index k = std::min(m, n); k >= 1 && !full; --k) {
    std::vector<Index> cols(k);
    for (Index i = 0; i < k; ++i) cols[i] = i;
    for (bool cdone = false; !cdone; next_subset(cols, n, cdone)) {
      std::vector<Index> rows(k);
      for (Index i = 0; i < k; ++i) rows[i] = i;
      for (bool rdone = false; !rdone; next_subset(rows, m, rdone)) {
        Eigen::MatrixXd sub(k, k);
        for (Index r = 0; r < k; ++r) {
          for (Index c = 0; c < k; ++c) sub(r, c) = e(rows[r], cols[c]);
        }
        Vector zx, zy;
        if (!solve_bordered(sub, zx)) continue;
        if (!solve_bordered(sub.transpose(), zy)) continue;
        Vector x = Vector::Zero(n);
        Vector y = Vector::Zero(m);
        for (Index i = 0; i < k; ++i) {
          x[cols[i]] = zx[i];
          y[rows[i]] = zy[i];
        }
        if (!clean_distribution(x) || !clean_distribution(y)) continue;
        if (duality_gap(a, x, y) > kNeTol) continue;
        add_distinct(xs, x);
        add_distinct(ys, y);
        if (k == m && k == n) full = true;
      }
    }
  }
  if (xs.empty() || ys.empty()) {
    fail(ErrorKind::kDegenerate,
         "no support pair yields a verified equilibrium; perturb the payoff "
         "matrix slightly and retry");
  }
  Vector xbar = Vector::Zero(n);
  Vector ybar = Vector::Zero(m);
  for (const auto& v : xs) xbar += v;
  for (const auto& v : ys) ybar += v;
  xbar /= static_cast<double>(xs.size());
  ybar /= static_cast<double>(ys.size());
  return make_profile(a, MixedStrategy(xbar), MixedStrategy(ybar), kNeTol);
}

double delta_margin(const PayoffMatrix& a, const EquilibriumProfile& p) {
  const Vector& x = p.x_star.probs();
  const Vector& y = p.y_star.probs();
  check_dims(a, x.size(), y.size());
  double delta = std::numeric_limits<double>::infinity();
  for (Index i : p.support_x) delta = std::min(delta, x[i]);
  for (Index j : p.support_y) delta = std::min(delta, y[j]);
  const double norm = a.spectral_norm();
  if (norm == 0.0) return delta;
  const Vector aty = a.entries().transpose() * y;
  const Vector ax = a.entries() * x;
  for (Index i = 0; i < a.cols(); ++i) {
    if (x[i] > 0.0) continue;
    delta = std::min(delta, (aty[i] - p.nu_star) / norm);
  }
  for (Index j = 0; j < a.rows(); ++j) {
    if (y[j] > 0.0) continue;
    delta = std::min(delta, (p.nu_star - ax[j]) / norm);
  }
  return std::max(delta, 0.0);
}

PayoffMatrix generate_game(const GameSpec& spec) {
  if (spec.distribution == Distribution::kExplicit) {
    if (!spec.explicit_entries) {
      fail(ErrorKind::kConfig, "explicit game spec without entries");
    }
    const auto& ent = *spec.explicit_entries;
    if (ent.rows() != spec.m || ent.cols() != spec.n) {
      fail(ErrorKind::kConfig, "explicit entries do not match m x n");
    }
    return PayoffMatrix(ent);
  }
  if (spec.m < 1 || spec.n < 1) {
    fail(ErrorKind::kConfig, "game dimensions must be positive");
  }
  Sampler s(spec.distribution, spec.seed);
  RowMatrix out(spec.m, spec.n);
  for (Index r = 0; r < spec.m; ++r) {
    for (Index c = 0; c < spec.n; ++c) out(r, c) = s.next();
  }
  return PayoffMatrix(std::move(out));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_matrix(const PayoffMatrix& a) {
  std::string out =
      std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index c = 0; c < a.cols(); ++c) {
      if (c) out += ' ';
      out += format_double(a.entries()(r, c));
    }
    out += '\n';
  }
  return out;
}

PayoffMatrix parse_matrix(const std::string& text) {
  std::istringstream in(text);
  long long m = 0, n = 0;
  if (!(in >> m >> n) || m < 1 || n < 1) {
    fail(ErrorKind::kIo, "matrix text: bad \"m n\" header");
  }
  RowMatrix out(m, n);
  for (long long r = 0; r < m; ++r) {
    for (long long c = 0; c < n; ++c) {
      std::string tok;
      if (!(in >> tok)) fail(ErrorKind::kIo, "matrix text: too few values");
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        fail(ErrorKind::kIo, "matrix text: bad value '" + tok + "'");
      }
      out(r, c) = v;
    }
  }
  std::string extra;
  if (in >> extra) fail(ErrorKind::kIo, "matrix text: trailing values");
  return PayoffMatrix(std::move(out));
}

PayoffMatrix read_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::kIo, "cannot open matrix file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_matrix(ss.str());
}

void write_matrix_file(const std::string& path, const PayoffMatrix& a) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::kIo, "cannot write matrix file " + path);
  f << format_matrix(a);
  if (!f) fail(ErrorKind::kIo, "write failed for " + path);
}

std::string game_spec_to_json(const GameSpec& spec) {
  nlohmann::ordered_json j;
  j["m"] = spec.m;
  j["n"] = spec.n;
  j["distribution"] = to_string(spec.distribution);
  j["seed"] = spec.seed;
  if (spec.explicit_entries) {
    auto rows = nlohmann::json::array();
    for (Index r = 0; r < spec.m; ++r) {
      auto row = nlohmann::json::array();
      for (Index c = 0; c < spec.n; ++c) {
        row.push_back((*spec.explicit_entries)(r, c));
      }
      rows.push_back(row);
    }
    j["entries"] = rows;
  }
  return j.dump();
}

GameSpec game_spec_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::kConfig, std::string("game spec JSON: ") + ex.what());
  }
  GameSpec s;
  try {
    s.distribution =
        distribution_from_string(j.value("distribution", "uniform01"));
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("entries")) {
      const auto& rows = j.at("entries");
      const Index m = static_cast<Index>(rows.size());
      const Index n = m ? static_cast<Index>(rows.at(0).size()) : 0;
      RowMatrix e(m, n);
      for (Index r = 0; r < m; ++r) {
        if (static_cast<Index>(rows.at(r).size()) != n) {
          fail(ErrorKind::kConfig, "game spec JSON: ragged entries");
        }
        for (Index c = 0; c < n; ++c) e(r, c) = rows.at(r).at(c).get<double>();
      }
      s.explicit_entries = std::move(e);
      s.m = m;
      s.n = n;
    }
    s.m = j.value("m", s.m);
    s.n = j.value("n", s.n);
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::kConfig, std::string("game spec JSON: ") + ex.what());
  }
  if (s.m < 1 || s.n < 1) fail(ErrorKind::kConfig, "game spec: m, n >= 1");
  return s;
}

PayoffMatrix rock_paper_scissors() {
  RowMatrix e(3, 3);
  e << 0, -1, 1, 1, 0, -1, -1, 1, 0;
  return PayoffMatrix(std::move(e));
}

PayoffMatrix matching_pennies() {
  RowMatrix e(2, 2);
  e << 1, -1, -1, 1;
  return PayoffMatrix(std::move(e));
}

PayoffMatrix noninterior_3x3() {
  RowMatrix e(3, 3);
  e << 1.6243453636632417, -1.0729686221561705, 1.74481176421648,
      -0.6117564136500754, 0.8654076293246785, -0.7612069008951028,
      -0.5281717522634557, -2.3015386968802827, 0.31903909605709857;
  return PayoffMatrix(std::move(e));
}

}  // namespace altgda
