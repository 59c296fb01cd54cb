#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "altgda/error.hpp"

namespace altgda {

using Index = Eigen::Index;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

// Largest singular value of `entries`. Repeated squaring of the smaller Gram
// matrix followed by a Rayleigh quotient; converges for tied spectra too.
double spectral_norm(const RowMatrix& entries);

/// Payoff matrix A of the bilinear game min_x max_y y^T A x, with x in the
/// n-simplex (columns) and y in the m-simplex (rows).
class PayoffMatrix {
 public:
  explicit PayoffMatrix(RowMatrix entries);

  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }
  const RowMatrix& entries() const { return entries_; }
  double spectral_norm() const { return spectral_norm_; }

  PayoffMatrix scaled(double factor) const;

 private:
  RowMatrix entries_;
  double spectral_norm_ = 0.0;
};

/// A point of the probability simplex. Negative dust down to -1e-12 is
/// clamped to zero and the vector renormalized; anything worse throws.
class MixedStrategy {
 public:
  explicit MixedStrategy(Vector probs);

  static MixedStrategy uniform(Index dim);
  static MixedStrategy vertex(Index dim, Index i);

  Index dim() const { return probs_.size(); }
  const Vector& probs() const { return probs_; }
  double operator[](Index i) const { return probs_[i]; }

 private:
  Vector probs_;
};

struct EquilibriumProfile {
  MixedStrategy x_star;
  MixedStrategy y_star;
  double nu_star = 0.0;
  std::vector<Index> support_x;
  std::vector<Index> support_y;
  bool is_interior = false;
  double delta = 0.0;
};

enum class Distribution {
  kUniform01,
  kRandInt,
  kBinary,
  kNormal,
  kLogNormal,
  kExponential,
  kExplicit,
};

const char* to_string(Distribution d);
Distribution distribution_from_string(const std::string& name);

struct GameSpec {
  Index m = 1;
  Index n = 1;
  Distribution distribution = Distribution::kUniform01;
  std::uint64_t seed = 0;
  std::optional<RowMatrix> explicit_entries;
};

// max_j (A x)_j - min_i (A^T y)_i.
double duality_gap(const PayoffMatrix& a, VectorRef x, VectorRef y);
double duality_gap(const PayoffMatrix& a, const MixedStrategy& x,
                   const MixedStrategy& y);

// Exact max-support equilibrium by support enumeration (m, n <= 12).
EquilibriumProfile solve_equilibrium_max_support(const PayoffMatrix& a);

// Builds and verifies a profile from user-supplied strategies (any size).
// Throws kDegenerate if the pair is not an equilibrium within `tol`.
EquilibriumProfile make_profile(const PayoffMatrix& a, const MixedStrategy& x,
                                const MixedStrategy& y, double tol = 1e-9);

double delta_margin(const PayoffMatrix& a, const EquilibriumProfile& profile);

PayoffMatrix generate_game(const GameSpec& spec);

// Plain-text matrix file: "m n" then m rows of n values (17 significant
// digits on write).
PayoffMatrix read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const PayoffMatrix& a);
std::string format_matrix(const PayoffMatrix& a);
PayoffMatrix parse_matrix(const std::string& text);

// GameSpec <-> one JSON object {m, n, distribution, seed[, entries]}.
std::string game_spec_to_json(const GameSpec& spec);
GameSpec game_spec_from_json(const std::string& json_text);

// Reference instances.
PayoffMatrix rock_paper_scissors();
PayoffMatrix matching_pennies();
// 3x3 standard-normal instance without an interior equilibrium
// (max-support NE x* ~ (0, .56, .44), y* ~ (.37, .63, 0)).
PayoffMatrix noninterior_3x3();

// Formats with 17 significant digits.
std::string format_double(double v);

}  // namespace altgda
