#pragma once

#include <map>
#include <string>
#include <vector>

#include "altgda/dynamics.hpp"

namespace altgda {

struct PepSpec {
  Algorithm algorithm = Algorithm::kAltGda;
  int T = 1;
  double eta = 1.0;
};

// Index sets run over I_T = {-1, 0, 1, ..., T}; vectors live in R^{2T+6}.
struct SelectionBasis {
  int T = 0;
  int ambient_dim = 0;
  std::map<int, Vector> x_tilde;
  std::map<int, Vector> y_tilde;
  std::map<int, Vector> g_x;
  std::map<int, Vector> g_y;
  std::map<int, Vector> q_bar;
  std::map<int, Vector> p_bar;
};

SelectionBasis build_selection_basis(const PepSpec& spec);

struct SymEntry {
  int i = 0;  // 0-based, i <= j
  int j = 0;
  double value = 0.0;
};

// Symmetric coefficient matrix stored as its upper triangle.
struct SparseSym {
  std::vector<SymEntry> entries;
  double trace_with(const Eigen::MatrixXd& g) const;
};

struct GramPair {
  SparseSym x;
  SparseSym y;
  double evaluate(const Eigen::MatrixXd& gx, const Eigen::MatrixXd& gy) const;
};

struct LinearConstraint {
  std::string family;  // interpolation_x, interpolation_y, radius_x, radius_y, coupling
  GramPair coeff;
  double rhs = 0.0;
};

// Matrix-valued linear map; entry (a, b), a <= b, is coeff.evaluate(G).
struct PsdMap {
  std::string name;
  int order = 0;
  std::vector<std::pair<std::pair<int, int>, GramPair>> entries;
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& gx,
                           const Eigen::MatrixXd& gy) const;
};

struct SdpInstance {
  PepSpec spec;
  int gram_order = 0;
  std::vector<LinearConstraint> ineq;  // coeff(G) <= rhs
  std::vector<LinearConstraint> eq;    // coeff(G) == rhs
  std::vector<PsdMap> psd_maps;
  GramPair objective;  // maximize
  std::size_t count(const std::string& family) const;
};

SdpInstance assemble_pep_sdp(const PepSpec& spec);

struct SdpSolution {
  Eigen::MatrixXd gram_x;
  Eigen::MatrixXd gram_y;
  double objective_value = 0.0;
  double max_eq_residual = 0.0;
  double max_ineq_violation = 0.0;
  double min_eigenvalue = 0.0;
  bool accepted = false;
};

struct VerifyTolerances {
  double eigenvalue = 1e-6;
  double equality = 1e-6;
  double inequality = 1e-6;
};

// Recomputes objective, residuals and PSD-block eigenvalues from the Grams.
SdpSolution verify_certificate(const SdpInstance& inst, SdpSolution sol,
                               const VerifyTolerances& tol = {});

// --- SDPA sparse format --------------------------------------------------

struct SdpaEntry {
  int matno = 0;  // 0 = objective
  int block = 1;  // 1-based
  int i = 1;      // 1-based, i <= j
  int j = 1;
  double value = 0.0;
};

// Primal form solved by CSDP-style solvers: max tr(C X) s.t. tr(A_k X) = b_k,
// X block-diagonal PSD (negative block size = diagonal block).
struct SdpaProblem {
  std::vector<int> block_sizes;
  std::vector<double> b;
  std::vector<SdpaEntry> entries;
};

std::string format_sdpa(const SdpaProblem& p);
SdpaProblem parse_sdpa(const std::string& text);
void write_sdpa(const std::string& path, const SdpaProblem& p);
SdpaProblem read_sdpa(const std::string& path);

struct SdpaEncoding {
  SdpaProblem problem;
  std::string manifest_json;  // {algorithm, T, eta, block_map, constraint_map, objective_sign}
};

// Blocks: 1 = G_x, 2 = G_y, 3.. = one slack block per PSD map, last = diagonal
// slack block for the inequalities.
SdpaEncoding encode_sdpa(const SdpInstance& inst);

// Writes <path> and <path>.manifest.json.
void export_sdpa(const SdpInstance& inst, const std::string& path);

// Parses a CSDP-style solution file ("2 b i j v" lines hold X) and returns
// the two Gram blocks.
SdpSolution parse_solution_file(const std::string& text, int gram_order);

struct SolverOptions {
  std::string command;        // "<cmd> problem.dat-s solution"
  int timeout_seconds = 600;
  std::string scratch_root;   // default: system temp directory
  VerifyTolerances tolerances;
  bool keep_scratch = false;
};

// Resolves the solver command: PEP_SDP_SOLVER, then `configured`.
std::string resolve_solver_command(const std::string& configured);

SdpSolution solve_pep(const PepSpec& spec, const SolverOptions& opts);
double pep_value(const PepSpec& spec, const SolverOptions& opts);

// Exact Grams of a concrete AltGDA/SimGDA run on a game with ||A|| <= 1; the
// comparators are best responses to the averages, so the objective equals
// the duality gap of the averaged iterates.
SdpSolution planted_solution(const PepSpec& spec, const PayoffMatrix& a,
                             const MixedStrategy& x0, const MixedStrategy& y0);

struct ReconstructedInstance {
  Eigen::MatrixXd A;  // r_y x r_x
  std::map<int, Vector> x;   // x_{-1} (comparator), x_0..x_T
  std::map<int, Vector> y;
  std::map<int, Vector> q;   // A^T y_i
  std::map<int, Vector> p;   // A x_i
  std::vector<Vector> replay_x;
  std::vector<Vector> replay_y;
  double max_iterate_error = 0.0;
  double replay_objective = 0.0;
  double objective_error = 0.0;
};

ReconstructedInstance reconstruct_worst_case(const PepSpec& spec,
                                             const SdpSolution& solution);

// Euclidean projection of z onto conv{points} (Wolfe's min-norm point).
Vector project_onto_hull(const std::vector<Vector>& points, VectorRef z);

}  // namespace altgda
