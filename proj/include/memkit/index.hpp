#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "memkit/nodal.hpp"
#include "memkit/topology.hpp"

namespace memkit {

inline constexpr double kDefaultRankTol = 1e-10;
// Tractability index value for "more than two, or assumptions violated".
inline constexpr int kUnresolvedIndex = -1;

// Linearized pencil lambda E - F.
struct Pencil {
  Eigen::MatrixXd E;
  Eigen::MatrixXd F;
};

Pencil linearize(const SemiExplicitDAE& dae, const Eigen::VectorXd& z, double t);

// Numerical rank with singular values below rank_tol * sigma_max treated as zero.
int numerical_rank(const Eigen::MatrixXd& m, double rank_tol);
bool is_nonsingular(const Eigen::MatrixXd& m, double rank_tol);
// sigma_max / sigma_min (infinity for a singular matrix, 1 for an empty one).
double condition_number(const Eigen::MatrixXd& m);

// Orthonormal basis of the numerical kernel (columns).
Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& m, double rank_tol);
// Orthogonal projector onto the numerical kernel of m.
Eigen::MatrixXd nullspace_projector(const Eigen::MatrixXd& m, double rank_tol);
// Oblique projector N (W^T N)^{-1} W^T onto the same kernel, with a random W.
Eigen::MatrixXd oblique_nullspace_projector(const Eigen::MatrixXd& m, double rank_tol, std::uint64_t seed);

enum class ProjectorKind { orthogonal, oblique };

struct ProjectorResiduals {
  double q_idempotence = 0.0;   // |Q^2 - Q| / max(1, |Q|)
  double e_q = 0.0;             // |E Q| / max(1, |E| |Q|)
  double q1_idempotence = 0.0;
  double e1_q1 = 0.0;

  double max() const;
};

struct TractabilityChain {
  Eigen::MatrixXd Q, E1, Q1, F1, E2;
  // 0 (E nonsingular), 1, 2 or kUnresolvedIndex. For unresolved results E2
  // holds the singular matrix.
  int index = kUnresolvedIndex;
  ProjectorResiduals residuals;
};

TractabilityChain tractability_chain(const Pencil& pencil, double rank_tol = kDefaultRankTol,
                                     ProjectorKind kind = ProjectorKind::orthogonal, std::uint64_t seed = 1);

// Nilpotency index by shuffle deflation: row-compress E, differentiate the
// constraint rows, repeat until E is nonsingular. Returns 0 for nonsingular E.
// Throws SingularPencil when det(lambda E - F) vanishes at sampled lambda.
int kronecker_oracle(const Pencil& pencil, double rank_tol = kDefaultRankTol);

// n minus the rank of all constraints met during shuffle deflation: the
// dimension of the consistent initial-value manifold of the pencil.
int dynamic_degrees_of_freedom(const Pencil& pencil, double rank_tol = kDefaultRankTol);

struct IndexOneResult {
  bool index_one = false;
  double condition = 0.0;  // of F22
  std::vector<std::string> warnings;  // violated passivity hypotheses
};

IndexOneResult index_one_test(const SemiExplicitDAE& dae, const Eigen::VectorXd& z, double t,
                              double rank_tol = kDefaultRankTol);

enum class SchurKind { index1, index2 };

// Reduced matrices from the structural index proofs, with incremental device
// matrices taken at z. Throws HypothesisError when a required inverse does not
// exist (zero incremental capacitance, inductance, resistance or memristance).
Eigen::MatrixXd schur_reduced_matrix(const SemiExplicitDAE& dae, const Eigen::VectorXd& z, double t,
                                     SchurKind which, double rank_tol = kDefaultRankTol);

// Projectors used by the index-two reduction: onto ker(A_c A_mc A_u) and onto
// ker(A_c A_mc A_u A_g A_w A_r A_m A_hm A_hw)^T, either from the SVD or from
// the loop and cutset bases of the circuit graph.
Eigen::MatrixXd vcm_kernel_projector(const SemiExplicitDAE& dae, bool from_graph, double rank_tol = kDefaultRankTol);
Eigen::MatrixXd ilm_kernel_projector(const SemiExplicitDAE& dae, bool from_graph, double rank_tol = kDefaultRankTol);

struct EvaluationPoint {
  std::string source;  // "user", "ic" or "zero"
  Eigen::VectorXd z;
  double t = 0.0;
  double residual_norm = 0.0;  // algebraic rows, infinity norm
};

struct AnalysisOptions {
  double rank_tol = kDefaultRankTol;
  bool oracle = false;
  ProjectorKind projector = ProjectorKind::orthogonal;
  std::uint64_t seed = 1;
  std::optional<Eigen::VectorXd> point;  // full z; overrides .ic completion
  double t = 0.0;
};

struct IndexReport {
  DegeneracyReport degeneracy;
  EvaluationPoint point;
  bool index_one = false;
  double f22_condition = 0.0;
  TractabilityChain chain;
  int tractability_index = kUnresolvedIndex;
  std::optional<int> oracle_index;
  std::optional<std::string> oracle_error;
  SchurKind schur_kind = SchurKind::index1;
  Eigen::MatrixXd schur_matrix;
  bool schur_nonsingular = false;
  std::optional<std::string> schur_error;
  // Largest deviation between the graph-built and SVD projectors.
  double structural_projector_deviation = 0.0;
  int dynamic_dof = 0;
  int state_order_sum = 0;
  std::vector<std::string> warnings;
};

// Completes the algebraic variables for the given dynamic state by
// least-squares Gauss-Newton on the algebraic rows.
EvaluationPoint complete_point(const SemiExplicitDAE& dae, const Eigen::VectorXd& x, double t, double rank_tol);

IndexReport analyze(const SemiExplicitDAE& dae, const AnalysisOptions& options = {});

// "label value" lines, one per variable; unspecified variables are zero.
Eigen::VectorXd parse_point(const SemiExplicitDAE& dae, std::string_view text);

}  // namespace memkit
