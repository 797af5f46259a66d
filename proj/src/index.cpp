#include "memkit/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "memkit/error.hpp"

namespace memkit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::size_t sz(int k) { return static_cast<std::size_t>(k); }

int rank_from(const VectorXd& s, double rank_tol) {
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > rank_tol * s(0)) ++r;
  return r;
}

double rel(double num, double den) { return num / std::max(1.0, den); }

}  // namespace

Pencil linearize(const SemiExplicitDAE& dae, const VectorXd& z, double t) {
  return Pencil{dae.E(), dae.jacobian(z, t).F};
}

int numerical_rank(const MatrixXd& m, double rank_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return rank_from(svd.singularValues(), rank_tol);
}

bool is_nonsingular(const MatrixXd& m, double rank_tol) {
  return m.rows() == m.cols() && numerical_rank(m, rank_tol) == m.rows();
}

double condition_number(const MatrixXd& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const VectorXd& s = svd.singularValues();
  double smin = s(s.size() - 1);
  if (m.rows() != m.cols() || smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

MatrixXd kernel_basis(const MatrixXd& m, double rank_tol) {
  if (m.cols() == 0) return MatrixXd::Zero(0, 0);
  if (m.rows() == 0) return MatrixXd::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullV);
  int r = rank_from(svd.singularValues(), rank_tol);
  return svd.matrixV().rightCols(m.cols() - r);
}

MatrixXd nullspace_projector(const MatrixXd& m, double rank_tol) {
  MatrixXd n = kernel_basis(m, rank_tol);
  return n * n.transpose();
}

MatrixXd oblique_nullspace_projector(const MatrixXd& m, double rank_tol, std::uint64_t seed) {
  MatrixXd n = kernel_basis(m, rank_tol);
  if (n.cols() == 0) return MatrixXd::Zero(m.cols(), m.cols());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 16; ++attempt) {
    MatrixXd w = n;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) += normal(rng);
    MatrixXd wn = w.transpose() * n;
    if (condition_number(wn) < 1e6) return n * wn.inverse() * w.transpose();
  }
  return n * n.transpose();
}

double ProjectorResiduals::max() const { return std::max({q_idempotence, e_q, q1_idempotence, e1_q1}); }

TractabilityChain tractability_chain(const Pencil& pencil, double rank_tol, ProjectorKind kind, std::uint64_t seed) {
  const MatrixXd& E = pencil.E;
  const MatrixXd& F = pencil.F;
  const Eigen::Index n = E.rows();
  auto projector = [&](const MatrixXd& m, std::uint64_t s) {
    return kind == ProjectorKind::orthogonal ? nullspace_projector(m, rank_tol)
                                             : oblique_nullspace_projector(m, rank_tol, s);
  };
  auto check = [](const MatrixXd& q, const MatrixXd& m, double& idem, double& mq) {
    idem = rel((q * q - q).norm(), q.norm());
    mq = rel((m * q).norm(), m.norm() * q.norm());
  };

  TractabilityChain c;
  c.Q = projector(E, seed);
  c.E1 = E - F * c.Q;
  check(c.Q, E, c.residuals.q_idempotence, c.residuals.e_q);
  if (is_nonsingular(E, rank_tol)) {
    c.index = 0;
    return c;
  }
  if (is_nonsingular(c.E1, rank_tol)) {
    c.index = 1;
    return c;
  }
  c.Q1 = projector(c.E1, seed + 1);
  c.F1 = F * (MatrixXd::Identity(n, n) - c.Q);
  c.E2 = c.E1 - c.F1 * c.Q1;
  check(c.Q1, c.E1, c.residuals.q1_idempotence, c.residuals.e1_q1);
  c.index = is_nonsingular(c.E2, rank_tol) ? 2 : kUnresolvedIndex;
  return c;
}

namespace {

void require_regular(const Pencil& p, double rank_tol) {
  const double samples[] = {0.7390851332, -1.3247179572, 2.9135538603};
  for (double lambda : samples)
    if (is_nonsingular(lambda * p.E - p.F, rank_tol)) return;
  throw SingularPencil("det(lambda E - F) vanishes identically: singular pencil");
}

// Shuffle deflation; returns the index and collects the constraint rows.
int shuffle(const Pencil& p, double rank_tol, MatrixXd* constraints) {
  require_regular(p, rank_tol);
  const Eigen::Index n = p.E.rows();
  MatrixXd E = p.E;
  MatrixXd F = p.F;
  std::vector<VectorXd> rows;
  for (int k = 0; k <= n; ++k) {
    Eigen::JacobiSVD<MatrixXd> svd(E, Eigen::ComputeFullU);
    int r = rank_from(svd.singularValues(), rank_tol);
    if (r == n) {
      if (constraints) {
        *constraints = MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), n);
        for (std::size_t j = 0; j < rows.size(); ++j) constraints->row(static_cast<Eigen::Index>(j)) = rows[j];
      }
      return k;
    }
    MatrixXd ut = svd.matrixU().transpose();
    E = ut * E;
    F = ut * F;
    // rows r.. of E vanish: 0 = F_row z; differentiate
    for (Eigen::Index j = r; j < n; ++j) {
      rows.push_back(F.row(j).transpose());
      E.row(j) = F.row(j);
      F.row(j).setZero();
    }
  }
  throw SingularPencil("shuffle deflation did not terminate");
}

}  // namespace

int kronecker_oracle(const Pencil& pencil, double rank_tol) { return shuffle(pencil, rank_tol, nullptr); }

int dynamic_degrees_of_freedom(const Pencil& pencil, double rank_tol) {
  MatrixXd c;
  shuffle(pencil, rank_tol, &c);
  return static_cast<int>(pencil.E.rows()) - numerical_rank(c, rank_tol);
}

IndexOneResult index_one_test(const SemiExplicitDAE& dae, const VectorXd& z, double t, double rank_tol) {
  IndexOneResult r;
  MatrixXd f22 = dae.jacobian(z, t).F22;
  r.index_one = is_nonsingular(f22, rank_tol);
  r.condition = condition_number(f22);
  for (int j = 0; j < dae.circuit().branch_count(); ++j) {
    const DeviceSpec& dev = dae.circuit().branches()[sz(j)].device;
    if (is_source(dev.cls)) continue;
    for (std::string& w : passivity_warnings(dev, dae.branch_point(z, t, j))) r.warnings.push_back(std::move(w));
  }
  return r;
}

namespace {

// Incremental device values at z, one per branch (0 for sources).
std::vector<double> incremental_values(const SemiExplicitDAE& dae, const VectorXd& z, double t) {
  std::vector<double> out(sz(dae.circuit().branch_count()), 0.0);
  for (int j = 0; j < dae.circuit().branch_count(); ++j) {
    const DeviceSpec& dev = dae.circuit().branches()[sz(j)].device;
    if (is_source(dev.cls)) continue;
    out[sz(j)] = incremental_matrix(dev.cls, *dev.characteristic, dae.branch_point(z, t, j));
  }
  return out;
}

std::vector<int> branches_of(const SemiExplicitDAE& dae, std::initializer_list<DeviceClass> classes) {
  std::vector<int> out;
  for (DeviceClass cls : classes) {
    auto it = dae.incidence().column_partition.find(cls);
    if (it != dae.incidence().column_partition.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

MatrixXd columns_of(const SemiExplicitDAE& dae, const std::vector<int>& branches) {
  MatrixXd a(dae.incidence().matrix.rows(), static_cast<Eigen::Index>(branches.size()));
  for (std::size_t k = 0; k < branches.size(); ++k)
    a.col(static_cast<Eigen::Index>(k)) = dae.incidence().matrix.col(branches[k]).cast<double>();
  return a;
}

// sum_k a_k w_k a_k^T over the given branches
MatrixXd weighted_gram(const SemiExplicitDAE& dae, const std::vector<int>& branches, const std::vector<double>& w,
                       bool invert, double rank_tol) {
  const Eigen::Index rows = dae.incidence().matrix.rows();
  MatrixXd s = MatrixXd::Zero(rows, rows);
  for (int j : branches) {
    double x = w[sz(j)];
    if (invert) {
      if (std::abs(x) <= rank_tol)
        throw HypothesisError("incremental matrix of " + dae.circuit().branches()[sz(j)].device.name +
                              " is singular");
      x = 1.0 / x;
    }
    VectorXd a = dae.incidence().matrix.col(j).cast<double>();
    s += x * a * a.transpose();
  }
  return s;
}

void require_nonsingular(const SemiExplicitDAE& dae, const std::vector<int>& branches, const std::vector<double>& w,
                         double rank_tol) {
  for (int j : branches)
    if (std::abs(w[sz(j)]) <= rank_tol)
      throw HypothesisError("incremental matrix of " + dae.circuit().branches()[sz(j)].device.name + " is singular");
}

MatrixXd orthogonal_projector_onto(const MatrixXd& basis) {
  if (basis.cols() == 0) return MatrixXd::Zero(basis.rows(), basis.rows());
  return basis * (basis.transpose() * basis).inverse() * basis.transpose();
}

}  // namespace

MatrixXd vcm_kernel_projector(const SemiExplicitDAE& dae, bool from_graph, double rank_tol) {
  if (from_graph) return orthogonal_projector_onto(vcm_loop_basis(dae.circuit()));
  using DC = DeviceClass;
  return nullspace_projector(
      columns_of(dae, branches_of(dae, {DC::capacitor, DC::memcapacitor, DC::voltage_source})), rank_tol);
}

MatrixXd ilm_kernel_projector(const SemiExplicitDAE& dae, bool from_graph, double rank_tol) {
  if (from_graph) return orthogonal_projector_onto(ilm_cut_basis(dae.circuit()));
  using DC = DeviceClass;
  MatrixXd a = columns_of(dae, branches_of(dae, {DC::capacitor, DC::memcapacitor, DC::voltage_source, DC::conductor,
                                                 DC::phi_memristor, DC::resistor, DC::q_memristor, DC::hybrid_m,
                                                 DC::hybrid_w}));
  return nullspace_projector(a.transpose(), rank_tol);
}

MatrixXd schur_reduced_matrix(const SemiExplicitDAE& dae, const VectorXd& z, double t, SchurKind which,
                              double rank_tol) {
  using DC = DeviceClass;
  std::vector<double> w = incremental_values(dae, z, t);
  const std::vector<int> c3 = branches_of(dae, {DC::capacitor, DC::memcapacitor});
  const std::vector<int> u = branches_of(dae, {DC::voltage_source});
  const std::vector<int> l2 = branches_of(dae, {DC::inductor, DC::meminductor});
  require_nonsingular(dae, c3, w, rank_tol);
  require_nonsingular(dae, l2, w, rank_tol);

  MatrixXd s = weighted_gram(dae, branches_of(dae, {DC::conductor, DC::phi_memristor, DC::hybrid_w}), w, false, rank_tol) +
               weighted_gram(dae, branches_of(dae, {DC::resistor, DC::q_memristor, DC::hybrid_m}), w, true, rank_tol);
  const Eigen::Index nr = s.rows();

  if (which == SchurKind::index1) {
    std::vector<int> vcm = c3;
    vcm.insert(vcm.end(), u.begin(), u.end());
    MatrixXd b = columns_of(dae, vcm);
    const Eigen::Index m = b.cols();
    MatrixXd out = MatrixXd::Zero(nr + m, nr + m);
    out.topLeftCorner(nr, nr) = s;
    out.topRightCorner(nr, m) = b;
    out.bottomLeftCorner(m, nr) = -b.transpose();
    return out;
  }

  MatrixXd qbar = ilm_kernel_projector(dae, false, rank_tol);
  MatrixXd qhat = vcm_kernel_projector(dae, false, rank_tol);
  MatrixXd top = s + weighted_gram(dae, l2, w, true, rank_tol) * qbar;
  MatrixXd a3 = columns_of(dae, c3);
  MatrixXd a4 = columns_of(dae, u);
  const Eigen::Index n3 = a3.cols();
  const Eigen::Index n4 = a4.cols();
  MatrixXd m3a3t = a3.transpose();
  for (Eigen::Index k = 0; k < n3; ++k) m3a3t.row(k) *= w[sz(c3[sz(static_cast<int>(k))])];

  MatrixXd out = MatrixXd::Zero(nr + n3 + n4, nr + n3 + n4);
  out.block(0, 0, nr, nr) = top;
  out.block(0, nr, nr, n3) = a3;
  out.block(0, nr + n3, nr, n4) = a4;
  out.block(nr, 0, n3, nr) = -m3a3t;
  out.block(nr, nr, n3, n3) = qhat.topLeftCorner(n3, n3);
  out.block(nr, nr + n3, n3, n4) = qhat.topRightCorner(n3, n4);
  out.block(nr + n3, 0, n4, nr) = -a4.transpose();
  return out;
}

EvaluationPoint complete_point(const SemiExplicitDAE& dae, const VectorXd& x, double t, double rank_tol) {
  const int nx = dae.dynamic_size();
  const int ny = dae.size() - nx;
  EvaluationPoint p;
  p.t = t;
  p.z = VectorXd::Zero(dae.size());
  p.z.head(nx) = x;
  VectorXd f;
  MatrixXd jac;
  for (int it = 0; it < 50; ++it) {
    dae.evaluate(p.z, t, f, &jac);
    VectorXd g = f.tail(ny);
    if (g.lpNorm<Eigen::Infinity>() <= 1e-13) break;
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(jac.bottomRightCorner(ny, ny));
    cod.setThreshold(rank_tol);
    VectorXd dy = cod.solve(-g);
    p.z.tail(ny) += dy;
    if (dy.lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(1.0, p.z.lpNorm<Eigen::Infinity>())) break;
  }
  p.residual_norm = dae.residual(p.z, t).tail(ny).lpNorm<Eigen::Infinity>();
  return p;
}

IndexReport analyze(const SemiExplicitDAE& dae, const AnalysisOptions& options) {
  IndexReport r;
  r.degeneracy = degeneracy_report(dae.circuit());

  if (options.point) {
    if (options.point->size() != dae.size()) throw std::invalid_argument("evaluation point has the wrong size");
    r.point.source = "user";
    r.point.z = *options.point;
    r.point.t = options.t;
    r.point.residual_norm = dae.residual(r.point.z, r.point.t).tail(dae.size() - dae.dynamic_size()).lpNorm<Eigen::Infinity>();
  } else {
    r.point = complete_point(dae, dae.initial_dynamic_state(), options.t, options.rank_tol);
    r.point.source = dae.circuit().initial_conditions().empty() ? "zero" : "ic";
  }
  const VectorXd& z = r.point.z;
  const double t = r.point.t;

  IndexOneResult one = index_one_test(dae, z, t, options.rank_tol);
  r.index_one = one.index_one;
  r.f22_condition = one.condition;
  r.warnings = std::move(one.warnings);

  Pencil pencil = linearize(dae, z, t);
  r.chain = tractability_chain(pencil, options.rank_tol, options.projector, options.seed);
  r.tractability_index = r.chain.index;

  if (options.oracle) {
    try {
      r.oracle_index = kronecker_oracle(pencil, options.rank_tol);
    } catch (const SingularPencil& e) {
      r.oracle_error = e.what();
    }
  }

  r.schur_kind = r.index_one ? SchurKind::index1 : SchurKind::index2;
  try {
    r.schur_matrix = schur_reduced_matrix(dae, z, t, r.schur_kind, options.rank_tol);
    r.schur_nonsingular = is_nonsingular(r.schur_matrix, options.rank_tol);
  } catch (const HypothesisError& e) {
    r.schur_error = e.what();
    r.warnings.push_back(std::string("structural reduction skipped: ") + e.what());
  }

  r.structural_projector_deviation =
      std::max((vcm_kernel_projector(dae, true, options.rank_tol) - vcm_kernel_projector(dae, false, options.rank_tol))
                   .lpNorm<Eigen::Infinity>(),
               (ilm_kernel_projector(dae, true, options.rank_tol) - ilm_kernel_projector(dae, false, options.rank_tol))
                   .lpNorm<Eigen::Infinity>());

  try {
    r.dynamic_dof = dynamic_degrees_of_freedom(pencil, options.rank_tol);
  } catch (const SingularPencil&) {
    r.dynamic_dof = -1;
  }
  for (const Branch& b : dae.circuit().branches()) r.state_order_sum += classify(b.device.cls).state_order;
  return r;
}

VectorXd parse_point(const SemiExplicitDAE& dae, std::string_view text) {
  VectorXd z = VectorXd::Zero(dae.size());
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string label, value;
    if (!(ls >> label)) continue;
    auto k = dae.layout().index_of(label);
    if (!k) throw ParseError("unknown variable '" + label + "'", lineno, static_cast<int>(line.find(label)) + 1);
    if (!(ls >> value)) throw ParseError("missing value for " + label, lineno, static_cast<int>(line.size()) + 1);
    try {
      std::size_t used = 0;
      z(*k) = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ParseError("bad number '" + value + "'", lineno, static_cast<int>(line.find(value, line.find(label) + label.size())) + 1);
    }
  }
  return z;
}

}  // namespace memkit
