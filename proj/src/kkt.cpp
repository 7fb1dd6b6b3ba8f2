#include "mtd/kkt.hpp"

#include <cmath>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "mtd/error.hpp"

namespace mtd {

namespace {

void check_positive(const Vector& d, Index expected, const char* name) {
  if (d.size() != expected) {
    throw_internal(std::string("KKT diagonal ") + name + " has length " + std::to_string(d.size()) +
                   ", expected " + std::to_string(expected));
  }
  for (Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0) || !std::isfinite(d[i])) {
      throw Error(ErrorKind::kSolver,
                  std::string("non-positive complementarity product in ") + name + " at " + std::to_string(i));
    }
  }
}

}  // namespace

void KKTSystem::check() const {
  if (lp == nullptr) throw_internal("KKT system has no LP");
  check_positive(d1, lp->n1, "D1");
  check_positive(d2, lp->n2, "D2");
  check_positive(d3, lp->m1, "D3");
  check_positive(d4, lp->m2(), "D4");
}

Vector kkt_multiply(const KKTSystem& sys, const Vector& v) {
  const BlockLP& lp = *sys.lp;
  const Index n = lp.num_cols();
  const Index m = lp.num_rows();
  if (v.size() != n + m) throw_internal("KKT vector has the wrong length");
  Vector dx(n), dy(m);
  dx << sys.d1, sys.d2;
  dy << sys.d3, sys.d4;
  Vector out(n + m);
  out.head(n) = multiply_transpose(lp, v.tail(m)) - dx.cwiseProduct(v.head(n));
  out.tail(m) = multiply(lp, v.head(n)) + dy.cwiseProduct(v.tail(m));
  return out;
}

Vector KKTPermutation::to_rearranged(const Vector& original) const {
  Vector out(static_cast<Index>(rearranged.size()));
  for (std::size_t k = 0; k < rearranged.size(); ++k) out[static_cast<Index>(k)] = original[rearranged[k]];
  return out;
}

Vector KKTPermutation::to_original(const Vector& rearranged_vec) const {
  Vector out(static_cast<Index>(rearranged.size()));
  for (std::size_t k = 0; k < rearranged.size(); ++k) out[rearranged[k]] = rearranged_vec[static_cast<Index>(k)];
  return out;
}

std::vector<Index> KKTPermutation::inverse() const {
  std::vector<Index> inv(rearranged.size());
  for (std::size_t k = 0; k < rearranged.size(); ++k) inv[static_cast<std::size_t>(rearranged[k])] = static_cast<Index>(k);
  return inv;
}

KKTPermutation rearrange_kkt(const KKTSystem& sys) {
  const BlockLP& lp = *sys.lp;
  const Index n = lp.num_cols();
  KKTPermutation perm;
  perm.rearranged.reserve(static_cast<std::size_t>(sys.order()));
  for (Index j = 0; j < lp.n1; ++j) perm.rearranged.push_back(j);
  for (Index i = 0; i < lp.m1; ++i) perm.rearranged.push_back(n + i);
  for (Index j = lp.n1; j < n; ++j) perm.rearranged.push_back(j);
  for (Index i = lp.m1; i < lp.num_rows(); ++i) perm.rearranged.push_back(n + i);
  perm.top_left = lp.n1 + lp.m1;
  return perm;
}

VoxelQuadrantInverse::VoxelQuadrantInverse(const Vector& d2, const Vector& d41, const Vector& d42) {
  if (d2.size() != d42.size()) throw_internal("voxelwise quadrant blocks are not conformal");
  const Index n2 = d2.size();
  e11_.resize(n2);
  e13_.resize(n2);
  e33_.resize(n2);
  for (Index i = 0; i < n2; ++i) {
    // [[-a, 1], [1, b]]^-1 = [[-b, 1], [1, a]] / (1 + a b)
    const double g = 1.0 + d2[i] * d42[i];
    e11_[i] = -d42[i] / g;
    e13_[i] = 1.0 / g;
    e33_[i] = d2[i] / g;
  }
  inv_d41_ = d41.cwiseInverse();
}

Vector VoxelQuadrantInverse::apply(const Vector& r) const {
  const Index n2 = e11_.size();
  const Index m21 = inv_d41_.size();
  if (r.size() != size()) throw_internal("voxelwise quadrant vector has the wrong length");
  Vector out(r.size());
  const auto rx = r.head(n2);
  const auto rz = r.tail(n2);
  out.head(n2) = e11_.cwiseProduct(rx) + e13_.cwiseProduct(rz);
  out.segment(n2, m21) = inv_d41_.cwiseProduct(r.segment(n2, m21));
  out.tail(n2) = e13_.cwiseProduct(rx) + e33_.cwiseProduct(rz);
  return out;
}

namespace {

using ColSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;

// Calls add(row, col, value) for every lower-triangle contribution to S, in top-left indices
// x1 = [0, n1), y1 = [n1, n1 + m1).
template <typename Add>
void for_each_schur_entry(const KKTSystem& sys, const SparseMatrix& a12t, const VoxelQuadrantInverse& q,
                          double regularization, Add&& add) {
  const BlockLP& lp = *sys.lp;
  const Index n1 = lp.n1;
  for (Index p = 0; p < n1; ++p) add(p, p, -sys.d1[p] - regularization);
  for (Index r = 0; r < lp.m1; ++r) add(n1 + r, n1 + r, sys.d3[r] + regularization);
  for (Index r = 0; r < lp.m1; ++r) {
    for (SparseMatrix::InnerIterator it(lp.a11, r); it; ++it) add(n1 + r, it.col(), it.value());
  }

  // -A21' diag(s) A21 restricted to one row is a scaled outer product of its entries.
  const SparseMatrix& a21 = lp.a21;
  auto outer = [&](Index row, double scale) {
    const Index begin = a21.outerIndexPtr()[row];
    const Index end = a21.outerIndexPtr()[row + 1];
    const double* values = a21.valuePtr();
    const Index* cols = a21.innerIndexPtr();
    for (Index a = begin; a < end; ++a) {
      const double va = scale * values[a];
      for (Index b = begin; b <= a; ++b) add(cols[a], cols[b], -va * values[b]);
    }
  };
  const Index m21 = lp.m21;
  for (Index r = 0; r < m21; ++r) outer(r, q.inv_d41()[r]);
  for (Index i = 0; i < lp.n2; ++i) {
    const Index row = m21 + i;
    outer(row, q.e33()[i]);
    for (SparseMatrix::InnerIterator t(a12t, i); t; ++t) {
      const double scale = q.e13()[i] * t.value();
      for (SparseMatrix::InnerIterator it(a21, row); it; ++it) add(n1 + t.col(), it.col(), -scale * it.value());
      for (SparseMatrix::InnerIterator u(a12t, i); u; ++u) {
        if (u.col() <= t.col()) add(n1 + t.col(), n1 + u.col(), -q.e11()[i] * t.value() * u.value());
      }
    }
  }
}

}  // namespace

struct SchurSolver::Impl {
  const BlockLP* lp = nullptr;
  SchurOptions options;
  SparseMatrix a12t;
  Index order = 0;
  bool dense = true;
  bool fallback = false;
  bool regularized = false;

  std::optional<KKTSystem> sys;
  std::optional<VoxelQuadrantInverse> quadrant;

  // Dense path: S = [[-H, B'], [B, G]] with H and G positive definite. H = L L' and
  // K = G + B H^-1 B' = M M' are factored; K is formed as G + W'W with W = L^-1 B'.
  Matrix factor;
  Matrix coupling;
  Eigen::LLT<Matrix, Eigen::Lower> llt_h;
  Eigen::LLT<Matrix, Eigen::Lower> llt_k;
  // Used when either Cholesky factor breaks down on an ill-conditioned S.
  Eigen::PartialPivLU<Matrix> lu_dense;
  bool use_dense_lu = false;

  ColSparse sparse_lower;
  Eigen::SimplicialLDLT<ColSparse, Eigen::Lower> ldlt;
  Eigen::SparseLU<ColSparse> lu;
  bool use_lu = false;

  bool factor_dense(double regularization) {
    factor.setZero(order, order);
    for_each_schur_entry(*sys, a12t, *quadrant, regularization,
                         [&](Index r, Index c, double v) { factor(r, c) += v; });
    use_dense_lu = false;
    if (order == 0) return true;
    if (cholesky_dense()) return true;
    if (!factor.allFinite()) return false;
    use_dense_lu = true;
    lu_dense.compute(Matrix(factor.selfadjointView<Eigen::Lower>()));
    return lu_dense.matrixLU().allFinite() && lu_dense.matrixLU().diagonal().cwiseAbs().minCoeff() > 0.0;
  }

  bool cholesky_dense() {
    const Index n1 = lp->n1, m1 = lp->m1;
    llt_h.compute(-factor.topLeftCorner(n1, n1));
    if (llt_h.info() != Eigen::Success) return false;
    coupling = factor.bottomLeftCorner(m1, n1);
    Matrix k = factor.bottomRightCorner(m1, m1);
    if (n1 > 0 && m1 > 0) {
      const Matrix w = llt_h.matrixL().solve(coupling.transpose());
      k.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose());
    }
    llt_k.compute(k);
    if (llt_k.info() != Eigen::Success) return false;
    return llt_h.matrixLLT().allFinite() && llt_k.matrixLLT().allFinite();
  }

  bool factor_sparse(double regularization) {
    std::vector<Eigen::Triplet<double, Index>> triplets;
    for_each_schur_entry(*sys, a12t, *quadrant, regularization,
                         [&](Index r, Index c, double v) { triplets.emplace_back(r, c, v); });
    sparse_lower.resize(order, order);
    sparse_lower.setFromTriplets(triplets.begin(), triplets.end());
    use_lu = false;
    ldlt.compute(sparse_lower);
    if (ldlt.info() == Eigen::Success) return true;
    const ColSparse full = sparse_lower.selfadjointView<Eigen::Lower>();
    lu.compute(full);
    use_lu = true;
    return lu.info() == Eigen::Success;
  }

  Vector solve_top_left(const Vector& rhs) const {
    if (dense) {
      const Index n1 = lp->n1, m1 = lp->m1;
      Vector out(order);
      if (order == 0) return out;
      if (use_dense_lu) return lu_dense.solve(rhs);
      const Vector ha = n1 > 0 ? Vector(llt_h.solve(rhs.head(n1))) : Vector();
      Vector w = rhs.tail(m1);
      if (n1 > 0 && m1 > 0) w += coupling * ha;
      if (m1 > 0) w = llt_k.solve(w);
      out.tail(m1) = w;
      if (n1 > 0) {
        Vector t = -rhs.head(n1);
        if (m1 > 0) t += coupling.transpose() * w;
        out.head(n1) = llt_h.solve(t);
      }
      return out;
    }
    return use_lu ? Vector(lu.solve(rhs)) : Vector(ldlt.solve(rhs));
  }
};

SchurSolver::SchurSolver(const BlockLP& lp, SchurOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->lp = &lp;
  impl_->options = options;
  impl_->a12t = lp.a12.transpose();
  impl_->order = lp.n1 + lp.m1;
  impl_->dense = impl_->order <= options.dense_limit;
}

SchurSolver::~SchurSolver() = default;
SchurSolver::SchurSolver(SchurSolver&&) noexcept = default;
SchurSolver& SchurSolver::operator=(SchurSolver&&) noexcept = default;

void SchurSolver::factorize(const KKTSystem& sys) {
  if (sys.lp != impl_->lp) throw_internal("KKT system belongs to a different LP");
  sys.check();
  const BlockLP& lp = *sys.lp;
  impl_->sys = sys;
  impl_->quadrant.emplace(sys.d2, sys.d4.head(lp.m21), sys.d4.tail(lp.n2));
  impl_->fallback = false;
  impl_->regularized = false;
  auto attempt = [&](double reg) { return impl_->dense ? impl_->factor_dense(reg) : impl_->factor_sparse(reg); };
  if (attempt(0.0)) {
    impl_->fallback = impl_->use_dense_lu || impl_->use_lu;
    return;
  }
  impl_->fallback = true;
  impl_->regularized = true;
  if (!attempt(impl_->options.fallback_regularization)) {
    throw Error(ErrorKind::kSolver, "Schur complement factorization failed");
  }
}

Vector SchurSolver::solve(const Vector& rhs) const {
  if (!impl_->sys) throw_internal("SchurSolver::solve called before factorize");
  const BlockLP& lp = *impl_->lp;
  const Index n1 = lp.n1, n2 = lp.n2, m1 = lp.m1, m2 = lp.m2();
  const Index n = n1 + n2;
  if (rhs.size() != n + m1 + m2) throw_internal("KKT right-hand side has the wrong length");
  const VoxelQuadrantInverse& q = *impl_->quadrant;

  Vector r2(n2 + m2);
  r2 << rhs.segment(n1, n2), rhs.tail(m2);
  const Vector t = q.apply(r2);

  Vector r1(n1 + m1);
  r1.head(n1) = rhs.head(n1) - lp.a21.transpose() * t.tail(m2);
  r1.tail(m1) = rhs.segment(n, m1) - lp.a12 * t.head(n2);
  const Vector u1 = impl_->solve_top_left(r1);

  Vector c_u1(n2 + m2);
  c_u1.head(n2) = lp.a12.transpose() * u1.tail(m1);
  c_u1.tail(m2) = lp.a21 * u1.head(n1);
  const Vector u2 = q.apply(r2 - c_u1);

  Vector out(rhs.size());
  out.head(n1) = u1.head(n1);
  out.segment(n1, n2) = u2.head(n2);
  out.segment(n, m1) = u1.tail(m1);
  out.tail(m2) = u2.tail(m2);
  return out;
}

Index SchurSolver::order() const { return impl_->order; }
bool SchurSolver::is_dense() const { return impl_->dense; }
bool SchurSolver::used_fallback() const { return impl_->fallback; }

Matrix SchurSolver::schur_complement() const {
  if (!impl_->sys) throw_internal("SchurSolver::schur_complement called before factorize");
  Matrix s = Matrix::Zero(impl_->order, impl_->order);
  const double reg = impl_->regularized ? impl_->options.fallback_regularization : 0.0;
  for_each_schur_entry(*impl_->sys, impl_->a12t, *impl_->quadrant, reg,
                       [&](Index r, Index c, double v) { s(r, c) += v; });
  return s.selfadjointView<Eigen::Lower>();
}

Vector schur_solve(const KKTSystem& sys, const Vector& rhs, SchurOptions options) {
  SchurSolver solver(*sys.lp, options);
  solver.factorize(sys);
  return solver.solve(rhs);
}

}  // namespace mtd
