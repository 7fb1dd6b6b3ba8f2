#pragma once

#include <memory>
#include <vector>

#include "mtd/formulation.hpp"
#include "mtd/types.hpp"

namespace mtd {

// Newton system of the interior point method in the original ordering (x1, x2, y1, y2):
//
//   [ -D1   0    A11'  A21' ]
//   [  0   -D2   A12'  A22' ]
//   [ A11  A12   D3    0    ]
//   [ A21  A22   0     D4   ]
//
// with D4 = diag(D41, D42) split conformally with A22 = [0; I].
struct KKTSystem {
  const BlockLP* lp = nullptr;
  Vector d1, d2, d3, d4;

  Index order() const { return lp->num_cols() + lp->num_rows(); }
  // Throws unless the diagonals have the right sizes and strictly positive entries.
  void check() const;
};

// M times v for the system above, without forming M.
Vector kkt_multiply(const KKTSystem& sys, const Vector& v);

// Symmetric permutation from the original ordering to (x1, y1, x2, y2), which gathers every
// voxelwise component into the bottom-right quadrant.
struct KKTPermutation {
  // rearranged[k] is the original position of rearranged entry k.
  std::vector<Index> rearranged;
  // Order of the top-left quadrant, n1 + m1.
  Index top_left = 0;

  Vector to_rearranged(const Vector& original) const;
  Vector to_original(const Vector& rearranged_vec) const;
  std::vector<Index> inverse() const;
};

KKTPermutation rearrange_kkt(const KKTSystem& sys);

// Explicit inverse of the voxelwise quadrant
//
//   Q = [ -D2   0    I   ]
//       [  0    D41  0   ]
//       [  I    0    D42 ]
//
// ordered (x2, y21, y22). Every eta component couples with exactly one excess row, so the inverse
// has the same pattern and is applied with elementwise scalings.
class VoxelQuadrantInverse {
 public:
  VoxelQuadrantInverse(const Vector& d2, const Vector& d41, const Vector& d42);

  Index size() const { return 2 * e11_.size() + inv_d41_.size(); }
  Vector apply(const Vector& r) const;

  const Vector& e11() const { return e11_; }  // x2 / x2 block
  const Vector& e13() const { return e13_; }  // x2 / y22 block (symmetric)
  const Vector& e33() const { return e33_; }  // y22 / y22 block
  const Vector& inv_d41() const { return inv_d41_; }

 private:
  Vector e11_, e13_, e33_, inv_d41_;
};

struct SchurOptions {
  // Up to this order the quasidefinite Schur complement is factored densely through two
  // Cholesky factorizations, with a pivoted LU when one breaks down; above it by a sparse LDL'.
  Index dense_limit = 5000;
  // Added to both diagonal blocks when the first factorization fails.
  double fallback_regularization = 1e-8;
};

// Solves the Newton system by eliminating the voxelwise quadrant:
//   S = M11 - C Q^-1 C',   u1 = S^-1 (r1 - C Q^-1 r2),   u2 = Q^-1 (r2 - C' u1)
// where M11 is the (x1, y1) quadrant and C the coupling block [0 A21'; A12 0].
class SchurSolver {
 public:
  explicit SchurSolver(const BlockLP& lp, SchurOptions options = {});
  ~SchurSolver();
  SchurSolver(SchurSolver&&) noexcept;
  SchurSolver& operator=(SchurSolver&&) noexcept;

  // Assembles and factorizes S for the given diagonals.
  void factorize(const KKTSystem& sys);
  // Solves with the last factorization; rhs and result use the original ordering.
  Vector solve(const Vector& rhs) const;

  Index order() const;
  bool is_dense() const;
  // True when the last factorization needed a pivoted LU or the regularized fallback.
  bool used_fallback() const;
  // Dense copy of the assembled Schur complement (lower triangle mirrored), for diagnostics.
  Matrix schur_complement() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Convenience wrapper: factorize and solve once.
Vector schur_solve(const KKTSystem& sys, const Vector& rhs, SchurOptions options = {});

}  // namespace mtd
