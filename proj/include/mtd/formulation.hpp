#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mtd/criteria.hpp"
#include "mtd/dmlc.hpp"
#include "mtd/phantom.hpp"
#include "mtd/types.hpp"

namespace mtd {

// Nonnegative weights on the unit simplex, one per objective.
class WeightVector {
 public:
  WeightVector() = default;
  // Throws unless every entry is >= 0 and the entries sum to one within 1e-9.
  explicit WeightVector(std::vector<double> values);
  // Scales nonnegative values onto the simplex.
  static WeightVector normalized(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

enum class VariableKind { kLeftTime, kRightTime, kBeamOn, kXi, kAlpha, kEta };

struct VariableInfo {
  VariableKind kind = VariableKind::kLeftTime;
  int beam = -1;
  int leaf = -1;
  int bixel = -1;
  int criterion = -1;
  Index voxel = -1;
};

enum class RowKind {
  kDeliverability,   // one of the sliding-window rows; see `deliverability`
  kUpperTail,        // xi - alpha - (1/v) sum w eta >= 0
  kLowerTail,        // alpha - (1/(1-v)) sum w eta - xi >= 0
  kUpperAverage,     // xi - sum w d >= 0
  kLowerAverage,     // sum w d - xi >= 0
  kMaxDose,          // xi - d_i >= 0
  kMinDose,          // d_i - xi >= 0
  kUpperTailExcess,  // eta_i - d_i + alpha >= 0
  kLowerTailExcess,  // eta_i + d_i - alpha >= 0
  kGeneric,
};

struct RowInfo {
  RowKind kind = RowKind::kGeneric;
  DeliverabilityRow deliverability;
  int criterion = -1;
  Index voxel = -1;
};

// Columns belonging to one criterion.
struct CriterionColumns {
  Index xi = -1;
  Index alpha = -1;       // dose-at-volume types only
  Index eta_begin = -1;   // dose-at-volume types only, range into the full column space
  Index eta_end = -1;
};

// minimize c'x subject to A x >= b, lower <= x <= upper, with A partitioned by voxelwise
// dependence:
//
//   columns: x1 (n1: trajectory times, xi, alpha) | x2 (n2: eta)
//   rows:    y1 (m1: non-voxelwise rows) | y2 (m2 = m21 + n2: max/min dose rows, then one
//            tail-excess row per eta column, in column order)
//
// so that A22 = [0; I].
struct BlockLP {
  Index n1 = 0;
  Index n2 = 0;
  Index m1 = 0;
  Index m21 = 0;

  SparseMatrix a11, a12, a21, a22;
  Vector cost;
  Vector rhs;
  Vector lower;
  Vector upper;

  std::vector<VariableInfo> columns;
  std::vector<RowInfo> rows;

  // Empty for LPs not built from a case.
  std::vector<CriterionColumns> criterion_columns;
  std::vector<double> weights;
  Index num_bixels = 0;
  int num_beams = 0;

  Index num_cols() const { return n1 + n2; }
  Index m2() const { return m21 + n2; }
  Index num_rows() const { return m1 + m2(); }

  // Splits a full constraint matrix into the four blocks. Throws when A22 is not [0; I].
  static BlockLP from_matrix(const SparseMatrix& a, Index n1, Index m1, Index m21, Vector cost,
                             Vector rhs, Vector lower, Vector upper);
  SparseMatrix full_matrix() const;
};

Vector multiply(const BlockLP& lp, const Vector& x);
Vector multiply_transpose(const BlockLP& lp, const Vector& y);

// Weighted-sum instance over (l, r, T, xi, alpha, eta) with the dose substituted out.
BlockLP build_weighted_instance(const Phantom& phantom, const MachineModel& machine,
                                const DoseInfluence& influence,
                                const std::vector<Criterion>& criteria, const WeightVector& weights);

struct PartitionReport {
  Index n1 = 0, n2 = 0, m1 = 0, m21 = 0, m22 = 0;
  Index nnz_a11 = 0, nnz_a12 = 0, nnz_a21 = 0, nnz_a22 = 0;
  Index num_bixels = 0;
  // Order of the Schur complement the solver factorizes.
  Index top_left_order() const { return n1 + m1; }
  Index voxelwise_order() const { return n2 + m21 + m22; }
};

// Verifies A22 = [0; I] bit-exactly and that no other block carries voxelwise components;
// throws an internal error on violation.
PartitionReport partition_report(const BlockLP& lp);

// c'x, i.e. the weighted sum of the signed auxiliary variables.
double scalarized_objective_value(const BlockLP& lp, const Vector& x);

// LP exchange format; see docs/formats.md.
void write_lp_triplets(const BlockLP& lp, std::ostream& out);
BlockLP read_lp_triplets(std::istream& in);

}  // namespace mtd
