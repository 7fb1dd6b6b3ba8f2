#include "mtd/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mtd/error.hpp"
#include "mtd/io.hpp"

namespace mtd {

WeightVector::WeightVector(std::vector<double> values) : values_(std::move(values)) {
  double sum = 0.0;
  for (double w : values_) {
    if (!std::isfinite(w) || w < 0.0) throw_config("weights must be finite and nonnegative");
    sum += w;
  }
  if (values_.empty() || std::abs(sum - 1.0) > 1e-9) {
    throw_config("weights must sum to one (sum is " + format_double(sum) + ")");
  }
}

WeightVector WeightVector::normalized(std::vector<double> values) {
  double sum = 0.0;
  for (double w : values) {
    if (!std::isfinite(w) || w < 0.0) throw_config("weights must be finite and nonnegative");
    sum += w;
  }
  if (!(sum > 0.0)) throw_config("weights must not all be zero");
  for (double& w : values) w /= sum;
  WeightVector out;
  out.values_ = std::move(values);
  return out;
}

namespace {

// Copies the entries of `a` in the given row and column windows into a new matrix.
SparseMatrix extract_block(const SparseMatrix& a, Index row0, Index rows, Index col0, Index cols) {
  std::vector<Triplet> triplets;
  for (Index r = row0; r < row0 + rows; ++r) {
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      if (it.col() >= col0 && it.col() < col0 + cols) {
        triplets.emplace_back(r - row0, it.col() - col0, it.value());
      }
    }
  }
  SparseMatrix block(rows, cols);
  block.setFromTriplets(triplets.begin(), triplets.end());
  return block;
}

void check_a22(const BlockLP& lp) {
  const SparseMatrix& a22 = lp.a22;
  if (a22.rows() != lp.m2() || a22.cols() != lp.n2) {
    throw_internal("A22 has dimensions " + std::to_string(a22.rows()) + "x" +
                   std::to_string(a22.cols()) + ", expected " + std::to_string(lp.m2()) + "x" +
                   std::to_string(lp.n2));
  }
  for (Index r = 0; r < a22.rows(); ++r) {
    Index count = 0;
    for (SparseMatrix::InnerIterator it(a22, r); it; ++it) {
      if (it.value() == 0.0) continue;
      ++count;
      const bool identity_entry = r >= lp.m21 && it.col() == r - lp.m21 && it.value() == 1.0;
      if (!identity_entry) {
        throw_internal("A22 entry (" + std::to_string(r) + "," + std::to_string(it.col()) +
                       ") breaks the [0; I] structure");
      }
    }
    if (r >= lp.m21 && count != 1) {
      throw_internal("A22 row " + std::to_string(r) + " is missing its identity entry");
    }
  }
}

}  // namespace

BlockLP BlockLP::from_matrix(const SparseMatrix& a, Index n1, Index m1, Index m21, Vector cost,
                             Vector rhs, Vector lower, Vector upper) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (n1 < 0 || n1 > n || m1 < 0 || m21 < 0 || m1 + m21 > m) {
    throw_data("invalid block partition sizes");
  }
  BlockLP lp;
  lp.n1 = n1;
  lp.n2 = n - n1;
  lp.m1 = m1;
  lp.m21 = m21;
  if (m != m1 + m21 + lp.n2) {
    throw_data("row count " + std::to_string(m) + " does not equal m1 + m21 + n2");
  }
  if (cost.size() != n || lower.size() != n || upper.size() != n || rhs.size() != m) {
    throw_data("vector lengths do not match the constraint matrix");
  }
  lp.a11 = extract_block(a, 0, m1, 0, n1);
  lp.a12 = extract_block(a, 0, m1, n1, lp.n2);
  lp.a21 = extract_block(a, m1, lp.m2(), 0, n1);
  lp.a22 = extract_block(a, m1, lp.m2(), n1, lp.n2);
  lp.cost = std::move(cost);
  lp.rhs = std::move(rhs);
  lp.lower = std::move(lower);
  lp.upper = std::move(upper);
  for (Index j = 0; j < n; ++j) {
    if (!std::isfinite(lp.lower[j])) throw_data("lower bounds must be finite");
    if (lp.upper[j] < lp.lower[j]) throw_data("upper bound below lower bound in column " + std::to_string(j));
  }
  lp.columns.resize(static_cast<std::size_t>(n));
  for (Index j = n1; j < n; ++j) lp.columns[j].kind = VariableKind::kEta;
  lp.rows.resize(static_cast<std::size_t>(m));
  check_a22(lp);
  return lp;
}

SparseMatrix BlockLP::full_matrix() const {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(a11.nonZeros() + a12.nonZeros() + a21.nonZeros() +
                                            a22.nonZeros()));
  auto add = [&](const SparseMatrix& block, Index row0, Index col0) {
    for (Index r = 0; r < block.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(block, r); it; ++it) {
        triplets.emplace_back(row0 + r, col0 + it.col(), it.value());
      }
    }
  };
  add(a11, 0, 0);
  add(a12, 0, n1);
  add(a21, m1, 0);
  add(a22, m1, n1);
  SparseMatrix full(num_rows(), num_cols());
  full.setFromTriplets(triplets.begin(), triplets.end());
  return full;
}

Vector multiply(const BlockLP& lp, const Vector& x) {
  if (x.size() != lp.num_cols()) throw_data("vector length does not match the LP columns");
  Vector y(lp.num_rows());
  const auto x1 = x.head(lp.n1);
  const auto x2 = x.tail(lp.n2);
  y.head(lp.m1) = lp.a11 * x1 + lp.a12 * x2;
  y.tail(lp.m2()) = lp.a21 * x1;
  y.tail(lp.n2) += x2;
  return y;
}

Vector multiply_transpose(const BlockLP& lp, const Vector& y) {
  if (y.size() != lp.num_rows()) throw_data("vector length does not match the LP rows");
  Vector x(lp.num_cols());
  const auto y1 = y.head(lp.m1);
  const auto y2 = y.tail(lp.m2());
  x.head(lp.n1) = lp.a11.transpose() * y1 + lp.a21.transpose() * y2;
  x.tail(lp.n2) = lp.a12.transpose() * y1 + y.tail(lp.n2);
  return x;
}

namespace {

// Sparse row builder over the full column space, merged on finish.
struct RowBuilder {
  std::vector<std::pair<Index, double>> entries;
  void add(Index col, double value) { entries.emplace_back(col, value); }
};

struct LpAssembly {
  std::vector<Triplet> triplets;
  std::vector<double> rhs;
  std::vector<RowInfo> rows;

  void push(const RowBuilder& row, double bound, RowInfo info) {
    const auto r = static_cast<Index>(rows.size());
    for (const auto& [col, value] : row.entries) triplets.emplace_back(r, col, value);
    rhs.push_back(bound);
    rows.push_back(info);
  }
};

}  // namespace

BlockLP build_weighted_instance(const Phantom& phantom, const MachineModel& machine,
                                const DoseInfluence& influence,
                                const std::vector<Criterion>& criteria, const WeightVector& weights) {
  machine.validate();
  const Index nb = machine.num_bixels();
  if (influence.matrix.cols() != nb || influence.matrix.rows() != phantom.num_voxels()) {
    throw_data("dose influence matrix does not match the phantom and machine");
  }

  std::vector<std::string> problems;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const Criterion& c = criteria[k];
    for (const std::string& p : check_criterion(c)) {
      problems.push_back("criteria[" + std::to_string(k) + "] " + p);
    }
    if (!c.roi.empty() && !phantom.has_roi(c.roi)) {
      problems.push_back("criteria[" + std::to_string(k) + "] references unknown ROI '" + c.roi + "'");
    }
  }
  if (!problems.empty()) {
    std::string message = "inconsistent criteria:";
    for (const std::string& p : problems) message += "\n  " + p;
    throw_config(message);
  }
  const int num_objectives = count_objectives(criteria);
  if (static_cast<int>(weights.size()) != num_objectives) {
    throw_config("weight vector has " + std::to_string(weights.size()) + " entries but the case has " +
                 std::to_string(num_objectives) + " objectives");
  }

  // Column layout.
  const Index left0 = 0;
  const Index right0 = nb;
  const Index beam_on0 = 2 * nb;
  const Index traj_cols = 2 * nb + machine.num_beams;
  Index next_col = traj_cols;

  BlockLP lp;
  lp.criterion_columns.resize(criteria.size());
  for (std::size_t k = 0; k < criteria.size(); ++k) lp.criterion_columns[k].xi = next_col++;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (is_dose_at_volume(criteria[k].type)) lp.criterion_columns[k].alpha = next_col++;
  }
  lp.n1 = next_col;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!is_dose_at_volume(criteria[k].type)) continue;
    const auto size = static_cast<Index>(phantom.roi(criteria[k].roi).voxels.size());
    lp.criterion_columns[k].eta_begin = next_col;
    next_col += size;
    lp.criterion_columns[k].eta_end = next_col;
  }
  lp.n2 = next_col - lp.n1;
  const Index n = next_col;

  lp.columns.resize(static_cast<std::size_t>(n));
  for (int b = 0; b < machine.num_beams; ++b) {
    for (int leaf = 0; leaf < machine.leaf_pairs; ++leaf) {
      for (int j = 0; j < machine.bixels_per_row; ++j) {
        const Index col = machine.bixel_column(b, leaf, j);
        lp.columns[left0 + col] = {VariableKind::kLeftTime, b, leaf, j, -1, -1};
        lp.columns[right0 + col] = {VariableKind::kRightTime, b, leaf, j, -1, -1};
      }
    }
    lp.columns[beam_on0 + b] = {VariableKind::kBeamOn, b, -1, -1, -1, -1};
  }

  lp.cost = Vector::Zero(n);
  lp.lower = Vector::Zero(n);
  lp.upper = Vector::Constant(n, kInfinity);

  const double delta = machine.dose_rate;
  const double tau = machine.transmission;
  const Index per_beam = Index{machine.leaf_pairs} * machine.bixels_per_row;
  const SparseMatrix& P = influence.matrix;

  // d_i = delta (1 - tau) P_i (l - r) + delta tau sum_b T_b sum_{j in b} P_ij.
  auto add_dose = [&](RowBuilder& row, Index voxel, double scale) {
    std::vector<double> beam_sum(static_cast<std::size_t>(machine.num_beams), 0.0);
    for (SparseMatrix::InnerIterator it(P, voxel); it; ++it) {
      const double exposure = scale * delta * (1.0 - tau) * it.value();
      if (exposure != 0.0) {
        row.add(left0 + it.col(), exposure);
        row.add(right0 + it.col(), -exposure);
      }
      beam_sum[static_cast<std::size_t>(it.col() / per_beam)] += it.value();
    }
    if (tau != 0.0) {
      for (int b = 0; b < machine.num_beams; ++b) {
        if (beam_sum[b] != 0.0) row.add(beam_on0 + b, scale * delta * tau * beam_sum[b]);
      }
    }
  };

  auto dose_cap = [&](const Roi& roi) {
    double worst = 0.0;
    for (Index voxel : roi.voxels) {
      double sum = 0.0;
      for (SparseMatrix::InnerIterator it(P, voxel); it; ++it) sum += it.value();
      worst = std::max(worst, sum);
    }
    return delta * machine.max_time_s * worst;
  };

  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const Criterion& c = criteria[k];
    const CriterionColumns& cols = lp.criterion_columns[k];
    const int ki = static_cast<int>(k);
    lp.columns[cols.xi] = {VariableKind::kXi, -1, -1, -1, ki, -1};
    if (cols.alpha >= 0) lp.columns[cols.alpha] = {VariableKind::kAlpha, -1, -1, -1, ki, -1};
    if (cols.eta_begin >= 0) {
      const Roi& roi = phantom.roi(c.roi);
      for (Index e = cols.eta_begin; e < cols.eta_end; ++e) {
        lp.columns[e] = {VariableKind::kEta, -1, -1, -1, ki, roi.voxels[e - cols.eta_begin]};
      }
    }
    if (is_upper_type(c.type)) {
      lp.lower[cols.xi] = std::max(0.0, c.utopian_lower.value_or(0.0));
      lp.upper[cols.xi] =
          c.upper ? *c.upper : std::max(dose_cap(phantom.roi(c.roi)), lp.lower[cols.xi]) + 1.0;
    } else {
      lp.lower[cols.xi] = std::max(0.0, c.lower.value_or(0.0));
      lp.upper[cols.xi] = c.utopian_upper.value_or(kInfinity);
    }
    if (c.objective) lp.cost[cols.xi] += weights[static_cast<std::size_t>(*c.objective)] * c.objective_sign();
  }
  for (Index j = 0; j < n; ++j) {
    if (lp.upper[j] < lp.lower[j]) {
      throw_config("criteria[" + std::to_string(lp.columns[j].criterion) +
                   "] has an empty range for its auxiliary variable");
    }
  }

  // Rows. y1: deliverability (negated into >= form), then per-criterion aggregate rows.
  LpAssembly y1;
  const DeliverabilityConstraints dc = build_deliverability_constraints(machine);
  for (Index r = 0; r < dc.matrix.rows(); ++r) {
    RowBuilder row;
    for (SparseMatrix::InnerIterator it(dc.matrix, r); it; ++it) row.add(it.col(), -it.value());
    RowInfo info;
    info.kind = RowKind::kDeliverability;
    info.deliverability = dc.rows[r];
    y1.push(row, -dc.rhs[r], info);
  }
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const Criterion& c = criteria[k];
    const CriterionColumns& cols = lp.criterion_columns[k];
    const Roi& roi = phantom.roi(c.roi);
    const int ki = static_cast<int>(k);
    RowBuilder row;
    switch (c.type) {
      case CriterionType::kDavMin: {
        row.add(cols.xi, 1.0);
        row.add(cols.alpha, -1.0);
        const double scale = 1.0 / c.volume_fraction;
        for (std::size_t i = 0; i < roi.voxels.size(); ++i) {
          row.add(cols.eta_begin + static_cast<Index>(i), -scale * roi.weights[i]);
        }
        y1.push(row, 0.0, {RowKind::kUpperTail, {}, ki, -1});
        break;
      }
      case CriterionType::kDavMax: {
        row.add(cols.alpha, 1.0);
        row.add(cols.xi, -1.0);
        const double scale = 1.0 / (1.0 - c.volume_fraction);
        for (std::size_t i = 0; i < roi.voxels.size(); ++i) {
          row.add(cols.eta_begin + static_cast<Index>(i), -scale * roi.weights[i]);
        }
        y1.push(row, 0.0, {RowKind::kLowerTail, {}, ki, -1});
        break;
      }
      case CriterionType::kAvgMin:
      case CriterionType::kAvgMax: {
        const bool upper = c.type == CriterionType::kAvgMin;
        RowBuilder dose;
        for (std::size_t i = 0; i < roi.voxels.size(); ++i) {
          add_dose(dose, roi.voxels[i], upper ? -roi.weights[i] : roi.weights[i]);
        }
        Vector dense = Vector::Zero(traj_cols);
        for (const auto& [col, value] : dose.entries) dense[col] += value;
        for (Index col = 0; col < traj_cols; ++col) {
          if (dense[col] != 0.0) row.add(col, dense[col]);
        }
        row.add(cols.xi, upper ? 1.0 : -1.0);
        y1.push(row, 0.0, {upper ? RowKind::kUpperAverage : RowKind::kLowerAverage, {}, ki, -1});
        break;
      }
      case CriterionType::kMax:
      case CriterionType::kMin:
        break;
    }
  }
  lp.m1 = static_cast<Index>(y1.rows.size());

  // y2: max/min voxel rows, then one excess row per eta column in column order.
  LpAssembly y2;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const Criterion& c = criteria[k];
    if (c.type != CriterionType::kMax && c.type != CriterionType::kMin) continue;
    const bool upper = c.type == CriterionType::kMax;
    const Roi& roi = phantom.roi(c.roi);
    for (Index voxel : roi.voxels) {
      RowBuilder row;
      row.add(lp.criterion_columns[k].xi, upper ? 1.0 : -1.0);
      add_dose(row, voxel, upper ? -1.0 : 1.0);
      y2.push(row, 0.0, {upper ? RowKind::kMaxDose : RowKind::kMinDose, {}, static_cast<int>(k), voxel});
    }
  }
  lp.m21 = static_cast<Index>(y2.rows.size());
  std::vector<Triplet> a22_triplets;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const Criterion& c = criteria[k];
    if (!is_dose_at_volume(c.type)) continue;
    const bool upper = c.type == CriterionType::kDavMin;
    const CriterionColumns& cols = lp.criterion_columns[k];
    const Roi& roi = phantom.roi(c.roi);
    for (std::size_t i = 0; i < roi.voxels.size(); ++i) {
      RowBuilder row;
      add_dose(row, roi.voxels[i], upper ? -1.0 : 1.0);
      row.add(cols.alpha, upper ? 1.0 : -1.0);
      const Index eta = cols.eta_begin + static_cast<Index>(i);
      a22_triplets.emplace_back(static_cast<Index>(y2.rows.size()), eta - lp.n1, 1.0);
      y2.push(row, 0.0,
              {upper ? RowKind::kUpperTailExcess : RowKind::kLowerTailExcess, {}, static_cast<int>(k),
               roi.voxels[i]});
    }
  }

  // Split the assembled rows into the four blocks.
  auto split = [&](const LpAssembly& part, Index rows, SparseMatrix& left_block, SparseMatrix& right_block) {
    std::vector<Triplet> left, right;
    for (const Triplet& t : part.triplets) {
      if (t.col() < lp.n1) {
        left.push_back(t);
      } else {
        right.emplace_back(t.row(), t.col() - lp.n1, t.value());
      }
    }
    left_block.resize(rows, lp.n1);
    left_block.setFromTriplets(left.begin(), left.end());
    right_block.resize(rows, lp.n2);
    right_block.setFromTriplets(right.begin(), right.end());
  };
  split(y1, lp.m1, lp.a11, lp.a12);
  SparseMatrix unused;
  split(y2, lp.m2(), lp.a21, unused);
  lp.a22.resize(lp.m2(), lp.n2);
  lp.a22.setFromTriplets(a22_triplets.begin(), a22_triplets.end());

  lp.rhs.resize(lp.num_rows());
  for (Index r = 0; r < lp.m1; ++r) lp.rhs[r] = y1.rhs[r];
  for (Index r = 0; r < lp.m2(); ++r) lp.rhs[lp.m1 + r] = y2.rhs[r];
  lp.rows = std::move(y1.rows);
  lp.rows.insert(lp.rows.end(), y2.rows.begin(), y2.rows.end());
  lp.weights = weights.values();
  lp.num_bixels = nb;
  lp.num_beams = machine.num_beams;
  check_a22(lp);
  return lp;
}

PartitionReport partition_report(const BlockLP& lp) {
  if (lp.a11.rows() != lp.m1 || lp.a11.cols() != lp.n1 || lp.a12.rows() != lp.m1 ||
      lp.a12.cols() != lp.n2 || lp.a21.rows() != lp.m2() || lp.a21.cols() != lp.n1) {
    throw_internal("block dimensions are inconsistent with the partition sizes");
  }
  check_a22(lp);
  if (static_cast<Index>(lp.columns.size()) != lp.num_cols() ||
      static_cast<Index>(lp.rows.size()) != lp.num_rows()) {
    throw_internal("variable or row catalog does not cover the LP");
  }
  for (Index j = 0; j < lp.num_cols(); ++j) {
    const bool voxelwise = lp.columns[j].kind == VariableKind::kEta;
    if (voxelwise != (j >= lp.n1)) {
      throw_internal("column " + std::to_string(j) + " is on the wrong side of the partition");
    }
  }
  for (Index r = 0; r < lp.num_rows(); ++r) {
    const RowKind kind = lp.rows[r].kind;
    if (kind == RowKind::kGeneric) continue;
    const bool voxelwise = kind == RowKind::kMaxDose || kind == RowKind::kMinDose ||
                           kind == RowKind::kUpperTailExcess || kind == RowKind::kLowerTailExcess;
    if (voxelwise != (r >= lp.m1)) {
      throw_internal("row " + std::to_string(r) + " is on the wrong side of the partition");
    }
    const bool excess = kind == RowKind::kUpperTailExcess || kind == RowKind::kLowerTailExcess;
    if (voxelwise && excess != (r >= lp.m1 + lp.m21)) {
      throw_internal("row " + std::to_string(r) + " breaks the max/min-then-excess row order");
    }
  }
  PartitionReport report;
  report.n1 = lp.n1;
  report.n2 = lp.n2;
  report.m1 = lp.m1;
  report.m21 = lp.m21;
  report.m22 = lp.n2;
  report.nnz_a11 = lp.a11.nonZeros();
  report.nnz_a12 = lp.a12.nonZeros();
  report.nnz_a21 = lp.a21.nonZeros();
  report.nnz_a22 = lp.a22.nonZeros();
  report.num_bixels = lp.num_bixels;
  return report;
}

double scalarized_objective_value(const BlockLP& lp, const Vector& x) {
  if (x.size() != lp.num_cols()) throw_data("solution length does not match the LP columns");
  return lp.cost.dot(x);
}

void write_lp_triplets(const BlockLP& lp, std::ostream& out) {
  out << "# mtd-lp-v1\n";
  out << "dims " << lp.n1 << ' ' << lp.n2 << ' ' << lp.m1 << ' ' << lp.m21 << '\n';
  for (Index j = 0; j < lp.num_cols(); ++j) {
    out << "col " << j << ' ' << format_double(lp.cost[j]) << ' ' << format_double(lp.lower[j]) << ' '
        << format_double(lp.upper[j]) << '\n';
  }
  for (Index i = 0; i < lp.num_rows(); ++i) out << "row " << i << ' ' << format_double(lp.rhs[i]) << '\n';
  const SparseMatrix a = lp.full_matrix();
  for (Index i = 0; i < a.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      out << "a " << i << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
    }
  }
}

BlockLP read_lp_triplets(std::istream& in) {
  std::string line;
  int line_number = 0;
  auto fail = [&](const std::string& what) -> void {
    throw_data("LP file line " + std::to_string(line_number) + ": " + what);
  };
  Index n1 = -1, n2 = 0, m1 = 0, m21 = 0;
  Vector cost, lower, upper, rhs;
  std::vector<Triplet> triplets;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# mtd-lp-v1", 0) == 0) header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string tag;
    fields >> tag;
    std::vector<std::string> rest;
    for (std::string f; fields >> f;) rest.push_back(f);
    try {
      if (tag == "dims") {
        if (rest.size() != 4) fail("dims expects 4 fields");
        n1 = parse_integer(rest[0]);
        n2 = parse_integer(rest[1]);
        m1 = parse_integer(rest[2]);
        m21 = parse_integer(rest[3]);
        if (n1 < 0 || n2 < 0 || m1 < 0 || m21 < 0) fail("negative dimension");
        cost = Vector::Zero(n1 + n2);
        lower = Vector::Zero(n1 + n2);
        upper = Vector::Constant(n1 + n2, kInfinity);
        rhs = Vector::Zero(m1 + m21 + n2);
      } else if (n1 < 0) {
        fail("dims line must come first");
      } else if (tag == "col") {
        if (rest.size() != 4) fail("col expects 4 fields");
        const Index j = parse_integer(rest[0]);
        if (j < 0 || j >= cost.size()) fail("column index out of range");
        cost[j] = parse_double(rest[1]);
        lower[j] = parse_double(rest[2]);
        upper[j] = parse_double(rest[3]);
      } else if (tag == "row") {
        if (rest.size() != 2) fail("row expects 2 fields");
        const Index i = parse_integer(rest[0]);
        if (i < 0 || i >= rhs.size()) fail("row index out of range");
        rhs[i] = parse_double(rest[1]);
      } else if (tag == "a") {
        if (rest.size() != 3) fail("a expects 3 fields");
        const Index i = parse_integer(rest[0]);
        const Index j = parse_integer(rest[1]);
        if (i < 0 || i >= rhs.size() || j < 0 || j >= cost.size()) fail("entry index out of range");
        triplets.emplace_back(i, j, parse_double(rest[2]));
      } else {
        fail("unknown record '" + tag + "'");
      }
    } catch (const Error& e) {
      if (std::string(e.what()).rfind("LP file line", 0) == 0) throw;
      fail(e.what());
    }
  }
  if (!header_seen) throw_data("LP file is missing the '# mtd-lp-v1' header");
  if (n1 < 0) throw_data("LP file has no dims line");
  SparseMatrix a(rhs.size(), cost.size());
  a.setFromTriplets(triplets.begin(), triplets.end());
  return BlockLP::from_matrix(a, n1, m1, m21, std::move(cost), std::move(rhs), std::move(lower),
                              std::move(upper));
}

}  // namespace mtd
