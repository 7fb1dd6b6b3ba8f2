#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace mtd {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;
using Triplet = Eigen::Triplet<double, Index>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace mtd
