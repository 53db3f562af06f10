#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace sscn {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

}  // namespace sscn
