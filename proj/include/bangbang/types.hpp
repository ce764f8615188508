#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace bangbang {

/// A P1 finite-element function, stored as one coefficient per mesh node.
using NodalField = Eigen::VectorXd;

/// A functional on the P1 space, stored as one value per test function.
/// Same container as NodalField; the distinction is kept by naming.
using LoadVector = Eigen::VectorXd;

using SparseMatrix = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

}  // namespace bangbang
