#pragma once

#include "bangbang/mesh.hpp"
#include "bangbang/types.hpp"

namespace bangbang::serial {

/// Single-threaded reference implementations kept for testing and for the
/// kernel benchmark. They use textbook accumulation and an independent
/// integration route (half-plane clipping, Simpson quadrature) so that the
/// production kernels can be checked against them.

SparseMatrix assemble_mass(const TriangularMesh& mesh);
SparseMatrix assemble_stiffness(const TriangularMesh& mesh);
SparseMatrix assemble_weighted_mass(const TriangularMesh& mesh, const NodalField& c);
LoadVector integrate_sign(const TriangularMesh& mesh, const NodalField& w);
double l1_norm(const TriangularMesh& mesh, const NodalField& w);
SparseMatrix sign_derivative(const TriangularMesh& mesh, const NodalField& w);

}  // namespace bangbang::serial
