#pragma once

#include <array>
#include <functional>
#include <vector>

#include "bangbang/types.hpp"

namespace bangbang {

/// Uniform triangulation of the square (-1,1)^2.
///
/// Each of the n x n grid cells is split along the diagonal from its
/// lower-left to its upper-right corner, giving 2n^2 triangles on
/// (n+1)^2 nodes. Nodes are ordered lexicographically by (x2, x1) so
/// that sparsity patterns and file outputs are reproducible. The mesh
/// is immutable after construction and safe to share between threads.
class TriangularMesh {
 public:
  using ElementNodes = std::array<int, 3>;

  /// Builds the level-n mesh. Throws std::invalid_argument for n < 1.
  explicit TriangularMesh(int n);

  int subdivisions() const { return n_; }
  double mesh_size() const { return h_; }

  Index node_count() const { return static_cast<Index>(nodes_.size()); }
  Index element_count() const { return static_cast<Index>(elements_.size()); }

  const Eigen::Vector2d& node(Index i) const { return nodes_[static_cast<size_t>(i)]; }
  const std::vector<Eigen::Vector2d>& nodes() const { return nodes_; }

  const ElementNodes& element(Index e) const { return elements_[static_cast<size_t>(e)]; }
  const std::vector<ElementNodes>& elements() const { return elements_; }

  /// All elements have the same area h^2/2.
  double element_area(Index) const { return element_area_; }
  double element_area() const { return element_area_; }

  /// Constant gradient of the P1 hat function of local vertex v on element e.
  const Eigen::Vector2d& basis_gradient(Index e, int v) const {
    return basis_gradients_[static_cast<size_t>(e)][static_cast<size_t>(v)];
  }

  /// True if any vertex of element e lies on the boundary of the square.
  bool element_touches_boundary(Index e) const;

 private:
  int n_;
  double h_;
  double element_area_;
  std::vector<Eigen::Vector2d> nodes_;
  std::vector<ElementNodes> elements_;
  std::vector<std::array<Eigen::Vector2d, 3>> basis_gradients_;
};

/// Convenience factory matching the mesh constructor.
TriangularMesh build_uniform_mesh(int n);

/// Nodal interpolant of f. Throws std::domain_error if f produces a
/// non-finite value at any node.
NodalField interpolate(const TriangularMesh& mesh,
                       const std::function<double(double, double)>& f);

/// Constant gradient of the P1 interpolant of w on element e.
Eigen::Vector2d element_gradient(const TriangularMesh& mesh, const NodalField& w, Index e);

}  // namespace bangbang
