#include "bangbang/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bangbang {

TriangularMesh::TriangularMesh(int n) : n_(n) {
  if (n < 1) {
    throw std::invalid_argument("mesh subdivision count must be at least 1, got " +
                                std::to_string(n));
  }
  h_ = 2.0 / n;
  element_area_ = 0.5 * h_ * h_;

  const int m = n + 1;
  nodes_.reserve(static_cast<size_t>(m) * m);
  for (int iy = 0; iy < m; ++iy) {
    for (int ix = 0; ix < m; ++ix) {
      nodes_.emplace_back(-1.0 + ix * h_, -1.0 + iy * h_);
    }
  }

  elements_.reserve(static_cast<size_t>(2) * n * n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int ll = iy * m + ix;
      const int lr = ll + 1;
      const int ul = ll + m;
      const int ur = ul + 1;
      // Lower-left to upper-right diagonal; both triangles counterclockwise.
      elements_.push_back({ll, lr, ur});
      elements_.push_back({ll, ur, ul});
    }
  }

  basis_gradients_.resize(elements_.size());
  for (size_t e = 0; e < elements_.size(); ++e) {
    const auto& el = elements_[e];
    const Eigen::Vector2d& p0 = nodes_[static_cast<size_t>(el[0])];
    const Eigen::Vector2d& p1 = nodes_[static_cast<size_t>(el[1])];
    const Eigen::Vector2d& p2 = nodes_[static_cast<size_t>(el[2])];
    const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                       (p2.x() - p0.x()) * (p1.y() - p0.y());
    basis_gradients_[e][0] = Eigen::Vector2d(p1.y() - p2.y(), p2.x() - p1.x()) / det;
    basis_gradients_[e][1] = Eigen::Vector2d(p2.y() - p0.y(), p0.x() - p2.x()) / det;
    basis_gradients_[e][2] = Eigen::Vector2d(p0.y() - p1.y(), p1.x() - p0.x()) / det;
  }
}

bool TriangularMesh::element_touches_boundary(Index e) const {
  const int m = n_ + 1;
  for (int v : element(e)) {
    const int ix = v % m;
    const int iy = v / m;
    if (ix == 0 || ix == n_ || iy == 0 || iy == n_) return true;
  }
  return false;
}

TriangularMesh build_uniform_mesh(int n) { return TriangularMesh(n); }

NodalField interpolate(const TriangularMesh& mesh,
                       const std::function<double(double, double)>& f) {
  NodalField values(mesh.node_count());
  for (Index i = 0; i < mesh.node_count(); ++i) {
    const auto& p = mesh.node(i);
    const double v = f(p.x(), p.y());
    if (!std::isfinite(v)) {
      throw std::domain_error("interpolate: non-finite value at node " + std::to_string(i));
    }
    values[i] = v;
  }
  return values;
}

Eigen::Vector2d element_gradient(const TriangularMesh& mesh, const NodalField& w, Index e) {
  const auto& el = mesh.element(e);
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (int v = 0; v < 3; ++v) g += w[el[static_cast<size_t>(v)]] * mesh.basis_gradient(e, v);
  return g;
}

}  // namespace bangbang
