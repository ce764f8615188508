#include "bangbang/signum.hpp"

#include <cmath>
#include <stdexcept>

namespace bangbang {

namespace {

constexpr double kTieBreakRel = 1e-14;
constexpr double kDegenerateGradient = 1e-12;

struct SplitPart {
  double area;        // physical area
  double mean[3];     // mean of the local hat functions (lone, a, b ordering)
  double mean_w;      // mean of w over the part (w vanishes at segment endpoints)
  double sign;
};

// Exact decomposition of a cut triangle into three sub-triangles on which
// sign(w_h) is constant: the corner containing the lone vertex plus two
// pieces of the remaining quadrilateral.
void split_cut_element(const CutSegment& seg, double area, const double w_local[3],
                       SplitPart parts[3]) {
  const double t1 = seg.t1;
  const double t2 = seg.t2;
  const double s = seg.lone_sign;

  parts[0] = {t1 * t2 * area,
              {(3.0 - t1 - t2) / 3.0, t1 / 3.0, t2 / 3.0},
              w_local[0] / 3.0,
              s};
  parts[1] = {(1.0 - t2) * area,
              {(1.0 - t2) / 3.0, 1.0 / 3.0, (1.0 + t2) / 3.0},
              (w_local[1] + w_local[2]) / 3.0,
              -s};
  parts[2] = {(1.0 - t1) * t2 * area,
              {(2.0 - t1 - t2) / 3.0, (1.0 + t1) / 3.0, t2 / 3.0},
              w_local[1] / 3.0,
              -s};
}

}  // namespace

NodalField tie_break(const NodalField& w) {
  const double scale = w.lpNorm<Eigen::Infinity>();
  const double tol = kTieBreakRel * scale;
  NodalField nudged = w;
  for (Index i = 0; i < nudged.size(); ++i) {
    if (std::abs(nudged[i]) <= tol) nudged[i] = tol;
  }
  return nudged;
}

double ZeroLevelSet::total_length() const {
  double sum = 0.0;
  for (const auto& seg : segments) sum += seg.length;
  return sum;
}

ZeroLevelSet extract_zero_levelset(const TriangularMesh& mesh, const NodalField& w) {
  if (w.size() != mesh.node_count()) {
    throw std::invalid_argument("extract_zero_levelset: field length mismatch");
  }
  if (!w.allFinite()) {
    throw std::invalid_argument("extract_zero_levelset: field has non-finite entries");
  }
  const NodalField nudged = tie_break(w);
  const Index n_elements = mesh.element_count();

  ZeroLevelSet result;
  result.element_sign.assign(static_cast<size_t>(n_elements), ElementSign::kPositive);
  std::vector<CutSegment> slots(static_cast<size_t>(n_elements));

#pragma omp parallel for schedule(static)
  for (Index e = 0; e < n_elements; ++e) {
    const auto& el = mesh.element(e);
    const double v[3] = {nudged[el[0]], nudged[el[1]], nudged[el[2]]};
    const bool pos[3] = {v[0] >= 0.0, v[1] >= 0.0, v[2] >= 0.0};

    if (pos[0] == pos[1] && pos[1] == pos[2]) {
      result.element_sign[static_cast<size_t>(e)] =
          pos[0] ? ElementSign::kPositive : ElementSign::kNegative;
      continue;
    }

    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) grad += v[i] * mesh.basis_gradient(e, i);
    const double gnorm = grad.norm();
    if (gnorm < kDegenerateGradient) {
      result.element_sign[static_cast<size_t>(e)] = ElementSign::kDegenerate;
      continue;
    }

    int lone = 0;
    if (pos[1] != pos[0] && pos[1] != pos[2]) lone = 1;
    if (pos[2] != pos[0] && pos[2] != pos[1]) lone = 2;
    const int ia = (lone + 1) % 3;
    const int ib = (lone + 2) % 3;

    CutSegment seg;
    seg.element = e;
    seg.lone_vertex = lone;
    seg.lone_sign = pos[lone] ? 1.0 : -1.0;
    seg.t1 = v[lone] / (v[lone] - v[ia]);
    seg.t2 = v[lone] / (v[lone] - v[ib]);
    const Eigen::Vector2d& pl = mesh.node(el[static_cast<size_t>(lone)]);
    const Eigen::Vector2d& pa = mesh.node(el[static_cast<size_t>(ia)]);
    const Eigen::Vector2d& pb = mesh.node(el[static_cast<size_t>(ib)]);
    seg.p1 = pl + seg.t1 * (pa - pl);
    seg.p2 = pl + seg.t2 * (pb - pl);
    seg.length = (seg.p2 - seg.p1).norm();
    seg.gradient_norm = gnorm;

    result.element_sign[static_cast<size_t>(e)] = ElementSign::kCut;
    slots[static_cast<size_t>(e)] = seg;
  }

  for (Index e = 0; e < n_elements; ++e) {
    const ElementSign tag = result.element_sign[static_cast<size_t>(e)];
    if (tag == ElementSign::kCut) {
      result.segments.push_back(slots[static_cast<size_t>(e)]);
      if (mesh.element_touches_boundary(e)) ++result.boundary_cut_elements;
    } else if (tag == ElementSign::kDegenerate) {
      result.degenerate_elements.push_back(e);
      if (mesh.element_touches_boundary(e)) ++result.boundary_cut_elements;
    }
  }
  return result;
}

LoadVector integrate_sign(const TriangularMesh& mesh, const NodalField& w) {
  return integrate_sign(mesh, w, extract_zero_levelset(mesh, w));
}

LoadVector integrate_sign(const TriangularMesh& mesh, const NodalField& w,
                          const ZeroLevelSet& levelset) {
  const Index n_elements = mesh.element_count();
  const double area = mesh.element_area();
  const NodalField nudged = tie_break(w);

  std::vector<std::array<double, 3>> contributions(
      static_cast<size_t>(n_elements), std::array<double, 3>{0.0, 0.0, 0.0});

  // Uncut elements contribute +-area/3 per vertex; degenerate ones nothing.
#pragma omp parallel for schedule(static)
  for (Index e = 0; e < n_elements; ++e) {
    const ElementSign tag = levelset.element_sign[static_cast<size_t>(e)];
    if (tag == ElementSign::kCut || tag == ElementSign::kDegenerate) continue;
    const double s = (tag == ElementSign::kPositive) ? 1.0 : -1.0;
    contributions[static_cast<size_t>(e)] = {s * area / 3.0, s * area / 3.0, s * area / 3.0};
  }

#pragma omp parallel for schedule(static)
  for (size_t k = 0; k < levelset.segments.size(); ++k) {
    const CutSegment& seg = levelset.segments[k];
    const auto& el = mesh.element(seg.element);
    const int local[3] = {seg.lone_vertex, (seg.lone_vertex + 1) % 3, (seg.lone_vertex + 2) % 3};
    const double w_local[3] = {nudged[el[static_cast<size_t>(local[0])]],
                               nudged[el[static_cast<size_t>(local[1])]],
                               nudged[el[static_cast<size_t>(local[2])]]};
    SplitPart parts[3];
    split_cut_element(seg, area, w_local, parts);
    auto& out = contributions[static_cast<size_t>(seg.element)];
    for (const SplitPart& part : parts) {
      for (int i = 0; i < 3; ++i) {
        out[static_cast<size_t>(local[i])] += part.sign * part.area * part.mean[i];
      }
    }
  }

  LoadVector b = LoadVector::Zero(mesh.node_count());
  for (Index e = 0; e < n_elements; ++e) {
    const auto& el = mesh.element(e);
    const auto& in = contributions[static_cast<size_t>(e)];
    for (int i = 0; i < 3; ++i) b[el[static_cast<size_t>(i)]] += in[static_cast<size_t>(i)];
  }
  return b;
}

double l1_norm(const TriangularMesh& mesh, const NodalField& w) {
  return l1_norm(mesh, w, extract_zero_levelset(mesh, w));
}

double l1_norm(const TriangularMesh& mesh, const NodalField& w, const ZeroLevelSet& levelset) {
  const Index n_elements = mesh.element_count();
  const double area = mesh.element_area();
  const NodalField nudged = tie_break(w);

  std::vector<double> values(static_cast<size_t>(n_elements), 0.0);

#pragma omp parallel for schedule(static)
  for (Index e = 0; e < n_elements; ++e) {
    const auto& el = mesh.element(e);
    if (levelset.element_sign[static_cast<size_t>(e)] != ElementSign::kCut) {
      values[static_cast<size_t>(e)] =
          area * std::abs(nudged[el[0]] + nudged[el[1]] + nudged[el[2]]) / 3.0;
    }
  }

#pragma omp parallel for schedule(static)
  for (size_t k = 0; k < levelset.segments.size(); ++k) {
    const CutSegment& seg = levelset.segments[k];
    const auto& el = mesh.element(seg.element);
    const int local[3] = {seg.lone_vertex, (seg.lone_vertex + 1) % 3, (seg.lone_vertex + 2) % 3};
    const double w_local[3] = {nudged[el[static_cast<size_t>(local[0])]],
                               nudged[el[static_cast<size_t>(local[1])]],
                               nudged[el[static_cast<size_t>(local[2])]]};
    SplitPart parts[3];
    split_cut_element(seg, area, w_local, parts);
    double sum = 0.0;
    for (const SplitPart& part : parts) sum += part.area * std::abs(part.mean_w);
    values[static_cast<size_t>(seg.element)] = sum;
  }

  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

SignDerivativeMatrix assemble_sign_derivative(const TriangularMesh& mesh, const NodalField& w) {
  return assemble_sign_derivative(mesh, extract_zero_levelset(mesh, w));
}

SignDerivativeMatrix assemble_sign_derivative(const TriangularMesh& mesh,
                                              const ZeroLevelSet& levelset) {
  const size_t n_segments = levelset.segments.size();
  std::vector<Eigen::Triplet<double>> triplets(9 * n_segments);

  // Gauss points on the segment, exact for the quadratic phi_i phi_j.
  const double gauss[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};

#pragma omp parallel for schedule(static)
  for (size_t k = 0; k < n_segments; ++k) {
    const CutSegment& seg = levelset.segments[k];
    const auto& el = mesh.element(seg.element);
    // Barycentric coordinates of the endpoints in (lone, a, b) ordering.
    const double q1[3] = {1.0 - seg.t1, seg.t1, 0.0};
    const double q2[3] = {1.0 - seg.t2, 0.0, seg.t2};

    double local[3][3] = {};
    for (double s : gauss) {
      double beta[3];
      for (int i = 0; i < 3; ++i) beta[i] = (1.0 - s) * q1[i] + s * q2[i];
      for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) local[i][j] += beta[i] * beta[j];
      }
    }
    const double factor = seg.length / seg.gradient_norm;
    const int g[3] = {el[static_cast<size_t>(seg.lone_vertex)],
                      el[static_cast<size_t>((seg.lone_vertex + 1) % 3)],
                      el[static_cast<size_t>((seg.lone_vertex + 2) % 3)]};
    size_t slot = 9 * k;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double value = factor * (i <= j ? local[i][j] : local[j][i]);
        triplets[slot++] = Eigen::Triplet<double>(g[i], g[j], value);
      }
    }
  }

  SignDerivativeMatrix result;
  result.matrix.resize(mesh.node_count(), mesh.node_count());
  result.matrix.setFromTriplets(triplets.begin(), triplets.end());
  result.matrix.makeCompressed();
  result.degenerate_elements = levelset.degenerate_elements;
  return result;
}

}  // namespace bangbang
