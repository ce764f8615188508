#include "bangbang/fem.hpp"

#include <cmath>
#include <vector>

namespace bangbang {

namespace {

using Triplet = Eigen::Triplet<double>;

// Hat-function values at the three edge midpoints (m01, m12, m02).
constexpr double kMidpointPhi[3][3] = {
    {0.5, 0.5, 0.0},
    {0.0, 0.5, 0.5},
    {0.5, 0.0, 0.5},
};

// Per-element contributions are computed in parallel into preallocated
// slots and reduced serially in element order, so assembled matrices are
// bitwise reproducible for any thread count.
template <typename LocalKernel>
SparseMatrix assemble_from_elements(const TriangularMesh& mesh, LocalKernel&& local) {
  const Index n_elements = mesh.element_count();
  std::vector<Triplet> triplets(static_cast<size_t>(9 * n_elements));

#pragma omp parallel for schedule(static)
  for (Index e = 0; e < n_elements; ++e) {
    double w_local[3][3];
    local(e, w_local);
    const auto& el = mesh.element(e);
    size_t slot = static_cast<size_t>(9 * e);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        triplets[slot++] = Triplet(el[static_cast<size_t>(i)], el[static_cast<size_t>(j)],
                                   w_local[i][j]);
      }
    }
  }

  SparseMatrix matrix(mesh.node_count(), mesh.node_count());
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  matrix.makeCompressed();
  return matrix;
}

}  // namespace

SparseMatrix assemble_mass(const TriangularMesh& mesh) {
  const double area = mesh.element_area();
  return assemble_from_elements(mesh, [&](Index, double local[3][3]) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) local[i][j] = (i == j ? 2.0 : 1.0) * area / 12.0;
    }
  });
}

SparseMatrix assemble_stiffness(const TriangularMesh& mesh) {
  const double area = mesh.element_area();
  return assemble_from_elements(mesh, [&](Index e, double local[3][3]) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        local[i][j] = area * mesh.basis_gradient(e, i).dot(mesh.basis_gradient(e, j));
      }
    }
  });
}

SparseMatrix assemble_weighted_mass(const TriangularMesh& mesh, const NodalField& c) {
  if (c.size() != mesh.node_count()) {
    throw std::invalid_argument("assemble_weighted_mass: weight length mismatch");
  }
  const double area = mesh.element_area();
  return assemble_from_elements(mesh, [&](Index e, double local[3][3]) {
    const auto& el = mesh.element(e);
    const double cv[3] = {c[el[0]], c[el[1]], c[el[2]]};
    const double cm[3] = {0.5 * (cv[0] + cv[1]), 0.5 * (cv[1] + cv[2]), 0.5 * (cv[0] + cv[2])};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double sum = 0.0;
        for (int m = 0; m < 3; ++m) sum += cm[m] * kMidpointPhi[m][i] * kMidpointPhi[m][j];
        local[i][j] = area / 3.0 * sum;
      }
    }
  });
}

LoadVector assemble_nonlinear_term(const TriangularMesh& mesh, const SemilinearProblem& problem,
                                   const NodalField& y) {
  const Index n_elements = mesh.element_count();
  const double area = mesh.element_area();
  std::vector<std::array<double, 3>> contributions(static_cast<size_t>(n_elements));

#pragma omp parallel for schedule(static)
  for (Index e = 0; e < n_elements; ++e) {
    const auto& el = mesh.element(e);
    const double yv[3] = {y[el[0]], y[el[1]], y[el[2]]};
    const double am[3] = {problem.a(0.5 * (yv[0] + yv[1])), problem.a(0.5 * (yv[1] + yv[2])),
                          problem.a(0.5 * (yv[0] + yv[2]))};
    auto& out = contributions[static_cast<size_t>(e)];
    for (int i = 0; i < 3; ++i) {
      double sum = 0.0;
      for (int m = 0; m < 3; ++m) sum += am[m] * kMidpointPhi[m][i];
      out[static_cast<size_t>(i)] = area / 3.0 * sum;
    }
  }

  LoadVector result = LoadVector::Zero(mesh.node_count());
  for (Index e = 0; e < n_elements; ++e) {
    const auto& el = mesh.element(e);
    const auto& in = contributions[static_cast<size_t>(e)];
    for (int i = 0; i < 3; ++i) result[el[static_cast<size_t>(i)]] += in[static_cast<size_t>(i)];
  }
  return result;
}

void SparseSymmetricOperator::factorize(SolveCounters& counters) {
  auto llt = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>();
  llt->compute(matrix_);
  if (llt->info() != Eigen::Success) {
    throw std::runtime_error("SparseSymmetricOperator: Cholesky factorization failed");
  }
  llt_ = std::move(llt);
  counters.factorizations.fetch_add(1, std::memory_order_relaxed);
}

Eigen::VectorXd SparseSymmetricOperator::solve(const Eigen::VectorXd& rhs,
                                               SolveCounters& counters) const {
  if (!llt_) throw std::logic_error("SparseSymmetricOperator: solve before factorize");
  counters.solves.fetch_add(1, std::memory_order_relaxed);
  return llt_->solve(rhs);
}

StateLinearization::StateLinearization(const TriangularMesh& mesh,
                                       const SemilinearProblem& problem, NodalField y,
                                       const SparseMatrix& stiffness, const SparseMatrix& mass,
                                       SolveCounters& counters)
    : mesh_(&mesh), problem_(&problem), y_(std::move(y)), mass_(&mass), counters_(&counters) {
  weight_ = y_.unaryExpr([&](double v) { return problem.a_prime(v); });
  auto a = std::make_shared<SparseSymmetricOperator>(
      SparseMatrix(stiffness + assemble_weighted_mass(mesh, weight_)));
  a->factorize(counters);
  A_ = std::move(a);
}

StateLinearization::StateLinearization(const StateLinearization& other, NodalField y)
    : mesh_(other.mesh_),
      problem_(other.problem_),
      y_(std::move(y)),
      weight_(other.weight_),
      A_(other.A_),
      mass_(other.mass_),
      counters_(other.counters_) {}

NodalField StateLinearization::solve_adjoint(const NodalField& y_d) const {
  return A_->solve((*mass_) * (y_ - y_d), *counters_);
}

ReducedHessian StateLinearization::make_reduced_hessian(
    std::shared_ptr<const StateLinearization> self, const NodalField& p) const {
  NodalField curvature(y_.size());
  for (Index i = 0; i < y_.size(); ++i) curvature[i] = 1.0 - problem_->a_second(y_[i]) * p[i];
  return ReducedHessian(std::move(self), assemble_weighted_mass(*mesh_, curvature));
}

NodalField ReducedHessian::apply(const LoadVector& load) const {
  const NodalField dy = lin_->solve(load);
  return lin_->solve(w_curvature_ * dy);
}

StateSolver::StateSolver(const TriangularMesh& mesh, SemilinearProblem problem)
    : mesh_(mesh),
      problem_(std::move(problem)),
      mass_(assemble_mass(mesh)),
      stiffness_(assemble_stiffness(mesh)) {
  if (problem_.alpha < 0.0) throw std::invalid_argument("StateSolver: alpha must be >= 0");
  if (problem_.y_d.size() != mesh.node_count()) {
    throw std::invalid_argument("StateSolver: y_d length mismatch");
  }
}

std::shared_ptr<const StateLinearization> StateSolver::linearize(const NodalField& y) {
  NodalField weight = y.unaryExpr([&](double v) { return problem_.a_prime(v); });
  if (cache_ && cache_->weight() == weight) {
    if (cache_->state() != y) {
      cache_ = std::make_shared<StateLinearization>(*cache_, y);
    }
    return cache_;
  }
  cache_ = std::make_shared<StateLinearization>(mesh_, problem_, y, stiffness_, mass_, counters_);
  return cache_;
}

NodalField StateSolver::apply_S(const LoadVector& load) {
  if (problem_.alpha != 0.0) {
    throw std::logic_error("apply_S: control-to-state map requires alpha = 0");
  }
  return linearize(NodalField::Zero(mesh_.node_count()))->solve(load);
}

NodalField StateSolver::apply_S_transpose(const NodalField& v) { return apply_S(mass_ * v); }

LoadVector StateSolver::state_residual(const NodalField& y, const LoadVector& load) const {
  return stiffness_ * y + assemble_nonlinear_term(mesh_, problem_, y) - load;
}

NodalField StateSolver::solve_state(const LoadVector& load, const NodalField& y_init) {
  constexpr int kMaxNewtonSteps = 50;
  constexpr int kMaxHalvings = 30;
  const double tolerance = 1e-11 * (1.0 + load.lpNorm<Eigen::Infinity>());

  NodalField y = y_init;
  LoadVector residual = state_residual(y, load);
  double res_norm = residual.lpNorm<Eigen::Infinity>();

  for (int step = 0; step < kMaxNewtonSteps; ++step) {
    if (std::isfinite(res_norm) && res_norm <= tolerance) return y;

    auto lin = linearize(y);
    const NodalField direction = lin->solve(-residual);

    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      const NodalField y_trial = y + t * direction;
      const LoadVector residual_trial = state_residual(y_trial, load);
      const double res_trial = residual_trial.lpNorm<Eigen::Infinity>();
      if (std::isfinite(res_trial) && (res_trial < res_norm || !std::isfinite(res_norm))) {
        y = y_trial;
        residual = residual_trial;
        res_norm = res_trial;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      throw NonConvergence("state Newton: no residual decrease after halvings");
    }
  }
  if (std::isfinite(res_norm) && res_norm <= tolerance) return y;
  throw NonConvergence("state Newton: no convergence within 50 steps");
}

NodalField StateSolver::solve_adjoint(const NodalField& y) {
  return linearize(y)->solve_adjoint(problem_.y_d);
}

}  // namespace bangbang
