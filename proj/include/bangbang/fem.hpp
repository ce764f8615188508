#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "bangbang/mesh.hpp"
#include "bangbang/types.hpp"

namespace bangbang {

/// Thrown when the damped Newton iteration for the state equation fails.
/// Signals a bad initial point; callers restart from y = 0.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Work counters shared by everything built on one StateSolver. A solve is
/// one forward/backward substitution pair with a factorized matrix; a
/// factorization is one sparse Cholesky decomposition.
struct SolveCounters {
  std::atomic<std::int64_t> factorizations{0};
  std::atomic<std::int64_t> solves{0};

  struct Snapshot {
    std::int64_t factorizations = 0;
    std::int64_t solves = 0;
  };
  Snapshot snapshot() const {
    return {factorizations.load(std::memory_order_relaxed),
            solves.load(std::memory_order_relaxed)};
  }
};

/// Exact P1 mass matrix (consistent, not lumped).
SparseMatrix assemble_mass(const TriangularMesh& mesh);

/// Stiffness matrix of the Neumann Laplacian; no boundary rows are touched.
SparseMatrix assemble_stiffness(const TriangularMesh& mesh);

/// Weighted mass matrix with the P1 interpolant of the nodal weight c,
/// integrated by the 3-point edge-midpoint rule.
SparseMatrix assemble_weighted_mass(const TriangularMesh& mesh, const NodalField& c);

/// Symmetric sparse operator with an optional cached Cholesky factorization.
class SparseSymmetricOperator {
 public:
  SparseSymmetricOperator() = default;
  explicit SparseSymmetricOperator(SparseMatrix matrix) : matrix_(std::move(matrix)) {}

  const SparseMatrix& matrix() const { return matrix_; }
  Index dimension() const { return matrix_.rows(); }
  bool is_factorized() const { return llt_ != nullptr; }

  /// Computes and caches the sparse Cholesky factorization.
  void factorize(SolveCounters& counters);

  /// Triangular-solve pair with the cached factorization.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, SolveCounters& counters) const;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix_ * x; }

 private:
  SparseMatrix matrix_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> llt_;
};

/// Data of the control problem: state equation -Δy + 10 y + alpha y^3 = u
/// with homogeneous Neumann conditions, bound |u| <= u_bound, target y_d.
struct SemilinearProblem {
  static constexpr double kLinearCoefficient = 10.0;

  double alpha = 0.0;
  double u_bound = 1.0;
  NodalField y_d;

  double a(double y) const { return kLinearCoefficient * y + alpha * y * y * y; }
  double a_prime(double y) const { return kLinearCoefficient + 3.0 * alpha * y * y; }
  double a_second(double y) const { return 6.0 * alpha * y; }
};

class StateLinearization;

/// Action of the reduced Hessian f''(u) on load vectors at a fixed
/// state/adjoint pair: load -> A^{-1} W_{1 - a''(y) p} A^{-1} load.
/// Costs two solves per application.
class ReducedHessian {
 public:
  ReducedHessian(std::shared_ptr<const StateLinearization> lin, SparseMatrix w_curvature)
      : lin_(std::move(lin)), w_curvature_(std::move(w_curvature)) {}

  NodalField apply(const LoadVector& load) const;

 private:
  std::shared_ptr<const StateLinearization> lin_;
  SparseMatrix w_curvature_;  // W_{1 - a''(y) p}
};

/// Factorized A(y) = K + W_{a'(y)} together with the state y it belongs to.
class StateLinearization {
 public:
  StateLinearization(const TriangularMesh& mesh, const SemilinearProblem& problem,
                     NodalField y, const SparseMatrix& stiffness, const SparseMatrix& mass,
                     SolveCounters& counters);

  /// Rebinds an existing linearization to a different state with the same
  /// coefficient field; the factorization is shared, not recomputed.
  StateLinearization(const StateLinearization& other, NodalField y);

  const NodalField& state() const { return y_; }
  const NodalField& weight() const { return weight_; }  // nodal a'(y)

  /// A(y)^{-1} rhs.
  NodalField solve(const LoadVector& rhs) const { return A_->solve(rhs, *counters_); }

  /// Adjoint state: A(y)^{-1} M (y - y_d).
  NodalField solve_adjoint(const NodalField& y_d) const;

  /// Reduced Hessian action at (y, p); assembles W_{1 - a''(y) p} once.
  ReducedHessian make_reduced_hessian(std::shared_ptr<const StateLinearization> self,
                                      const NodalField& p) const;

 private:
  const TriangularMesh* mesh_;
  const SemilinearProblem* problem_;
  NodalField y_;
  NodalField weight_;
  std::shared_ptr<const SparseSymmetricOperator> A_;
  const SparseMatrix* mass_;
  SolveCounters* counters_;
};

/// Owns the assembled matrices, the work counters, and the factorization
/// cache for one problem instance. Linearizations are cached per distinct
/// coefficient field a'(y), so the linear case factors exactly once and the
/// semilinear case factors once per Newton iterate.
class StateSolver {
 public:
  StateSolver(const TriangularMesh& mesh, SemilinearProblem problem);

  const TriangularMesh& mesh() const { return mesh_; }
  const SemilinearProblem& problem() const { return problem_; }
  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  SolveCounters& counters() { return counters_; }
  const SolveCounters& counters() const { return counters_; }

  /// Control-to-state map of the linear problem: y = (K + 10 M)^{-1} load.
  /// Requires alpha = 0. Self-adjoint, so it serves as S and S*.
  NodalField apply_S(const LoadVector& load);

  /// S* applied to a nodal field: apply_S(M v).
  NodalField apply_S_transpose(const NodalField& v);

  /// Damped Newton for the discrete state equation K y + N(y) = load where
  /// N is the a(y) volume term. Throws NonConvergence after 50 steps or when
  /// 30 halvings cannot reduce the residual.
  NodalField solve_state(const LoadVector& load, const NodalField& y_init);

  /// Residual K y + N(y) - load of the discrete state equation.
  LoadVector state_residual(const NodalField& y, const LoadVector& load) const;

  /// Factorized linearization at y, from the cache when the coefficient
  /// field matches.
  std::shared_ptr<const StateLinearization> linearize(const NodalField& y);

  /// Adjoint solve at y: (K + W_{a'(y)}) p = M (y - y_d).
  NodalField solve_adjoint(const NodalField& y);

 private:
  const TriangularMesh& mesh_;
  SemilinearProblem problem_;
  SparseMatrix mass_;
  SparseMatrix stiffness_;
  SolveCounters counters_;
  std::shared_ptr<const StateLinearization> cache_;
};

/// Volume term N(y)_i = sum_T (|T|/3) sum_m a(y_h(m)) phi_i(m) over the
/// edge midpoints m; the same rule the weighted mass matrix uses.
LoadVector assemble_nonlinear_term(const TriangularMesh& mesh, const SemilinearProblem& problem,
                                   const NodalField& y);

}  // namespace bangbang
