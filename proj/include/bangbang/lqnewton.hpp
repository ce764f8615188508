#pragma once

#include "bangbang/fem.hpp"
#include "bangbang/report.hpp"
#include "bangbang/signum.hpp"

namespace bangbang {

struct LQConfig {
  double residual_tolerance = 1e-10;  // absolute, on ||F||_L2
  int max_iterations = 200;
  int cg_max_iterations = 500;
  double armijo_sigma = 1e-4;
  int max_halvings = 30;
};

struct FixedPointConfig {
  double step_tolerance = 1e-10;  // on ||xi_{k+1} - xi_k||_L2
  int max_iterations = 1000;
  double divergence_factor = 1e6;  // diverged when ||xi|| > factor * ||y_d||
};

/// Semismooth Newton solver for the dual equation
///   F(xi) = xi + u_b S sign(S* xi) - y_d = 0
/// of the linear-quadratic problem, with Armijo backtracking on the merit
///   Phi(xi) = 1/2 ||xi - y_d||^2 + u_b ||S* xi||_L1,
/// plus the plain fixed-point iteration as a baseline.
class LinearQuadraticSolver {
 public:
  /// Requires the state solver's problem to have alpha = 0.
  explicit LinearQuadraticSolver(StateSolver& state);

  struct Residual {
    NodalField F;
    NodalField w;  // S* xi, returned for reuse
  };

  /// F(xi) and w = S* xi. Costs two solves.
  Residual residual(const NodalField& xi);

  /// Merit Phi(xi); w must be S* xi.
  double merit(const NodalField& xi, const NodalField& w) const;

  struct NewtonStep {
    NodalField direction;
    int cg_iterations = 0;
    bool converged = true;
  };

  /// Inexact Newton direction: CG in the L2 inner product on
  /// G = I + u_b S D(w) S* with forcing min(0.1, sqrt(||F||)) * ||F||.
  NewtonStep newton_step(const NodalField& xi, const NodalField& w, const NodalField& F,
                         int cg_cap = 500);

  /// Action of G(xi) on a field; two solves.
  NodalField apply_G(const SignDerivativeMatrix& D, const NodalField& v);

  /// Full globalized run from xi_0 = y_d.
  LevelResult solve(const LQConfig& config = {});

  /// Fixed-point iteration xi_{k+1} = y_d - u_b S sign(S* xi_k) from xi_0 = y_d.
  LevelResult fixed_point(const FixedPointConfig& config = {});

  double l2_norm(const NodalField& v) const { return std::sqrt(v.dot(mass_ * v)); }
  double l2_inner(const NodalField& a, const NodalField& b) const { return a.dot(mass_ * b); }

 private:
  StateSolver& state_;
  const TriangularMesh& mesh_;
  const SparseMatrix& mass_;
};

}  // namespace bangbang
