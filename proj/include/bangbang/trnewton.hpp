#pragma once

#include <functional>
#include <memory>

#include "bangbang/fem.hpp"
#include "bangbang/report.hpp"
#include "bangbang/signum.hpp"

namespace bangbang {

/// Parameters of the trust-region globalization. The defaults are the
/// values used for all experiments.
struct TRConfig {
  double eta1 = 0.75;
  double eta2 = 0.25;
  double gamma1 = 0.5;
  double gamma2 = 2.0;
  double theta1 = 1.5;
  double theta2 = 0.05;
  double delta0 = 0.0;  // <= 0 selects max(1, ||w0||_{w0})
  int max_iterations = 400;
  double gradient_tolerance = 1e-9;
  int cg_max_iterations = 500;

  /// Enforces 0 < eta2 <= eta1 < 1 and 0 < gamma1 < 1 < gamma2.
  void validate() const;
};

struct SteihaugResult {
  NodalField step;         // delta w
  NodalField t_step;       // T(delta w), accumulated during CG
  bool boundary_hit = false;
  bool warning = false;    // iteration cap or kernel cutoff reached
  int iterations = 0;
};

/// Truncated CG in the seminorm <a, b>_w = a' D b on the operator
/// T(v) = v + scale * f''(D v), stopping at the trust boundary, on
/// nonpositive curvature, or at absolute residual seminorm <= tolerance.
SteihaugResult steihaug_cg(const SignDerivativeMatrix& D, const ReducedHessian& f_second,
                           double scale, const NodalField& r, double radius, double tolerance,
                           int max_iterations);

/// Reduced-space trust-region Newton method for the semilinear problem:
/// drives r = w + p to zero on the zero level set of w, where p is the
/// adjoint at the control u_b sign(w).
class TrustRegionSolver {
 public:
  explicit TrustRegionSolver(StateSolver& state);

  /// Everything the method needs at one iterate w.
  struct Evaluation {
    NodalField w;
    NodalField y;
    NodalField p;
    NodalField r;  // w + p
    double objective = 0.0;
    ZeroLevelSet levelset;
    SignDerivativeMatrix D;
    std::shared_ptr<const StateLinearization> linearization;
    std::shared_ptr<const ReducedHessian> f_second;
  };

  /// Reduced objective, gradient data, and derivative structures at w.
  /// The state solve warm-starts from y_warm and falls back to y = 0.
  Evaluation evaluate(const NodalField& w, const NodalField& y_warm);

  /// Objective-only evaluation for trial points (state solve, no adjoint).
  double evaluate_objective(const NodalField& w, const NodalField& y_warm, NodalField& y_out);

  /// Gauss-Newton operator H applied to v: D (v + scale f''(D v)).
  LoadVector apply_H(const Evaluation& eval, const NodalField& v) const;

  /// Chain-rule factor on the curvature term; equals u_bound.
  double hessian_scale() const { return state_.problem().u_bound; }

  /// Observer for tests: called once per outer iteration.
  struct StepInfo {
    const Evaluation* eval = nullptr;
    const NodalField* step = nullptr;
    double pred = 0.0;
    double ared = 0.0;
    double rho = 0.0;
    double radius = 0.0;
    double step_seminorm = 0.0;
    bool accepted = false;
    bool boundary_hit = false;
  };
  using Observer = std::function<void(const StepInfo&)>;

  LevelResult solve(const TRConfig& config = {}, const Observer& observer = {});

  double l2_inner(const NodalField& a, const NodalField& b) const { return a.dot(mass_ * b); }

 private:
  StateSolver& state_;
  const TriangularMesh& mesh_;
  const SparseMatrix& mass_;
};

}  // namespace bangbang
