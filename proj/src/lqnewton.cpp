#include "bangbang/lqnewton.hpp"

#include <chrono>
#include <cmath>

namespace bangbang {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void fill_error_to_final(LevelResult& result, const std::vector<NodalField>& iterates,
                         const LinearQuadraticSolver& solver) {
  if (iterates.empty()) return;
  const NodalField& last = iterates.back();
  for (size_t k = 0; k < result.trace.size() && k < iterates.size(); ++k) {
    result.trace[k].error_to_final = solver.l2_norm(iterates[k] - last);
  }
}

}  // namespace

LinearQuadraticSolver::LinearQuadraticSolver(StateSolver& state)
    : state_(state), mesh_(state.mesh()), mass_(state.mass()) {
  if (state.problem().alpha != 0.0) {
    throw std::logic_error("LinearQuadraticSolver requires alpha = 0");
  }
}

LinearQuadraticSolver::Residual LinearQuadraticSolver::residual(const NodalField& xi) {
  Residual out;
  out.w = state_.apply_S_transpose(xi);
  const LoadVector b = integrate_sign(mesh_, out.w);
  out.F = xi + state_.problem().u_bound * state_.apply_S(b) - state_.problem().y_d;
  return out;
}

double LinearQuadraticSolver::merit(const NodalField& xi, const NodalField& w) const {
  const NodalField d = xi - state_.problem().y_d;
  return 0.5 * d.dot(mass_ * d) + state_.problem().u_bound * l1_norm(mesh_, w);
}

NodalField LinearQuadraticSolver::apply_G(const SignDerivativeMatrix& D, const NodalField& v) {
  const NodalField sv = state_.apply_S_transpose(v);
  return v + state_.problem().u_bound * state_.apply_S(D.apply(sv));
}

LinearQuadraticSolver::NewtonStep LinearQuadraticSolver::newton_step(const NodalField&,
                                                                     const NodalField& w,
                                                                     const NodalField& F,
                                                                     int cg_cap) {
  const SignDerivativeMatrix D = assemble_sign_derivative(mesh_, w);
  const double f_norm = l2_norm(F);
  const double forcing = std::min(0.1, std::sqrt(f_norm));
  const double target = forcing * f_norm;

  // CG in the L2 (mass) inner product; G is self-adjoint and positive
  // definite there, with <v, G v> >= ||v||^2.
  NewtonStep out;
  out.direction = NodalField::Zero(F.size());
  NodalField res = -F;  // rhs - G * 0
  NodalField p = res;
  double rs = l2_inner(res, res);

  for (int j = 0; j < cg_cap; ++j) {
    if (std::sqrt(rs) <= target) return out;
    const NodalField q = apply_G(D, p);
    const double alpha = rs / l2_inner(p, q);
    out.direction += alpha * p;
    res -= alpha * q;
    const double rs_new = l2_inner(res, res);
    ++out.cg_iterations;
    if (std::sqrt(rs_new) <= target) return out;
    p = res + (rs_new / rs) * p;
    rs = rs_new;
  }
  out.converged = false;  // cap reached; best iterate returned
  return out;
}

LevelResult LinearQuadraticSolver::solve(const LQConfig& config) {
  const auto start = Clock::now();
  const SemilinearProblem& problem = state_.problem();

  LevelResult result;
  result.level = mesh_.subdivisions();
  result.nodes = mesh_.node_count();

  std::vector<NodalField> iterates;

  NodalField xi = problem.y_d;
  Residual res = residual(xi);
  double f_norm = l2_norm(res.F);
  double phi = merit(xi, res.w);
  iterates.push_back(xi);

  int k = 0;
  for (; k < config.max_iterations; ++k) {
    {
      IterationRecord row;
      row.iteration = k;
      row.residual = f_norm;
      row.merit = phi;
      const auto counts = state_.counters().snapshot();
      row.solves = counts.solves;
      row.factorizations = counts.factorizations;
      result.trace.push_back(row);
    }
    if (f_norm <= config.residual_tolerance) {
      result.converged = true;
      break;
    }

    NewtonStep step = newton_step(xi, res.w, res.F, config.cg_max_iterations);
    if (!step.converged) result.warning = true;
    result.trace.back().cg_iterations = step.cg_iterations;

    // One solve gives S* direction; merit trials along the way are then free.
    const NodalField sw_direction = state_.apply_S_transpose(step.direction);
    const double slope = l2_inner(res.F, step.direction);

    double t = 1.0;
    NodalField xi_trial, w_trial;
    double phi_trial = 0.0;
    bool accepted = false;
    for (int halving = 0; halving <= config.max_halvings; ++halving) {
      xi_trial = xi + t * step.direction;
      w_trial = res.w + t * sw_direction;
      phi_trial = merit(xi_trial, w_trial);
      if (phi_trial <= phi + config.armijo_sigma * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) result.warning = true;  // keep the last (smallest) trial

    xi = xi_trial;
    phi = phi_trial;
    const LoadVector b = integrate_sign(mesh_, w_trial);
    res.w = w_trial;
    res.F = xi + problem.u_bound * state_.apply_S(b) - problem.y_d;
    f_norm = l2_norm(res.F);
    result.trace.back().rho = t;
    iterates.push_back(xi);
  }
  result.outer_iterations = static_cast<int>(iterates.size()) - 1;
  if (!result.converged && f_norm <= config.residual_tolerance) result.converged = true;

  const ZeroLevelSet levelset = extract_zero_levelset(mesh_, res.w);
  result.degenerate_elements = static_cast<int>(levelset.degenerate_elements.size());
  result.boundary_cut_elements = levelset.boundary_cut_elements;
  result.final_w = res.w;
  result.final_xi = xi;
  // Primal objective 1/2 ||S u - y_d||^2 with S u = y_d - xi + F(xi).
  const NodalField y = problem.y_d - xi + res.F;
  result.final_objective = 0.5 * l2_inner(y - problem.y_d, y - problem.y_d);

  const auto counts = state_.counters().snapshot();
  result.factorizations = counts.factorizations;
  result.solves = counts.solves;
  result.wall_time_s = seconds_since(start);
  fill_error_to_final(result, iterates, *this);
  return result;
}

LevelResult LinearQuadraticSolver::fixed_point(const FixedPointConfig& config) {
  const auto start = Clock::now();
  const SemilinearProblem& problem = state_.problem();

  LevelResult result;
  result.level = mesh_.subdivisions();
  result.nodes = mesh_.node_count();

  const double yd_norm = l2_norm(problem.y_d);
  NodalField xi = problem.y_d;
  double previous_step = 0.0;

  int k = 0;
  NodalField w;
  for (; k < config.max_iterations; ++k) {
    w = state_.apply_S_transpose(xi);
    const LoadVector b = integrate_sign(mesh_, w);
    const NodalField xi_next = problem.y_d - problem.u_bound * state_.apply_S(b);
    const double step_norm = l2_norm(xi_next - xi);

    IterationRecord row;
    row.iteration = k;
    row.residual = step_norm;
    row.merit = merit(xi, w);
    row.rho = previous_step > 0.0 ? step_norm / previous_step : 0.0;  // contraction estimate
    const auto counts = state_.counters().snapshot();
    row.solves = counts.solves;
    row.factorizations = counts.factorizations;
    result.trace.push_back(row);

    xi = xi_next;
    previous_step = step_norm;
    if (step_norm <= config.step_tolerance) {
      result.converged = true;
      ++k;
      break;
    }
    if (l2_norm(xi) > config.divergence_factor * yd_norm) {
      result.diverged = true;
      ++k;
      break;
    }
  }
  result.outer_iterations = k;

  w = state_.apply_S_transpose(xi);
  const ZeroLevelSet levelset = extract_zero_levelset(mesh_, w);
  result.degenerate_elements = static_cast<int>(levelset.degenerate_elements.size());
  result.boundary_cut_elements = levelset.boundary_cut_elements;
  result.final_w = w;
  result.final_xi = xi;
  const NodalField y = problem.y_d - xi;  // at the fixed point, S u = y_d - xi
  result.final_objective = 0.5 * l2_inner(y - problem.y_d, y - problem.y_d);

  const auto counts = state_.counters().snapshot();
  result.factorizations = counts.factorizations;
  result.solves = counts.solves;
  result.wall_time_s = seconds_since(start);
  return result;
}

}  // namespace bangbang
