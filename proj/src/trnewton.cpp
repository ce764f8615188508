#include "bangbang/trnewton.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bangbang {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Positive root of ||x + sigma d||_D^2 = radius^2.
double boundary_parameter(double x_dx, double x_dd, double d_dd, double radius) {
  const double c = x_dx - radius * radius;
  const double disc = x_dd * x_dd - d_dd * c;
  const double root = std::sqrt(std::max(disc, 0.0));
  return (-x_dd + root) / d_dd;
}

}  // namespace

void TRConfig::validate() const {
  if (!(0.0 < eta2 && eta2 <= eta1 && eta1 < 1.0)) {
    throw std::invalid_argument("TRConfig: need 0 < eta2 <= eta1 < 1");
  }
  if (!(0.0 < gamma1 && gamma1 < 1.0 && 1.0 < gamma2)) {
    throw std::invalid_argument("TRConfig: need 0 < gamma1 < 1 < gamma2");
  }
  if (!(theta1 > 1.0) || !(theta2 > 0.0)) {
    throw std::invalid_argument("TRConfig: need theta1 > 1 and theta2 > 0");
  }
}

SteihaugResult steihaug_cg(const SignDerivativeMatrix& D, const ReducedHessian& f_second,
                           double scale, const NodalField& r, double radius, double tolerance,
                           int max_iterations) {
  SteihaugResult out;
  out.step = NodalField::Zero(r.size());
  out.t_step = NodalField::Zero(r.size());

  NodalField g = r;  // residual of T x = -r at x = 0
  NodalField d = -g;
  double rs = g.dot(D.apply(g));
  const double rs0 = rs;
  if (std::sqrt(rs) <= tolerance) return out;

  double x_dx = 0.0;  // ||x||_D^2, maintained incrementally

  for (int j = 0; j < max_iterations; ++j) {
    const LoadVector dd_load = D.apply(d);
    const double d_dd = d.dot(dd_load);
    // Directions invisible to the seminorm cannot change any measured
    // quantity; cut them off instead of dividing by zero.
    if (d_dd <= 1e-14 * rs0) {
      out.warning = true;
      return out;
    }
    const NodalField t_d = d + scale * f_second.apply(dd_load);
    const double curvature = dd_load.dot(t_d);
    const double x_dd = out.step.dot(dd_load);
    ++out.iterations;

    if (curvature <= 0.0) {
      const double sigma = boundary_parameter(x_dx, x_dd, d_dd, radius);
      out.step += sigma * d;
      out.t_step += sigma * t_d;
      out.boundary_hit = true;
      return out;
    }

    const double alpha = rs / curvature;
    const double x_dx_new = x_dx + 2.0 * alpha * x_dd + alpha * alpha * d_dd;
    if (x_dx_new >= radius * radius) {
      const double sigma = boundary_parameter(x_dx, x_dd, d_dd, radius);
      out.step += sigma * d;
      out.t_step += sigma * t_d;
      out.boundary_hit = true;
      return out;
    }

    out.step += alpha * d;
    out.t_step += alpha * t_d;
    x_dx = x_dx_new;
    g += alpha * t_d;
    const double rs_new = g.dot(D.apply(g));
    if (std::sqrt(rs_new) <= tolerance) return out;
    d = -g + (rs_new / rs) * d;
    rs = rs_new;
  }
  out.warning = true;
  return out;
}

TrustRegionSolver::TrustRegionSolver(StateSolver& state)
    : state_(state), mesh_(state.mesh()), mass_(state.mass()) {}

double TrustRegionSolver::evaluate_objective(const NodalField& w, const NodalField& y_warm,
                                             NodalField& y_out) {
  const ZeroLevelSet levelset = extract_zero_levelset(mesh_, w);
  const LoadVector load = state_.problem().u_bound * integrate_sign(mesh_, w, levelset);
  try {
    y_out = state_.solve_state(load, y_warm);
  } catch (const NonConvergence&) {
    y_out = state_.solve_state(load, NodalField::Zero(mesh_.node_count()));
  }
  const NodalField d = y_out - state_.problem().y_d;
  return 0.5 * l2_inner(d, d);
}

TrustRegionSolver::Evaluation TrustRegionSolver::evaluate(const NodalField& w,
                                                          const NodalField& y_warm) {
  Evaluation eval;
  eval.w = w;
  eval.levelset = extract_zero_levelset(mesh_, w);
  const LoadVector load = state_.problem().u_bound * integrate_sign(mesh_, w, eval.levelset);
  try {
    eval.y = state_.solve_state(load, y_warm);
  } catch (const NonConvergence&) {
    eval.y = state_.solve_state(load, NodalField::Zero(mesh_.node_count()));
  }
  eval.linearization = state_.linearize(eval.y);
  eval.p = eval.linearization->solve_adjoint(state_.problem().y_d);
  const NodalField d = eval.y - state_.problem().y_d;
  eval.objective = 0.5 * l2_inner(d, d);
  eval.D = assemble_sign_derivative(mesh_, eval.levelset);
  eval.r = eval.w + eval.p;
  eval.f_second = std::make_shared<ReducedHessian>(
      eval.linearization->make_reduced_hessian(eval.linearization, eval.p));
  return eval;
}

LoadVector TrustRegionSolver::apply_H(const Evaluation& eval, const NodalField& v) const {
  const LoadVector dv = eval.D.apply(v);
  return eval.D.apply(v + hessian_scale() * eval.f_second->apply(dv));
}

LevelResult TrustRegionSolver::solve(const TRConfig& config, const Observer& observer) {
  config.validate();
  const auto start = Clock::now();
  const SemilinearProblem& problem = state_.problem();
  const double scale = hessian_scale();

  LevelResult result;
  result.level = mesh_.subdivisions();
  result.nodes = mesh_.node_count();

  // Initial iterate w0 = -p(u = 0), the adjoint at zero control.
  NodalField y0;
  {
    const LoadVector zero_load = LoadVector::Zero(mesh_.node_count());
    y0 = state_.solve_state(zero_load, NodalField::Zero(mesh_.node_count()));
  }
  const NodalField p0 = state_.linearize(y0)->solve_adjoint(problem.y_d);
  Evaluation eval = evaluate(-p0, y0);

  double radius = config.delta0;
  if (radius <= 0.0) {
    radius = std::max(1.0, std::sqrt(eval.w.dot(eval.D.apply(eval.w))));
  }

  int k = 0;
  for (; k < config.max_iterations; ++k) {
    const LoadVector gradient = eval.D.apply(eval.r);
    const double r_seminorm = std::sqrt(eval.r.dot(gradient));
    const double gradient_inf = gradient.lpNorm<Eigen::Infinity>();

    IterationRecord row;
    row.iteration = k;
    row.residual = r_seminorm;
    row.merit = eval.objective;
    row.radius = radius;
    {
      const auto counts = state_.counters().snapshot();
      row.solves = counts.solves;
      row.factorizations = counts.factorizations;
    }

    if (r_seminorm <= config.gradient_tolerance && gradient_inf <= 1e-9) {
      result.converged = true;
      result.trace.push_back(row);
      break;
    }

    // Tolerance line of the globalization, with the printed minus sign;
    // ||w - p||_w and ||w + p||_w coincide identically because D w = 0.
    const NodalField q = eval.w - eval.p;
    const double q_seminorm = std::sqrt(q.dot(eval.D.apply(q)));
    const double tau =
        std::min(std::pow(q_seminorm, config.theta1), config.theta2 * q_seminorm);

    SteihaugResult cg = steihaug_cg(eval.D, *eval.f_second, scale, eval.r, radius, tau,
                                    config.cg_max_iterations);
    if (cg.warning) result.warning = true;
    const LoadVector d_step = eval.D.apply(cg.step);
    const double step_seminorm = std::sqrt(std::max(0.0, cg.step.dot(d_step)));

    // Exact Gauss-Newton model of the objective along the step.
    const double pred =
        scale * (-(0.5 * d_step.dot(cg.t_step) + gradient.dot(cg.step)));

    NodalField y_trial;
    const double objective_trial = evaluate_objective(eval.w + cg.step, eval.y, y_trial);
    const double ared = eval.objective - objective_trial;
    const double rho =
        pred > 0.0 ? ared / pred : -std::numeric_limits<double>::infinity();

    row.rho = rho;
    row.boundary_hit = cg.boundary_hit;
    row.cg_iterations = cg.iterations;
    row.accepted = rho >= config.eta2;

    if (observer) {
      StepInfo info;
      info.eval = &eval;
      info.step = &cg.step;
      info.pred = pred;
      info.ared = ared;
      info.rho = rho;
      info.radius = radius;
      info.step_seminorm = step_seminorm;
      info.accepted = row.accepted;
      info.boundary_hit = cg.boundary_hit;
      observer(info);
    }

    if (row.accepted) {
      const NodalField w_next = eval.w + cg.step;
      eval = evaluate(w_next, y_trial);
      if (rho >= config.eta1) radius = std::max(radius, config.gamma2 * step_seminorm);
    } else {
      radius = config.gamma1 * step_seminorm;
    }
    {
      const auto counts = state_.counters().snapshot();
      row.solves = counts.solves;
      row.factorizations = counts.factorizations;
    }
    result.trace.push_back(row);

    if (radius < 1e-14 * std::max(1.0, eval.w.norm())) {
      result.warning = true;  // radius collapsed; no further progress possible
      ++k;
      break;
    }
  }
  result.outer_iterations = k;

  result.degenerate_elements = static_cast<int>(eval.levelset.degenerate_elements.size());
  result.boundary_cut_elements = eval.levelset.boundary_cut_elements;
  result.final_w = eval.w;
  result.final_objective = eval.objective;

  const auto counts = state_.counters().snapshot();
  result.factorizations = counts.factorizations;
  result.solves = counts.solves;
  result.wall_time_s = seconds_since(start);
  return result;
}

}  // namespace bangbang
