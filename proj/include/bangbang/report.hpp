#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bangbang/types.hpp"

namespace bangbang {

/// One outer-iteration row of a solver run.
struct IterationRecord {
  int iteration = 0;
  double residual = 0.0;  // ||F||_L2, ||xi_k+1 - xi_k||_L2, or ||r||_w by solver
  double merit = 0.0;     // Phi for the dual solvers, J for the trust-region solver
  double radius = 0.0;    // trust-region radius; 0 for the other solvers
  double rho = 0.0;       // acceptance ratio (TR), step length (Newton), contraction (FP)
  bool accepted = true;
  bool boundary_hit = false;
  int cg_iterations = 0;
  std::int64_t solves = 0;          // cumulative
  std::int64_t factorizations = 0;  // cumulative
  double error_to_final = 0.0;      // ||iterate - final iterate||_L2, filled post-run
};

/// Result of one mesh level.
struct LevelResult {
  int level = 0;  // subdivisions n
  Index nodes = 0;
  int outer_iterations = 0;
  std::int64_t factorizations = 0;
  std::int64_t solves = 0;
  double wall_time_s = 0.0;
  bool converged = false;
  bool diverged = false;
  bool warning = false;            // a fallback (line search, CG cap) fired
  int degenerate_elements = 0;     // at the final iterate
  int boundary_cut_elements = 0;   // at the final iterate
  double final_objective = 0.0;    // 1/2 ||y - y_d||^2 at the final control
  std::vector<IterationRecord> trace;
  NodalField final_w;   // field whose sign defines the control
  NodalField final_xi;  // dual variable (dual solvers only)
};

struct RunReport {
  std::vector<LevelResult> levels;
};

/// Writes `nodes,iters,facts,solves,time_s,converged`, one row per level,
/// with fixed formatting so identical reports give identical bytes.
void write_table_csv(const RunReport& report, const std::string& path);

/// Per-iteration trace with residual/merit/radius plus solver bookkeeping.
void write_trace_csv(const LevelResult& level, const std::string& path);

struct TableRow {
  long long nodes = 0;
  long long iters = 0;
  long long facts = 0;
  long long solves = 0;
  double time_s = 0.0;
  bool converged = false;
};

std::vector<TableRow> read_table_csv(const std::string& path);

}  // namespace bangbang
