#include "bangbang/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bangbang {

namespace {

std::string format_double(const char* fmt, double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), fmt, v);
  return buffer;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

void write_table_csv(const RunReport& report, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "nodes,iters,facts,solves,time_s,converged\n";
  for (const LevelResult& level : report.levels) {
    out << level.nodes << ',' << level.outer_iterations << ',' << level.factorizations << ','
        << level.solves << ',' << format_double("%.4f", level.wall_time_s) << ','
        << (level.converged ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_trace_csv(const LevelResult& level, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "iter,residual,merit,radius,rho,accepted,boundary_hit,cg_iters,solves,facts,"
         "error_to_final\n";
  for (const IterationRecord& row : level.trace) {
    out << row.iteration << ',' << format_double("%.12e", row.residual) << ','
        << format_double("%.12e", row.merit) << ',' << format_double("%.12e", row.radius) << ','
        << format_double("%.12e", row.rho) << ',' << (row.accepted ? 1 : 0) << ','
        << (row.boundary_hit ? 1 : 0) << ',' << row.cg_iterations << ',' << row.solves << ','
        << row.factorizations << ',' << format_double("%.12e", row.error_to_final) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<TableRow> read_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty table: " + path);
  if (line != "nodes,iters,facts,solves,time_s,converged") {
    throw std::runtime_error("unexpected table header in " + path);
  }
  std::vector<TableRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    TableRow row;
    char comma = 0;
    int converged = 0;
    ss >> row.nodes >> comma >> row.iters >> comma >> row.facts >> comma >> row.solves >>
        comma >> row.time_s >> comma >> converged;
    if (!ss) throw std::runtime_error("bad table row in " + path + ": " + line);
    row.converged = converged != 0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bangbang
