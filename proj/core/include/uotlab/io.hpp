#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uotlab/asymptotics.hpp"
#include "uotlab/exact_solver.hpp"
#include "uotlab/experiments.hpp"
#include "uotlab/reg_solver.hpp"
#include "uotlab/types.hpp"

namespace uotlab {

/// Problem JSON:
///   {"points_x": [[..]], "points_y": [[..]], "mu": [..], "nu": [..],
///    "cost": {"kind": "sqeuclidean"|"euclidean"|"explicit", "matrix": [[..]]?},
///    "divergence": {"kind": "kl"|"quadratic", "normalized": bool?,
///                   "q": {"mu_ref": [..], "nu_ref": [..]}?}}
/// Malformed documents raise kInvalidInput.
std::string problem_to_json(const Problem& problem);
Problem problem_from_json(const std::string& text);

/// Whole-file helpers; failures to open raise kIo.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

Problem read_problem(const std::string& path);
void write_problem(const std::string& path, const Problem& problem);

/// {"t", "phi", "psi", "gamma" (row-major), "iters", "grad_norm", ...}
std::string solution_to_json(const RegSolution& sol);

/// {"xi_star", "kappa" (row-major), "I0" ([[x, y], ...]), "m_star",
///  "gamma_star", "kappa_star_min", ...}
std::string exact_to_json(const ExactSolution& exact);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

inline constexpr const char* kCsvHeader =
    "t,dual_err,primal_err,ode_residual,entropy,iters,flags";

struct CsvRow {
  double t = 0.0;
  double dual_err = 0.0;
  double primal_err = 0.0;
  double ode_residual = 0.0;
  double entropy = 0.0;
  int iters = 0;
  std::uint32_t flags = 0;
};

CsvRow to_csv_row(const TrajectoryPoint& p);
std::string csv_string(const std::vector<CsvRow>& rows);
std::string csv_string(const std::vector<TrajectoryPoint>& points);
void emit_csv(const std::vector<TrajectoryPoint>& points, const std::string& path);
/// Parses csv_string output; kInvalidInput on a bad header or row.
std::vector<CsvRow> parse_csv(const std::string& text);

/// Slopes, r^2, dim E0, kappa*, d*, ODE residuals and exact-solution checks.
std::string diagnostics_to_json(const SweepResult& result, const Problem& problem);

}  // namespace uotlab
