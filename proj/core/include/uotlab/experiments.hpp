#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uotlab/asymptotics.hpp"
#include "uotlab/exact_solver.hpp"
#include "uotlab/reg_solver.hpp"
#include "uotlab/types.hpp"

namespace uotlab {

enum class DatasetKind { kPointClouds, kGaussians1d };

const char* to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(const std::string& name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kPointClouds;
  DivergenceKind divergence = DivergenceKind::kKl;
  CostKind cost = CostKind::kSqEuclidean;
  std::uint64_t seed = 0;

  // point-clouds
  int n_x = 15;
  int n_y = 18;
  int n_outliers = 2;           // last points of Y
  double outlier_shift = 5.0;   // added to every coordinate
  double mass_x_clouds = 13.0;
  double mass_y_clouds = 15.0;

  // gaussians-1d
  int grid_nodes = 20;
  double mean_x = 0.3;
  double mean_y = 0.7;
  double std_dev = 0.1;
  double mass_x_gauss = 11.0;
  double mass_y_gauss = 10.0;
};

/// Deterministic given the DatasetSpec (the seed drives a fixed 64-bit generator; no
/// library distributions are involved).
Problem gen_dataset(const DatasetSpec& spec);

struct SweepConfig {
  double t_min = 1.0;
  double t_max = 1e4;
  int n_points = 60;
  bool warm_start = true;
  RegSolveConfig solver;
  ExactConfig exact;
  /// xi'(t) from extra solves at t r^k around every grid point. 0 disables
  /// the ODE column.
  double fd_ratio = 1.05;
  /// 3 (k = +-1, central difference) or 5 (k = +-1, +-2).
  int fd_points = 5;
  /// Worker threads for the ODE probe solves; results do not depend on it.
  int threads = 1;
};

struct SweepResult {
  ExactSolution exact;
  std::vector<TrajectoryPoint> points;
  std::optional<RateFit> dual_fit;
  std::optional<RateFit> primal_fit;
  std::optional<Vec> d_star;
  std::optional<RateFit> decay_fit;
  E0Report e0;
  double exact_entropy = 0.0;
};

/// Scalar checks over a finished sweep.
struct SweepSummary {
  double primal_value = 0.0;         // <c|gamma*> + F(A gamma*)
  double duality_gap = 0.0;          // primal_value + F*(-xi*)
  double max_complementarity = 0.0;  // max gamma* kappa
  double min_slack = 0.0;
  /// max ode_residual / ode_source over rows with t >= 10; empty when no
  /// such row has the ODE column.
  std::optional<double> ode_max_ratio;
  int ode_missing_rows = 0;          // rows with t >= 10 lacking the ODE column
  double max_entropy_excess = 0.0;   // max H(gamma(t)) - H(gamma*)
  double max_d_norm = 0.0;
  int nonconverged_rows = 0;
};

SweepSummary summarize_sweep(const SweepResult& result, const Problem& problem);

/// Geometric grid of n points from t_min to t_max inclusive.
std::vector<double> geometric_grid(double t_min, double t_max, int n);

/// Solves the exact problem once, then every t of the grid in ascending
/// order (warm-started), recording errors, entropy and the ODE residual.
/// Non-converged rows are flagged and left out of the fits.
SweepResult run_sweep(const Problem& problem, const SweepConfig& config = {});

/// Threads requested by UOTLAB_THREADS (default 1, invalid values -> 1).
int threads_from_env();

}  // namespace uotlab
