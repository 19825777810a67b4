#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uotlab/asymptotics.hpp"

namespace uotlab {

struct PlotSeries {
  std::vector<double> t;
  std::vector<double> err;
  std::optional<RateFit> fit;  // anchors the slope guides
};

/// Self-contained SVG with two log-log panels, primal (left) and dual (right).
/// Each panel holds exactly two <path> elements: the measured curve and the
/// slope -1/2 and -1 guides (two subpaths of one path) anchored at the first
/// fitted point.
std::string svg_string(const PlotSeries& primal, const PlotSeries& dual,
                       const std::string& title = "");

/// Builds both series from sweep rows (non-positive errors are skipped).
std::string svg_string(const std::vector<TrajectoryPoint>& points,
                       const std::optional<RateFit>& primal_fit,
                       const std::optional<RateFit>& dual_fit,
                       const std::string& title = "");

void emit_svg(const std::vector<TrajectoryPoint>& points,
              const std::optional<RateFit>& primal_fit,
              const std::optional<RateFit>& dual_fit, const std::string& path,
              const std::string& title = "");

}  // namespace uotlab
