#pragma once

#include <string>
#include <vector>

#include "rkhs_motion/trajectory.hpp"
#include "rkhs_motion/world.hpp"

namespace rkhs {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional symmetric error bars
};

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series);

// Obstacles (with margin) and arm poses sampled along the trajectory.
std::string scene_svg(const Scene& scene, const Trajectory* xi, int poses = 12);

}  // namespace rkhs
