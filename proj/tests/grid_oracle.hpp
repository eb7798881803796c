#pragma once

// Brute-force discretized Bayes filter over the joint (pose, segment) space, used as a
// reference for the switching filter's mode posteriors. Shares no numerical code with the
// library: projection, ellipse covariance, transition rule and motion model are recoded here.

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "skfmatch/matcher.hpp"

namespace oracle {

struct GridProblem {
  std::vector<skfmatch::Segment> segments;
  skfmatch::MapErrorModel errors;
  double stay_probability = 0.8;
  skfmatch::StateEstimate initial;
  double sigma_s_per_m = 0.02;
  double sigma_theta_per_m = 0.02;
  double track = 1.5;
  std::vector<double> delta_s;
  std::vector<double> delta_theta;
  /// Per step, a GPS position and its covariance.
  std::vector<std::optional<std::pair<Eigen::Vector2d, Eigen::Matrix2d>>> gps;
};

struct GridSpec {
  double cell = 0.5;       // meters
  int heading_bins = 72;   // 5 degrees
  double margin = 20.0;    // meters around the trajectory's bounding box
};

/// Y-shaped fork with a stem and two branches meeting at one node, driven onto the left branch.
GridProblem fork_problem();

/// Per step, the posterior probability of each segment in `problem.segments` order.
std::vector<std::vector<double>> grid_mode_posteriors(const GridProblem& problem,
                                                      const GridSpec& spec = {});

/// The switching filter run on the same data, through the public matcher with every segment
/// kept as a candidate and pruning disabled. Same layout as grid_mode_posteriors.
std::vector<std::vector<double>> skf_mode_posteriors(const GridProblem& problem);

}  // namespace oracle
