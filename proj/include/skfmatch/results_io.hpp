#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "skfmatch/matcher.hpp"
#include "skfmatch/road_map.hpp"
#include "skfmatch/simulator.hpp"

namespace skfmatch {

/// Column header of the per-step results CSV.
inline constexpr const char* kResultsHeader =
    "step,time,best_segment,x,y,theta,weight_best,n_hypotheses,gps_used,hypotheses,"
    "n_candidates,off_road,cov_xx,cov_xy,cov_xtheta,cov_yy,cov_ytheta,cov_thetatheta";

/// One row per step. `hypotheses` is "id:weight;id:weight;...".
void write_results_csv(std::ostream& out, const std::vector<MatchResult>& results);
/// Reads back what write_results_csv produced. Hypothesis poses are not stored and come back
/// as the best pose.
std::vector<MatchResult> read_results_csv(std::istream& in);

inline constexpr const char* kTruthHeader = "step,time,x,y,theta,segment_id";

/// The initial pose is written as step -1.
void write_truth_csv(std::ostream& out, const GroundTruth& truth);
GroundTruth read_truth_csv(std::istream& in);

/// FeatureCollection: the best-pose track as a LineString plus one Point per step carrying the
/// hypothesis weights. Coordinates are WGS84 lon/lat.
std::string track_to_geojson(const RoadMap& map, const std::vector<MatchResult>& results);

}  // namespace skfmatch
