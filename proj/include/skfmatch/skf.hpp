#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "skfmatch/motion.hpp"
#include "skfmatch/observation.hpp"
#include "skfmatch/road_map.hpp"

namespace skfmatch {

struct SkfConfig {
  /// Prior mass on staying on the same segment between steps.
  double stay_probability = 0.8;
  /// Unnormalized mass towards each current candidate not connected to the previous segment.
  double jump_epsilon = 1e-3;
  /// Hypotheses whose normalized weight falls below this are dropped.
  double prune_threshold = 1e-2;
  /// Smallest prior mass a candidate can carry, so its log stays finite.
  double weight_floor = 1e-300;

  void validate() const;
};

/// One mode of the switching filter: the vehicle is on `segment_id`, with the
/// mode-conditional pose estimate.
struct Hypothesis {
  SegmentId segment_id = 0;
  StateEstimate estimate;
  double weight = 0.0;
};

/// Distinct segment ids; weights sum to one.
using HypothesisSet = std::vector<Hypothesis>;

/// Row-stochastic switching matrix between the previous and the current modes.
struct ModeTransition {
  std::vector<SegmentId> from;
  std::vector<SegmentId> to;
  Eigen::MatrixXd probability;  // |from| x |to|

  double operator()(Eigen::Index i, Eigen::Index j) const { return probability(i, j); }
};

ModeTransition mode_transition(std::span<const SegmentId> prev_ids,
                               std::span<const SegmentId> curr_ids, const RoadMap& map,
                               const SkfConfig& cfg);

class SingularInnovation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KalmanUpdate {
  StateEstimate posterior;
  double log_likelihood = 0.0;
};

/// Kalman measurement update in Joseph form. `angle_row`, when set, names the observation
/// row holding a heading; its innovation is wrapped to (-pi, pi].
KalmanUpdate kf_update(const StateEstimate& prior, const Eigen::VectorXd& z,
                       const Eigen::MatrixXd& h, const Eigen::MatrixXd& r,
                       std::optional<Eigen::Index> angle_row = std::nullopt);

KalmanUpdate update_with(const StateEstimate& prior, const CartoObservation& obs);
KalmanUpdate update_with(const StateEstimate& prior, const GpsObservation& obs);

/// Moment-matched single Gaussian of a weighted mixture. Headings are averaged on the circle
/// around the heaviest component. Weights need not be normalized.
StateEstimate moment_match(std::span<const StateEstimate> components,
                           std::span<const double> weights);
StateEstimate moment_match(const HypothesisSet& set);

/// exp-normalizes log weights with max subtraction. Returns false when no entry is finite.
bool normalize_log_weights(std::span<const double> log_weights, std::span<double> out);

struct Candidate {
  const Segment* segment = nullptr;
  CartoObservation observation;
};

struct StepOutcome {
  HypothesisSet hypotheses;  // same order as the candidates
  /// Every candidate had a non-finite weight; weights were reset to uniform.
  bool uniform_fallback = false;
};

/// One switching-filter cycle (GPB1): per current candidate, mix predecessors through the
/// transition matrix, predict with odometry, update with the candidate's cartographic
/// observation and then the GPS observation when present, and weight by evidence.
StepOutcome skf_step(const HypothesisSet& set, const ElementaryMotion& motion,
                     std::span<const Candidate> candidates,
                     const std::optional<GpsObservation>& gps, const ModeTransition& transition,
                     const SkfConfig& cfg, const VehicleParams& params);

/// Drops hypotheses below the prune threshold (never all of them) and renormalizes.
HypothesisSet normalize_and_prune(HypothesisSet set, const SkfConfig& cfg);

/// Highest weight; ties go to the smaller segment id.
const Hypothesis& best_hypothesis(const HypothesisSet& set);

}  // namespace skfmatch
