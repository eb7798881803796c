#include "skfmatch/skf.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace skfmatch {

namespace {

constexpr double kInnovationJitter = 1e-9;
const double kLog2Pi = std::log(2.0 * kPi);

Eigen::Matrix3d symmetrized(const Eigen::Matrix3d& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

void SkfConfig::validate() const {
  if (!(stay_probability > 0.0 && stay_probability < 1.0)) {
    throw std::invalid_argument("stay_probability must lie in (0, 1)");
  }
  if (!(jump_epsilon >= 0.0)) throw std::invalid_argument("jump_epsilon must be >= 0");
  if (!(prune_threshold >= 0.0 && prune_threshold < 1.0)) {
    throw std::invalid_argument("prune_threshold must lie in [0, 1)");
  }
  if (!(weight_floor > 0.0)) throw std::invalid_argument("weight_floor must be > 0");
}

ModeTransition mode_transition(std::span<const SegmentId> prev_ids,
                               std::span<const SegmentId> curr_ids, const RoadMap& map,
                               const SkfConfig& cfg) {
  if (curr_ids.empty()) throw std::invalid_argument("mode transition needs current candidates");

  ModeTransition t;
  t.from.assign(prev_ids.begin(), prev_ids.end());
  t.to.assign(curr_ids.begin(), curr_ids.end());
  const auto rows = static_cast<Eigen::Index>(prev_ids.size());
  const auto cols = static_cast<Eigen::Index>(curr_ids.size());
  t.probability = Eigen::MatrixXd::Zero(rows, cols);

  for (Eigen::Index i = 0; i < rows; ++i) {
    const SegmentId prev = prev_ids[i];
    const Segment* seg = map.find(prev);

    bool stays = false;
    Eigen::Index connected = 0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (curr_ids[j] == prev) {
        stays = true;
      } else if (seg != nullptr && seg->is_connected_to(curr_ids[j])) {
        ++connected;
      }
    }

    const double moving = stays ? 1.0 - cfg.stay_probability : 1.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      double& b = t.probability(i, j);
      if (curr_ids[j] == prev) {
        b = cfg.stay_probability;
      } else if (seg != nullptr && seg->is_connected_to(curr_ids[j])) {
        b = moving / static_cast<double>(connected);
      } else {
        b = cfg.jump_epsilon;
      }
    }

    const double total = t.probability.row(i).sum();
    if (total > 0.0) {
      t.probability.row(i) /= total;
    } else {
      t.probability.row(i).setConstant(1.0 / static_cast<double>(cols));
    }
  }
  return t;
}

KalmanUpdate kf_update(const StateEstimate& prior, const Eigen::VectorXd& z,
                       const Eigen::MatrixXd& h, const Eigen::MatrixXd& r,
                       std::optional<Eigen::Index> angle_row) {
  const Eigen::Index m = z.size();
  if (h.rows() != m || h.cols() != 3 || r.rows() != m || r.cols() != m) {
    throw std::invalid_argument("kf_update: inconsistent observation dimensions");
  }

  const Eigen::Vector3d x = prior.mean.vector();
  const Eigen::Matrix3d& p = prior.cov;

  Eigen::VectorXd innovation = z - h * x;
  if (angle_row) innovation(*angle_row) = normalize_angle(innovation(*angle_row));

  Eigen::MatrixXd s = h * p * h.transpose() + r;
  s = 0.5 * (s + s.transpose());
  if (!s.allFinite()) throw SingularInnovation("innovation covariance is not finite");
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    s.diagonal().array() += kInnovationJitter;
    llt.compute(s);
    if (llt.info() != Eigen::Success) {
      throw SingularInnovation("innovation covariance is not positive definite");
    }
  }

  // K = P H^T S^-1, computed as (S^-1 H P)^T.
  const Eigen::MatrixXd gain = llt.solve(h * p).transpose();
  const Eigen::Vector3d x_post = x + gain * innovation;
  const Eigen::Matrix3d i_kh = Eigen::Matrix3d::Identity() - gain * h;
  const Eigen::Matrix3d p_post = i_kh * p * i_kh.transpose() + gain * r * gain.transpose();

  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double mahalanobis = innovation.dot(llt.solve(innovation));

  KalmanUpdate out;
  out.posterior.mean = Pose::from_vector(x_post);
  out.posterior.cov = symmetrized(p_post);
  out.log_likelihood = -0.5 * (mahalanobis + log_det + static_cast<double>(m) * kLog2Pi);
  return out;
}

KalmanUpdate update_with(const StateEstimate& prior, const CartoObservation& obs) {
  return kf_update(prior, obs.z, Eigen::Matrix3d::Identity(), obs.cov, Eigen::Index{2});
}

KalmanUpdate update_with(const StateEstimate& prior, const GpsObservation& obs) {
  return kf_update(prior, obs.z, obs.h, obs.cov);
}

StateEstimate moment_match(std::span<const StateEstimate> components,
                           std::span<const double> weights) {
  if (components.empty() || components.size() != weights.size()) {
    throw std::invalid_argument("moment_match: empty or mismatched mixture");
  }
  double total = 0.0;
  std::size_t heaviest = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    if (weights[i] > weights[heaviest]) heaviest = i;
  }
  const std::size_t n = components.size();
  auto coeff = [&](std::size_t i) {
    return total > 0.0 ? weights[i] / total : 1.0 / static_cast<double>(n);
  };

  const double ref = components[heaviest].mean.theta;
  std::vector<Eigen::Vector3d> unwrapped(n);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Pose& p = components[i].mean;
    unwrapped[i] = {p.x, p.y, ref + angle_difference(p.theta, ref)};
    mean += coeff(i) * unwrapped[i];
  }
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d d = unwrapped[i] - mean;
    cov += coeff(i) * (components[i].cov + d * d.transpose());
  }

  StateEstimate out;
  out.mean = Pose::from_vector(mean);
  out.cov = symmetrized(cov);
  return out;
}

StateEstimate moment_match(const HypothesisSet& set) {
  std::vector<StateEstimate> components;
  std::vector<double> weights;
  components.reserve(set.size());
  weights.reserve(set.size());
  for (const Hypothesis& h : set) {
    components.push_back(h.estimate);
    weights.push_back(h.weight);
  }
  return moment_match(components, weights);
}

bool normalize_log_weights(std::span<const double> log_weights, std::span<double> out) {
  double max = -std::numeric_limits<double>::infinity();
  for (double l : log_weights) {
    if (std::isfinite(l)) max = std::max(max, l);
  }
  if (!std::isfinite(max)) return false;

  double sum = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double l = log_weights[i];
    out[i] = std::isfinite(l) ? std::exp(l - max) : 0.0;
    sum += out[i];
  }
  for (std::size_t i = 0; i < log_weights.size(); ++i) out[i] /= sum;
  return true;
}

StepOutcome skf_step(const HypothesisSet& set, const ElementaryMotion& motion,
                     std::span<const Candidate> candidates,
                     const std::optional<GpsObservation>& gps, const ModeTransition& transition,
                     const SkfConfig& cfg, const VehicleParams& params) {
  if (set.empty()) throw std::invalid_argument("skf_step: empty hypothesis set");
  if (candidates.empty()) throw std::invalid_argument("skf_step: no candidates");
  if (transition.probability.rows() != static_cast<Eigen::Index>(set.size()) ||
      transition.probability.cols() != static_cast<Eigen::Index>(candidates.size())) {
    throw std::invalid_argument("skf_step: transition matrix does not match the mode sets");
  }

  std::vector<StateEstimate> previous;
  std::vector<double> prev_weights;
  previous.reserve(set.size());
  prev_weights.reserve(set.size());
  for (const Hypothesis& h : set) {
    previous.push_back(h.estimate);
    prev_weights.push_back(h.weight);
  }

  const std::size_t n = candidates.size();
  StepOutcome outcome;
  outcome.hypotheses.resize(n);
  std::vector<double> log_weights(n);
  std::vector<double> mixing(set.size());

  for (std::size_t j = 0; j < n; ++j) {
    const Candidate& cand = candidates[j];
    const SegmentId id = cand.observation.segment_id;

    double mass = 0.0;
    bool has_predecessor = false;
    for (std::size_t i = 0; i < set.size(); ++i) {
      mixing[i] = prev_weights[i] * transition(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(j));
      mass += mixing[i];
      const SegmentId prev = set[i].segment_id;
      if (prev == id || (cand.segment != nullptr && cand.segment->is_connected_to(prev))) {
        has_predecessor = true;
      }
    }

    // A segment with no connected predecessor starts from the whole prior set.
    const StateEstimate mixed = has_predecessor && mass > 0.0
                                    ? moment_match(previous, mixing)
                                    : moment_match(previous, prev_weights);

    StateEstimate estimate = predict(mixed, motion, params);
    double log_likelihood = 0.0;
    try {
      KalmanUpdate carto = update_with(estimate, cand.observation);
      estimate = carto.posterior;
      log_likelihood += carto.log_likelihood;
      if (gps) {
        KalmanUpdate fix = update_with(estimate, *gps);
        estimate = fix.posterior;
        log_likelihood += fix.log_likelihood;
      }
    } catch (const SingularInnovation&) {
      log_likelihood = -std::numeric_limits<double>::infinity();
    }

    outcome.hypotheses[j].segment_id = id;
    outcome.hypotheses[j].estimate = estimate;
    log_weights[j] = std::log(std::max(mass, cfg.weight_floor)) + log_likelihood;
  }

  // Normalize in id order so a permutation of the candidates permutes the result exactly.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return outcome.hypotheses[l].segment_id < outcome.hypotheses[r].segment_id;
  });
  std::vector<double> sorted_logs(n);
  std::vector<double> sorted_weights(n);
  for (std::size_t k = 0; k < n; ++k) sorted_logs[k] = log_weights[order[k]];

  if (normalize_log_weights(sorted_logs, sorted_weights)) {
    for (std::size_t k = 0; k < n; ++k) outcome.hypotheses[order[k]].weight = sorted_weights[k];
  } else {
    outcome.uniform_fallback = true;
    for (auto& h : outcome.hypotheses) h.weight = 1.0 / static_cast<double>(n);
  }
  return outcome;
}

HypothesisSet normalize_and_prune(HypothesisSet set, const SkfConfig& cfg) {
  if (set.empty()) throw std::invalid_argument("normalize_and_prune: empty hypothesis set");

  double total = 0.0;
  for (const Hypothesis& h : set) total += h.weight;
  if (!(total > 0.0) || !std::isfinite(total)) {
    for (auto& h : set) h.weight = 1.0;
    total = static_cast<double>(set.size());
  }
  for (auto& h : set) h.weight /= total;

  const Hypothesis best = best_hypothesis(set);
  std::erase_if(set, [&](const Hypothesis& h) { return h.weight < cfg.prune_threshold; });
  if (set.empty()) set.push_back(best);

  total = 0.0;
  for (const Hypothesis& h : set) total += h.weight;
  for (auto& h : set) h.weight /= total;
  return set;
}

const Hypothesis& best_hypothesis(const HypothesisSet& set) {
  if (set.empty()) throw std::invalid_argument("best_hypothesis: empty hypothesis set");
  const Hypothesis* best = &set.front();
  for (const Hypothesis& h : set) {
    if (h.weight > best->weight || (h.weight == best->weight && h.segment_id < best->segment_id)) {
      best = &h;
    }
  }
  return *best;
}

}  // namespace skfmatch
