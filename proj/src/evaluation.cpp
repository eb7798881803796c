#include <Eigen/Cholesky>
#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include "skfmatch/simulator.hpp"

namespace skfmatch {

namespace {

constexpr double kResolvedWeight = 0.95;

}  // namespace

double nees(const StateEstimate& estimate, const Pose& truth) {
  const Eigen::Vector3d err(truth.x - estimate.mean.x, truth.y - estimate.mean.y,
                            angle_difference(truth.theta, estimate.mean.theta));
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(estimate.cov);
  return err.dot(ldlt.solve(err));
}

Metrics evaluate(const std::vector<MatchResult>& results, const GroundTruth& truth) {
  if (results.size() != truth.steps.size()) {
    throw std::invalid_argument("evaluate: " + std::to_string(results.size()) +
                                " results for " + std::to_string(truth.steps.size()) +
                                " truth steps");
  }
  Metrics m;
  if (results.empty()) return m;

  std::size_t correct = 0;
  double squared = 0.0;
  double nees_sum = 0.0;
  std::optional<std::size_t> open;
  std::size_t previous_count = 0;

  for (std::size_t k = 0; k < results.size(); ++k) {
    const MatchResult& r = results[k];
    const TruthStep& t = truth.steps[k];

    if (r.best_segment == t.segment_id) ++correct;
    const double ex = r.best.mean.x - t.pose.x;
    const double ey = r.best.mean.y - t.pose.y;
    squared += ex * ex + ey * ey;
    m.nees.push_back(nees(r.best, t.pose));
    nees_sum += m.nees.back();

    const std::size_t count = r.hypotheses.size();
    if (!open && count >= 2 && (k == 0 || previous_count < 2)) open = k;
    if (open && r.weight_of(t.segment_id) > kResolvedWeight) {
      m.disambiguation.push_back({*open, k - *open});
      open.reset();
    }
    previous_count = count;
  }
  if (open) m.disambiguation.push_back({*open, std::nullopt});

  const auto n = static_cast<double>(results.size());
  m.correct_segment_rate = static_cast<double>(correct) / n;
  m.position_rmse = std::sqrt(squared / n);
  m.final_position_error = std::hypot(results.back().best.mean.x - truth.steps.back().pose.x,
                                      results.back().best.mean.y - truth.steps.back().pose.y);
  m.mean_nees = nees_sum / n;
  return m;
}

std::pair<double, double> chi_square_band(double dof, double confidence) {
  if (!(dof > 0.0) || !(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("chi_square_band: need dof > 0 and confidence in (0, 1)");
  }
  const boost::math::chi_squared dist(dof);
  return {boost::math::quantile(dist, 0.5 * (1.0 - confidence)),
          boost::math::quantile(dist, 0.5 * (1.0 + confidence))};
}

double band_coverage(const std::vector<double>& samples, std::pair<double, double> band) {
  if (samples.empty()) return 0.0;
  std::size_t inside = 0;
  for (double v : samples) {
    if (v >= band.first && v <= band.second) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(samples.size());
}

}  // namespace skfmatch
