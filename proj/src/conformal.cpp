#include "windhybrid/conformal.hpp"

#include <algorithm>
#include <cmath>

#include "windhybrid/types.hpp"

namespace windhybrid {

namespace {

// ceil((n+1)(1-alpha))-th order statistic of the scores.
double conformal_quantile(std::vector<double>& scores, double alpha) {
  const std::size_t n = scores.size();
  const double raw = std::ceil((static_cast<double>(n) + 1.0) * (1.0 - alpha));
  const auto k = static_cast<std::size_t>(raw);
  if (k > n)
    throw DataError("calibration set too small for alpha (need ceil((n+1)(1-alpha)) <= n)");
  if (k == 0)
    throw DataError("alpha too large: empty quantile index");
  auto kth = scores.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(scores.begin(), kth, scores.end());
  return *kth;
}

void check_alpha(double alpha) {
  if (!(alpha > 0 && alpha < 1))
    throw ConfigError("alpha must lie in (0,1)");
}

} // namespace

ConformalCalibration calibrate_split(std::span<const double> predictions,
                                     std::span<const double> targets,
                                     double alpha) {
  check_alpha(alpha);
  if (predictions.size() != targets.size())
    throw DataError("calibrate_split: length mismatch");
  if (predictions.size() < 10)
    throw DataError("calibrate_split: need at least 10 calibration points");

  std::vector<double> scores(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i)
    scores[i] = std::fabs(predictions[i] - targets[i]);

  ConformalCalibration cal;
  cal.method = ConformalMethod::split_absolute;
  cal.alpha = alpha;
  cal.calibration_size = predictions.size();
  cal.q_hat = conformal_quantile(scores, alpha);
  return cal;
}

ConformalCalibration calibrate_cqr(std::span<const double> lower,
                                   std::span<const double> upper,
                                   std::span<const double> targets,
                                   double alpha) {
  check_alpha(alpha);
  if (lower.size() != targets.size() || upper.size() != targets.size())
    throw DataError("calibrate_cqr: length mismatch");
  if (targets.size() < 10)
    throw DataError("calibrate_cqr: need at least 10 calibration points");

  std::vector<double> scores(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i)
    scores[i] = std::max(lower[i] - targets[i], targets[i] - upper[i]);

  ConformalCalibration cal;
  cal.method = ConformalMethod::cqr;
  cal.alpha = alpha;
  cal.calibration_size = targets.size();
  cal.q_hat = conformal_quantile(scores, alpha);
  return cal;
}

PredictionInterval interval_split(double point, const ConformalCalibration& cal) {
  if (cal.method != ConformalMethod::split_absolute)
    throw ConfigError("interval_split called with a CQR calibration");
  return {point, point - cal.q_hat, point + cal.q_hat, cal.alpha};
}

PredictionInterval interval_cqr(double point, double lower, double upper,
                                const ConformalCalibration& cal, bool* crossed) {
  if (cal.method != ConformalMethod::cqr)
    throw ConfigError("interval_cqr called with a split calibration");
  double lo = lower - cal.q_hat;
  double hi = upper + cal.q_hat;
  bool cross = lo > hi;
  if (cross)
    lo = hi = 0.5 * (lo + hi);
  if (crossed)
    *crossed = cross;
  return {point, lo, hi, cal.alpha};
}

UncertaintyReport evaluate_uncertainty(std::span<const PredictionInterval> intervals,
                                       std::span<const double> targets) {
  if (intervals.size() != targets.size())
    throw DataError("evaluate_uncertainty: length mismatch");
  if (intervals.empty())
    throw DataError("evaluate_uncertainty: empty evaluation set");

  UncertaintyReport report;
  report.alpha = intervals.front().alpha;
  report.evaluation_size = intervals.size();
  std::size_t inside = 0;
  double length = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (targets[i] >= intervals[i].lower && targets[i] <= intervals[i].upper)
      ++inside;
    length += intervals[i].upper - intervals[i].lower;
  }
  report.empirical_coverage =
      static_cast<double>(inside) / static_cast<double>(intervals.size());
  report.mean_interval_length = length / static_cast<double>(intervals.size());
  return report;
}

} // namespace windhybrid
