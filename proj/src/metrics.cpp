#include "windhybrid/metrics.hpp"

#include <cmath>

#include "windhybrid/types.hpp"

namespace windhybrid {

MetricsReport compute_metrics(std::span<const double> predictions,
                              std::span<const double> targets,
                              double mape_floor) {
  if (predictions.size() != targets.size())
    throw DataError("metrics: prediction/target length mismatch");
  const std::size_t n = targets.size();
  if (n == 0)
    throw DataError("metrics: empty input");

  double abs_sum = 0, sq_sum = 0, y_sum = 0;
  double ape_sum = 0;
  std::size_t ape_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = predictions[i] - targets[i];
    abs_sum += std::fabs(e);
    sq_sum += e * e;
    y_sum += targets[i];
    if (std::fabs(targets[i]) >= mape_floor) {
      ape_sum += std::fabs(e / targets[i]);
      ++ape_n;
    }
  }
  if (ape_n == 0)
    throw DataError("metrics: every target lies below the MAPE floor");

  const double y_mean = y_sum / static_cast<double>(n);
  double var_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = targets[i] - y_mean;
    var_sum += d * d;
  }
  if (!(var_sum > 0))
    throw DataError("metrics: zero target variance, R2 undefined");

  MetricsReport report;
  report.n = n;
  report.mae = abs_sum / static_cast<double>(n);
  report.rmse = std::sqrt(sq_sum / static_cast<double>(n));
  report.mape = 100.0 * ape_sum / static_cast<double>(ape_n);
  report.r2 = 1.0 - sq_sum / var_sum;
  return report;
}

} // namespace windhybrid
