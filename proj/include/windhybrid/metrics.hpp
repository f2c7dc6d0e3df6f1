#ifndef WINDHYBRID_METRICS_HPP
#define WINDHYBRID_METRICS_HPP

#include <cstddef>
#include <span>

namespace windhybrid {

struct MetricsReport {
  double mae = 0;  // kW
  double rmse = 0; // kW
  double mape = 0; // percent, over targets with |y| >= mape_floor
  double r2 = 0;
  std::size_t n = 0;
};

// Targets with |y| below this are excluded from MAPE to avoid division
// blow-up; the low-velocity cutoff removes most of them upstream.
inline constexpr double kMapeFloorKw = 1.0;

MetricsReport compute_metrics(std::span<const double> predictions,
                              std::span<const double> targets,
                              double mape_floor = kMapeFloorKw);

} // namespace windhybrid

#endif
