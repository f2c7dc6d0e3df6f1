#ifndef WINDHYBRID_CONFORMAL_HPP
#define WINDHYBRID_CONFORMAL_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace windhybrid {

enum class ConformalMethod { split_absolute, cqr };

struct ConformalCalibration {
  ConformalMethod method = ConformalMethod::split_absolute;
  double alpha = 0.1;
  double q_hat = 0; // >= 0 for split_absolute; may be negative for cqr
  std::size_t calibration_size = 0;
};

// Nonconformity scores |prediction - y|; q_hat is the ceil((n+1)(1-alpha))-th
// smallest score (finite-sample-valid convention). Throws DataError when n is
// too small for the requested alpha.
ConformalCalibration calibrate_split(std::span<const double> predictions,
                                     std::span<const double> targets,
                                     double alpha);

// CQR scores max(lower - y, y - upper); same quantile convention. Intervals
// become [lower - q_hat, upper + q_hat].
ConformalCalibration calibrate_cqr(std::span<const double> lower,
                                   std::span<const double> upper,
                                   std::span<const double> targets,
                                   double alpha);

struct PredictionInterval {
  double point = 0;
  double lower = 0;
  double upper = 0;
  double alpha = 0;
};

PredictionInterval interval_split(double point, const ConformalCalibration& cal);

// Degenerate crossings (lower > upper after inflation) are clamped to the
// midpoint; the caller can count them via `crossed`.
PredictionInterval interval_cqr(double point, double lower, double upper,
                                const ConformalCalibration& cal,
                                bool* crossed = nullptr);

struct UncertaintyReport {
  double empirical_coverage = 0;
  double mean_interval_length = 0; // kW
  double alpha = 0;
  std::size_t evaluation_size = 0;
  std::size_t crossings = 0;
};

UncertaintyReport evaluate_uncertainty(std::span<const PredictionInterval> intervals,
                                       std::span<const double> targets);

} // namespace windhybrid

#endif
