#ifndef WINDHYBRID_PREPROCESS_HPP
#define WINDHYBRID_PREPROCESS_HPP

#include <cstddef>
#include <utility>

#include "windhybrid/types.hpp"

namespace windhybrid {

enum class SpreadEstimator {
  scaled_mad, // 1.4826 * median absolute deviation
  stddev,     // population standard deviation
};

struct PreprocessConfig {
  double betz_limit = kBetzLimit;
  double sigma_multiplier = 3.0;
  double v_cutoff = 3.5;      // m/s; retained when v == v_cutoff
  double bin_width = 0.5;     // m/s
  std::size_t max_iterations = 20;
  SpreadEstimator spread = SpreadEstimator::scaled_mad;
  double rho = 1.225;         // kg/m^3
  double rotor_radius = 41.0; // m
};

struct CleaningReport {
  std::size_t input_count = 0;
  std::size_t betz_rejected = 0;
  std::size_t anomaly_rejected = 0;
  std::size_t cutoff_rejected = 0;
  std::size_t anomaly_iterations = 0;
  double retained_fraction = 0;
};

// Inverts the power equation: Cp = 2 P / (rho * pi R^2 * v^3), with P in kW.
// Throws NumericError when v == 0.
double compute_cp(const TurbineRecord& record, double rho, double rotor_radius);

// Removes records with Cp above cfg.betz_limit, and records with v == 0
// (where Cp is undefined). Order preserved.
std::pair<Dataset, std::size_t> betz_filter(const Dataset& data,
                                            const PreprocessConfig& cfg);

struct AnomalyFilterResult {
  Dataset data;
  std::size_t rejected = 0;
  std::size_t iterations = 0;
};

// Per wind-speed bin of cfg.bin_width: reject records whose power deviates
// from the bin median by more than sigma_multiplier times the robust spread;
// recompute on survivors until a fixpoint or max_iterations. Throws DataError
// if every record is rejected.
AnomalyFilterResult iterative_median_filter(const Dataset& data,
                                            const PreprocessConfig& cfg);
// Serial reference implementation; must produce identical output.
AnomalyFilterResult iterative_median_filter_ref(const Dataset& data,
                                                const PreprocessConfig& cfg);

std::pair<Dataset, std::size_t> low_velocity_cutoff(const Dataset& data,
                                                    const PreprocessConfig& cfg);

// Betz -> anomaly -> cutoff.
std::pair<Dataset, CleaningReport> clean(const Dataset& data,
                                         const PreprocessConfig& cfg);

} // namespace windhybrid

#endif
