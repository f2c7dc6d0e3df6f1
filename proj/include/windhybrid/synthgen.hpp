#ifndef WINDHYBRID_SYNTHGEN_HPP
#define WINDHYBRID_SYNTHGEN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "windhybrid/metrics.hpp"
#include "windhybrid/types.hpp"

namespace windhybrid {

// Ground-truth power-coefficient surface: a Gaussian bump over tip-speed
// ratio whose peak location shifts left and whose height shrinks as pitch
// increases.
struct CpSurface {
  double c_max = 0.48;            // peak Cp at zero pitch, below the Betz limit
  double lambda0 = 8.0;           // peak tip-speed ratio at zero pitch
  double pitch_shift = 6.0;       // lambda*(theta) = lambda0 - pitch_shift*theta
  double width = 1.5;             // Gaussian width in lambda
  double pitch_attenuation = 0.8; // peak height factor (1 - a*theta)

  double lambda_star(double theta) const { return lambda0 - pitch_shift * theta; }
  double peak_value(double theta) const;
  double operator()(double lambda, double theta) const;
};

enum class ResidualForm { none, linear_tout, quadratic_tout };

struct SynthConfig {
  std::size_t n = 20000;
  std::uint64_t seed = 1;
  CpSurface cp;

  // Injected residual effect, damped at low wind speed where the physics
  // margin to the Betz ceiling is thin.
  ResidualForm residual_form = ResidualForm::none;
  double residual_amplitude = 0.0; // kW at full damping weight

  double noise_sd = 0.0;        // kW
  bool heteroscedastic = false; // noise grows with wind speed when set

  double outlier_rate = 0.0;      // fraction of records displaced off-curve
  double outlier_magnitude = 5.0; // minimum displacement, in noise_sd multiples

  // Wind speed: Weibull truncated to [v_min, v_max] via inverse CDF.
  double weibull_shape = 2.0;
  double weibull_scale = 8.0;
  double v_min = 0.5;
  double v_max = 25.0;

  double rho = 1.225;
  double rotor_radius = 41.0;

  // Pitch policy: theta_max * sigmoid((v - v_pitch)/s_pitch) + jitter, >= 0.
  double theta_max = 0.3;
  double v_pitch = 10.0;
  double s_pitch = 2.0;
  double theta_jitter = 0.12;

  // Rotor policy: tracks lambda*(theta) with relative jitter.
  double omega_jitter = 0.2;

  double t_out_mean = 12.0;
  double t_out_sd = 8.0;
};

struct LabeledRecord {
  TurbineRecord record;
  bool is_outlier = false;
  double true_p_phys = 0;   // kW
  double true_residual = 0; // kW
  double noise = 0;         // realized noise draw, kW
  double outlier_shift = 0; // applied displacement, kW (0 unless flagged)
};

// Deterministic under cfg.seed. Every record satisfies
//   record.p = true_p_phys + true_residual + noise + outlier_shift
// with true_p_phys following the power equation on the Cp surface.
std::vector<LabeledRecord> generate(const SynthConfig& cfg);

Dataset to_dataset(const std::vector<LabeledRecord>& records,
                   const std::string& provenance = "synthetic");

// Labels sidecar: index,is_outlier,true_p_phys,true_residual.
void write_labels(const std::string& path,
                  std::span<const LabeledRecord> records);

struct LabelRow {
  std::size_t index;
  bool is_outlier;
  double true_p_phys;
  double true_residual;
};
std::vector<LabelRow> load_labels(const std::string& path);

// Compares a model's physics component against true_p_phys and its residual
// component against true_residual.
struct TruthMetrics {
  MetricsReport physics;
  MetricsReport residual;
};
TruthMetrics truth_metrics(std::span<const double> physics_predictions,
                           std::span<const double> residual_predictions,
                           std::span<const LabeledRecord> records);

} // namespace windhybrid

#endif
