#include "windhybrid/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include "windhybrid/dataset.hpp"
#include "windhybrid/rng.hpp"

namespace windhybrid {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Low-wind damping weight for injected effects: zero below 4 m/s, full
// above 8 m/s. Keeps records clear of the Betz ceiling where the margin
// between the true curve and the ceiling is only a few kW.
double effect_weight(double v) { return std::clamp((v - 4.0) / 4.0, 0.0, 1.0); }

double noise_scale(double v, bool heteroscedastic) {
  if (!heteroscedastic)
    return 1.0;
  double w = std::clamp(v / 12.0, 0.0, 1.0);
  return 0.2 + 1.8 * w * w;
}

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

} // namespace

double CpSurface::peak_value(double theta) const {
  double atten = std::max(1.0 - pitch_attenuation * theta, 0.05);
  return std::min(c_max * atten, kBetzLimit * 0.999);
}

double CpSurface::operator()(double lambda, double theta) const {
  const double d = lambda - lambda_star(theta);
  return peak_value(theta) * std::exp(-d * d / (2.0 * width * width));
}

std::vector<LabeledRecord> generate(const SynthConfig& cfg) {
  if (cfg.n == 0)
    throw ConfigError("synthgen: n must be positive");
  if (!(cfg.cp.c_max > 0 && cfg.cp.c_max < kBetzLimit))
    throw ConfigError("synthgen: cp.c_max must lie in (0, Betz limit)");
  if (!(cfg.outlier_rate >= 0 && cfg.outlier_rate < 0.5))
    throw ConfigError("synthgen: outlier_rate must lie in [0, 0.5)");
  if (!(cfg.v_min > 0 && cfg.v_min < cfg.v_max))
    throw ConfigError("synthgen: require 0 < v_min < v_max");
  if (cfg.noise_sd < 0 || cfg.residual_amplitude < 0)
    throw ConfigError("synthgen: noise_sd and residual_amplitude must be >= 0");

  std::mt19937_64 gen(mix_seed(cfg.seed, 0x73796e7468ull));
  const double area = kPi * cfg.rotor_radius * cfg.rotor_radius;
  const double kin_factor = 0.5 * cfg.rho * area / 1000.0; // kW per (m/s)^3 / Cp

  // Truncated Weibull support in CDF space.
  auto weibull_cdf = [&](double v) {
    double t = v / cfg.weibull_scale;
    return 1.0 - std::exp(-std::pow(t, cfg.weibull_shape));
  };
  const double u_lo = weibull_cdf(cfg.v_min);
  const double u_hi = weibull_cdf(cfg.v_max);

  static const char* kTurbineIds[4] = {"WT01", "WT02", "WT03", "WT04"};
  const std::int64_t t0 = parse_iso8601("2015-01-01T00:00:00Z");

  std::vector<LabeledRecord> out;
  out.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    // Fixed draw order per record keeps the stream reproducible.
    const double u_v = uniform01(gen);
    const double u_theta = uniform(gen, -cfg.theta_jitter, cfg.theta_jitter);
    const double u_omega = uniform(gen, -cfg.omega_jitter, cfg.omega_jitter);
    const double z_tout = normal01(gen);
    const double z_tnac = normal01(gen);
    const double z_trot = normal01(gen);
    const double u_av = uniform(gen, -0.3, 0.3);
    const double u_aw = uniform(gen, 0.0, 2.0 * kPi);
    const double z_noise = normal01(gen);
    const double u_out = uniform01(gen);
    const double u_mag = uniform01(gen);
    const double u_sign = uniform01(gen);

    const double u = u_lo + u_v * (u_hi - u_lo);
    const double v = cfg.weibull_scale *
                     std::pow(-std::log(1.0 - u), 1.0 / cfg.weibull_shape);

    double theta = cfg.theta_max * sigmoid((v - cfg.v_pitch) / cfg.s_pitch) + u_theta;
    theta = std::max(theta, 0.0);
    const double lambda = cfg.cp.lambda_star(theta) * (1.0 + u_omega);
    const double omega = std::max(lambda * v / cfg.rotor_radius, 0.0);

    LabeledRecord lr;
    TurbineRecord& r = lr.record;
    r.timestamp = t0 + static_cast<std::int64_t>(i) * 600;
    r.timestamp_raw = format_iso8601(r.timestamp);
    r.turbine_id = kTurbineIds[i % 4];
    r.v = v;
    r.theta = theta;
    r.omega = omega;
    r.t_out = cfg.t_out_mean + cfg.t_out_sd * z_tout;
    r.t_nac = r.t_out + 15.0 + 2.0 * z_tnac;
    r.t_rot = r.t_out + 20.0 + 3.0 * z_trot;
    r.alpha_v = u_av;
    r.alpha_w = u_aw;

    const double cp_true = cfg.cp(lambda, theta);
    lr.true_p_phys = kin_factor * v * v * v * cp_true;

    const double w = effect_weight(v);
    const double zt = (r.t_out - cfg.t_out_mean) / cfg.t_out_sd;
    switch (cfg.residual_form) {
    case ResidualForm::none:
      lr.true_residual = 0;
      break;
    case ResidualForm::linear_tout:
      lr.true_residual = -cfg.residual_amplitude * zt * w;
      break;
    case ResidualForm::quadratic_tout:
      lr.true_residual = cfg.residual_amplitude * (zt * zt - 1.0) * w;
      break;
    }

    lr.noise = cfg.noise_sd * noise_scale(v, cfg.heteroscedastic) * w * z_noise;

    const double ceiling = kin_factor * v * v * v * kBetzLimit;
    if (cfg.outlier_rate > 0 && u_out < cfg.outlier_rate) {
      lr.is_outlier = true;
      double mag = cfg.outlier_magnitude * (1.0 + u_mag) * cfg.noise_sd;
      double shift = (u_sign < 0.5) ? mag : -mag;
      // Keep displaced records physically plausible (below the Betz
      // ceiling); the anomaly filter, not the Betz filter, must catch them.
      if (lr.true_p_phys + lr.true_residual + lr.noise + shift >= ceiling)
        shift = -mag;
      lr.outlier_shift = shift;
    }

    r.p = lr.true_p_phys + lr.true_residual + lr.noise + lr.outlier_shift;
    out.push_back(std::move(lr));
  }
  return out;
}

Dataset to_dataset(const std::vector<LabeledRecord>& records,
                   const std::string& provenance) {
  Dataset data;
  data.provenance = provenance;
  data.records.reserve(records.size());
  for (const LabeledRecord& lr : records)
    data.records.push_back(lr.record);
  return data;
}

void write_labels(const std::string& path,
                  std::span<const LabeledRecord> records) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot open output file: " + path);
  out << "index,is_outlier,true_p_phys,true_residual\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << i << ',' << (records[i].is_outlier ? 1 : 0) << ','
        << format_double(records[i].true_p_phys) << ','
        << format_double(records[i].true_residual) << '\n';
  }
  if (!out)
    throw DataError("failed writing " + path);
}

std::vector<LabelRow> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open labels file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw DataError("empty labels file: " + path);
  std::vector<LabelRow> rows;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    LabelRow row{};
    int flag = 0;
    if (std::sscanf(line.c_str(), "%zu,%d,%lf,%lf", &row.index, &flag,
                    &row.true_p_phys, &row.true_residual) != 4)
      throw DataError("malformed labels row: '" + line + "'");
    row.is_outlier = flag != 0;
    rows.push_back(row);
  }
  return rows;
}

TruthMetrics truth_metrics(std::span<const double> physics_predictions,
                           std::span<const double> residual_predictions,
                           std::span<const LabeledRecord> records) {
  std::vector<double> p_true(records.size()), r_true(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    p_true[i] = records[i].true_p_phys;
    r_true[i] = records[i].true_residual;
  }
  return {compute_metrics(physics_predictions, p_true),
          compute_metrics(residual_predictions, r_true)};
}

} // namespace windhybrid
