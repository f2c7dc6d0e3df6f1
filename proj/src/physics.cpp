#include "windhybrid/physics.hpp"

#include <cmath>

namespace windhybrid {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double TurbineConstants::swept_area() const {
  return kPi * rotor_radius * rotor_radius;
}

double TurbineConstants::kinematic_factor_kw(double v) const {
  return 0.5 * rho * swept_area() * v * v * v / 1000.0;
}

double predict_cp(const PhysicsModel& model, const PhysFeatures& x) {
  if (!(x[0] > 0))
    throw NumericError("predict_cp requires v > 0");
  for (double xi : x)
    if (!std::isfinite(xi))
      throw NumericError("predict_cp: non-finite input");
  double z[kPhysFeatureCount];
  for (int i = 0; i < kPhysFeatureCount; ++i)
    z[i] = model.x_stats.standardize(static_cast<std::size_t>(i), x[i]);
  return forward(model.cp_net, {z, kPhysFeatureCount})[0];
}

double predict_power(const PhysicsModel& model, const PhysFeatures& x) {
  if (x[0] == 0)
    return 0.0;
  return model.constants.kinematic_factor_kw(x[0]) * predict_cp(model, x);
}

std::vector<double> predict_power_batch(const PhysicsModel& model,
                                        const Dataset& data) {
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    out[i] = predict_power(model, phys_features(data.records[i]));
  return out;
}

double tip_speed_ratio(double omega, double v, double rotor_radius) {
  if (v == 0)
    throw NumericError("tip-speed ratio undefined at zero wind speed");
  return omega * rotor_radius / v;
}

CpCurve extract_cp_curve(const PhysicsModel& model, double theta,
                         std::span<const double> lambda_grid, double v_ref) {
  if (!(v_ref > 0))
    throw ConfigError("extract_cp_curve: v_ref must be positive");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0) ||
        (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1])))
      throw ConfigError("extract_cp_curve: lambda grid must be strictly "
                        "increasing and positive");
  }
  CpCurve curve;
  curve.theta = theta;
  curve.lambda.assign(lambda_grid.begin(), lambda_grid.end());
  curve.cp.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    const double omega = lambda * v_ref / model.constants.rotor_radius;
    curve.cp.push_back(predict_cp(model, {v_ref, theta, omega}));
  }
  return curve;
}

PhysicsTraining train_physics(const Dataset& data, const TrainConfig& cfg,
                              const TurbineConstants& constants,
                              std::vector<int> hidden_layers,
                              HiddenActivation hidden, double val_fraction) {
  if (data.size() < 10)
    throw DataError("train_physics: dataset too small");

  auto [fit_part, val_part] = split(data, 1.0 - val_fraction, cfg.seed);

  PhysicsTraining result;
  result.model.constants = constants;
  result.model.x_stats = fit_normalization(
      fit_part, std::span<const FeatureId>(kFullFeatureIds.data(), 3));

  // Targets and kinematic scales are divided by the power spread so the
  // gradient magnitudes are O(1) regardless of turbine rating.
  std::vector<double> powers;
  powers.reserve(fit_part.size());
  for (const TurbineRecord& r : fit_part.records)
    powers.push_back(r.p);
  const ScalarStats p_stats = fit_scalar_stats(powers, "p");

  auto build = [&](const Dataset& part) {
    TrainSet set;
    set.dim = kPhysFeatureCount;
    set.X.reserve(part.size() * kPhysFeatureCount);
    for (const TurbineRecord& r : part.records) {
      const PhysFeatures x = phys_features(r);
      for (int i = 0; i < kPhysFeatureCount; ++i)
        set.X.push_back(result.model.x_stats.standardize(
            static_cast<std::size_t>(i), x[i]));
      set.y.push_back(r.p / p_stats.stddev);
      set.scale.push_back(constants.kinematic_factor_kw(r.v) / p_stats.stddev);
    }
    return set;
  };
  const TrainSet train_set = build(fit_part);
  const TrainSet val_set = build(val_part);

  std::vector<int> sizes;
  sizes.push_back(kPhysFeatureCount);
  for (int h : hidden_layers)
    sizes.push_back(h);
  sizes.push_back(1);
  result.model.cp_net = make_mlp(sizes, hidden,
                                 OutputActivation::scaled_sigmoid(kBetzLimit),
                                 cfg.seed);
  result.trace = train(result.model.cp_net, train_set, val_set, cfg);
  return result;
}

} // namespace windhybrid
