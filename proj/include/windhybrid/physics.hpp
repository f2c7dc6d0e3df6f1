#ifndef WINDHYBRID_PHYSICS_HPP
#define WINDHYBRID_PHYSICS_HPP

#include <span>
#include <vector>

#include "windhybrid/dataset.hpp"
#include "windhybrid/nn.hpp"
#include "windhybrid/types.hpp"

namespace windhybrid {

struct TurbineConstants {
  double rho = 1.225;         // kg/m^3
  double rotor_radius = 41.0; // m

  double swept_area() const; // pi R^2
  // 0.5 * rho * A * v^3, in kW: the per-sample kinematic factor of the
  // power equation.
  double kinematic_factor_kw(double v) const;
};

// Physics-inspired submodel: P = Cp(v, theta, omega) * (1/2 rho A v^3) with
// Cp produced by a network whose output is bounded by the Betz limit.
struct PhysicsModel {
  MlpNetwork cp_net; // 3 inputs, scaled_sigmoid(Betz) output
  TurbineConstants constants;
  NormalizationStats x_stats; // over (v, theta, omega)
};

// Strictly inside (0, Betz limit) for finite inputs; requires v > 0.
double predict_cp(const PhysicsModel& model, const PhysFeatures& x);

// 0 when v == 0 (the network is not consulted).
double predict_power(const PhysicsModel& model, const PhysFeatures& x);

std::vector<double> predict_power_batch(const PhysicsModel& model,
                                        const Dataset& data);

double tip_speed_ratio(double omega, double v, double rotor_radius);

struct CpCurve {
  double theta = 0;
  std::vector<double> lambda;
  std::vector<double> cp;
};

// Evaluates predict_cp at (v_ref, theta, omega = lambda * v_ref / R) over a
// strictly increasing positive lambda grid.
CpCurve extract_cp_curve(const PhysicsModel& model, double theta,
                         std::span<const double> lambda_grid, double v_ref);

// Trains the Cp network end-to-end against observed power: the loss is
// MAE(P_obs, kin_factor * cp_net(x)) with the kinematic factor entering the
// gradient as a per-sample constant multiplier. A validation slice of
// val_fraction is carved from `data` with cfg.seed for the LR schedule.
struct PhysicsTraining {
  PhysicsModel model;
  TrainTrace trace;
};
PhysicsTraining train_physics(const Dataset& data, const TrainConfig& cfg,
                              const TurbineConstants& constants,
                              std::vector<int> hidden_layers = {32, 32},
                              HiddenActivation hidden = HiddenActivation::tanh,
                              double val_fraction = 0.1);

} // namespace windhybrid

#endif
