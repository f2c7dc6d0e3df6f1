#ifndef WINDHYBRID_HYBRID_HPP
#define WINDHYBRID_HYBRID_HPP

#include <utility>
#include <vector>

#include "windhybrid/physics.hpp"

namespace windhybrid {

// Additive hybrid: prediction = physics component + residual component.
// The residual network sees the full 8-feature tuple; its target is
// standardized during training and de-standardized at prediction.
struct HybridModel {
  PhysicsModel physics;
  MlpNetwork residual; // 8 inputs, identity output
  NormalizationStats xfull_stats;
  ScalarStats r_stats;
};

struct ResidualSample {
  FullFeatures x_full;
  double r = 0; // observed power minus frozen physics prediction, kW
};

std::vector<ResidualSample> make_residual_set(const PhysicsModel& physics,
                                              const Dataset& data);

struct PredictionComponents {
  double p_phys = 0;
  double p_res = 0;
  double p_hat = 0; // p_phys + p_res
};

PredictionComponents predict(const HybridModel& model, const FullFeatures& x);

// The residual component alone, de-standardized to kW.
double predict_residual(const HybridModel& model, const FullFeatures& x);

// Row-parallel batch prediction plus its serial reference; results are
// bit-identical.
std::vector<PredictionComponents> predict_batch(const HybridModel& model,
                                                const Dataset& data);
std::vector<PredictionComponents> predict_batch_ref(const HybridModel& model,
                                                    const Dataset& data);

struct HybridTrainOptions {
  std::vector<int> physics_hidden = {32, 32};
  std::vector<int> residual_hidden = {32, 32};
  HiddenActivation activation = HiddenActivation::tanh;
  double val_fraction = 0.1;
};

struct HybridTraining {
  HybridModel model;
  TrainTrace physics_trace;
  TrainTrace residual_trace;
};

// Two-step protocol: fit physics against observed power, freeze it, then
// fit the residual network on r = p - p_phys over the same training data.
HybridTraining train_hybrid(const Dataset& train_data,
                            const TrainConfig& physics_cfg,
                            const TrainConfig& residual_cfg,
                            const TurbineConstants& constants,
                            const HybridTrainOptions& options = {});

// Purely data-driven reference model over the full tuple, for Table-2-style
// comparisons.
struct BaselineModel {
  MlpNetwork net;
  NormalizationStats x_stats;
  ScalarStats p_stats;
};

struct BaselineTraining {
  BaselineModel model;
  TrainTrace trace;
};

BaselineTraining train_baseline(const Dataset& train_data, const TrainConfig& cfg,
                                std::vector<int> hidden_layers = {64, 64},
                                HiddenActivation activation = HiddenActivation::tanh,
                                double val_fraction = 0.1);

double predict_baseline(const BaselineModel& model, const FullFeatures& x);

// Pinball-trained copies of the residual network; a head's full-power
// quantile is the frozen physics term plus its de-standardized output.
struct QuantileHeads {
  MlpNetwork lower;
  MlpNetwork upper;
  double q_lo = 0.05;
  double q_hi = 0.95;
};

QuantileHeads train_quantile_heads(const HybridModel& model,
                                   const Dataset& train_data,
                                   const TrainConfig& cfg, double alpha,
                                   double val_fraction = 0.1);

// (lower, upper) full-power quantile predictions.
std::pair<double, double> predict_quantiles(const HybridModel& model,
                                            const QuantileHeads& heads,
                                            const FullFeatures& x);

} // namespace windhybrid

#endif
