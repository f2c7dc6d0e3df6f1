#ifndef WINDHYBRID_SHAP_HPP
#define WINDHYBRID_SHAP_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "windhybrid/hybrid.hpp"
#include "windhybrid/types.hpp"

namespace windhybrid {

// Exact interventional Shapley values by full coalition enumeration.
// v(S) is the background-mean prediction with features in S fixed to the
// instance; feasible up to kShapMaxFeatures features.
inline constexpr std::size_t kShapMaxFeatures = 12;

using PredictFn = std::function<double(std::span<const double>)>;

std::vector<double> shapley_exact(const PredictFn& f,
                                  std::span<const double> instance,
                                  const std::vector<std::vector<double>>& background);

struct BackgroundSet {
  std::vector<FullFeatures> records;
  std::uint64_t seed = 0;
};

// Seeded sample (without replacement when possible) from the training split.
BackgroundSet sample_background(const Dataset& train_data, std::size_t size,
                                std::uint64_t seed);

// The 11 attribution slots: the physics submodel's 3 inputs and the residual
// submodel's 8, treated as distinct variables.
inline constexpr std::array<const char*, 11> kShapFeatureNames = {
    "v_phys",    "theta_phys", "omega_phys", "v_res",     "theta_res",
    "omega_res", "t_out_res",  "t_nac_res",  "t_rot_res", "alpha_v_res",
    "alpha_w_res"};

struct ShapExplanation {
  std::array<double, kPhysFeatureCount> phi_phys{};
  std::array<double, kFullFeatureCount> phi_res{};
  double base_phys = 0; // mean physics output over the background, kW
  double base_res = 0;  // mean residual output over the background, kW

  double reconstruction() const; // bases + all attributions
};

// Explains the two submodels independently; by additivity the concatenation
// explains the hybrid prediction.
ShapExplanation explain_hybrid(const HybridModel& model, const FullFeatures& x,
                               const BackgroundSet& background);

// Instance-parallel batch explanation and its serial reference.
std::vector<ShapExplanation> explain_batch(const HybridModel& model,
                                           std::span<const FullFeatures> instances,
                                           const BackgroundSet& background);
std::vector<ShapExplanation> explain_batch_ref(const HybridModel& model,
                                               std::span<const FullFeatures> instances,
                                               const BackgroundSet& background);

struct ShapRankingEntry {
  std::string feature;
  double mean_abs_phi = 0;
};

struct ShapSummary {
  std::vector<ShapRankingEntry> ranking; // sorted, largest first
  // Per-instance submodel sums base + sum(phi), i.e. the component
  // reconstructions.
  std::vector<double> physics_sum;
  std::vector<double> residual_sum;
};

ShapSummary shap_summary(std::span<const ShapExplanation> explanations);

struct ScatterFit {
  std::string feature;
  std::vector<double> value; // feature values
  std::vector<double> phi;   // residual-submodel attribution
  double linear_intercept = 0;
  double linear_slope = 0;
  std::array<double, 3> quadratic{}; // c0 + c1 x + c2 x^2
};

// (feature value, phi) pairs for one residual feature plus least-squares
// linear and quadratic fits. The feature is named as in the residual tuple
// ("v", "theta", "omega", "t_out", "t_nac", "t_rot", "alpha_v", "alpha_w").
ScatterFit shap_scatter(std::span<const ShapExplanation> explanations,
                        std::span<const FullFeatures> instances,
                        const std::string& feature);

} // namespace windhybrid

#endif
