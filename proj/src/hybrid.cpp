#include "windhybrid/hybrid.hpp"

#include <cmath>

#include "windhybrid/rng.hpp"

namespace windhybrid {

namespace {

void standardize_full(const NormalizationStats& stats, const FullFeatures& x,
                      double* out) {
  for (int i = 0; i < kFullFeatureCount; ++i)
    out[i] = stats.standardize(static_cast<std::size_t>(i), x[i]);
}

double residual_component(const HybridModel& model, const FullFeatures& x) {
  double z[kFullFeatureCount];
  standardize_full(model.xfull_stats, x, z);
  const double raw = forward(model.residual, {z, kFullFeatureCount})[0];
  return model.r_stats.mean + model.r_stats.stddev * raw;
}

// Splits residual samples into fit/validation train sets with standardized
// inputs and targets.
struct ResidualSets {
  TrainSet fit;
  TrainSet val;
};

ResidualSets build_residual_sets(const std::vector<ResidualSample>& samples,
                                 const NormalizationStats& x_stats,
                                 const ScalarStats& r_stats, double val_fraction,
                                 std::uint64_t seed) {
  const std::size_t n = samples.size();
  std::mt19937_64 gen(mix_seed(seed, 0x7265735full));
  std::vector<std::size_t> idx = random_permutation(n, gen);
  const std::size_t n_val =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::llround(val_fraction * static_cast<double>(n))));
  if (n_val >= n)
    throw DataError("residual training: dataset too small for validation slice");

  ResidualSets sets;
  sets.fit.dim = sets.val.dim = kFullFeatureCount;
  for (std::size_t j = 0; j < n; ++j) {
    const ResidualSample& s = samples[idx[j]];
    TrainSet& dst = (j < n_val) ? sets.val : sets.fit;
    double z[kFullFeatureCount];
    standardize_full(x_stats, s.x_full, z);
    dst.add_row({z, kFullFeatureCount}, (s.r - r_stats.mean) / r_stats.stddev);
  }
  return sets;
}

} // namespace

std::vector<ResidualSample> make_residual_set(const PhysicsModel& physics,
                                              const Dataset& data) {
  std::vector<ResidualSample> samples;
  samples.reserve(data.size());
  for (const TurbineRecord& rec : data.records) {
    ResidualSample s;
    s.x_full = full_features(rec);
    s.r = rec.p - predict_power(physics, phys_features(rec));
    if (!std::isfinite(s.r))
      throw NumericError("non-finite residual encountered");
    samples.push_back(s);
  }
  return samples;
}

PredictionComponents predict(const HybridModel& model, const FullFeatures& x) {
  for (double xi : x)
    if (!std::isfinite(xi))
      throw NumericError("predict: non-finite input");
  PredictionComponents c;
  c.p_phys = predict_power(model.physics, phys_part(x));
  c.p_res = residual_component(model, x);
  c.p_hat = c.p_phys + c.p_res;
  return c;
}

double predict_residual(const HybridModel& model, const FullFeatures& x) {
  return residual_component(model, x);
}

namespace {

std::vector<PredictionComponents> batch_predict(const HybridModel& model,
                                                const Dataset& data,
                                                bool parallel) {
  std::vector<PredictionComponents> out(data.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.size()); ++i)
    out[static_cast<std::size_t>(i)] =
        predict(model, full_features(data.records[static_cast<std::size_t>(i)]));
  return out;
}

} // namespace

std::vector<PredictionComponents> predict_batch(const HybridModel& model,
                                                const Dataset& data) {
  return batch_predict(model, data, true);
}

std::vector<PredictionComponents> predict_batch_ref(const HybridModel& model,
                                                    const Dataset& data) {
  return batch_predict(model, data, false);
}

HybridTraining train_hybrid(const Dataset& train_data,
                            const TrainConfig& physics_cfg,
                            const TrainConfig& residual_cfg,
                            const TurbineConstants& constants,
                            const HybridTrainOptions& options) {
  HybridTraining result;

  PhysicsTraining phys =
      train_physics(train_data, physics_cfg, constants, options.physics_hidden,
                    options.activation, options.val_fraction);
  result.model.physics = std::move(phys.model);
  result.physics_trace = std::move(phys.trace);

  const std::vector<ResidualSample> samples =
      make_residual_set(result.model.physics, train_data);

  result.model.xfull_stats = fit_normalization(
      train_data, std::span<const FeatureId>(kFullFeatureIds));
  std::vector<double> residuals;
  residuals.reserve(samples.size());
  for (const ResidualSample& s : samples)
    residuals.push_back(s.r);
  result.model.r_stats = fit_scalar_stats(residuals, "residual");

  const ResidualSets sets =
      build_residual_sets(samples, result.model.xfull_stats, result.model.r_stats,
                          options.val_fraction, residual_cfg.seed);

  std::vector<int> sizes;
  sizes.push_back(kFullFeatureCount);
  for (int h : options.residual_hidden)
    sizes.push_back(h);
  sizes.push_back(1);
  result.model.residual = make_mlp(sizes, options.activation,
                                   OutputActivation::identity(),
                                   residual_cfg.seed);
  result.residual_trace =
      train(result.model.residual, sets.fit, sets.val, residual_cfg);
  return result;
}

BaselineTraining train_baseline(const Dataset& train_data, const TrainConfig& cfg,
                                std::vector<int> hidden_layers,
                                HiddenActivation activation, double val_fraction) {
  if (train_data.size() < 10)
    throw DataError("train_baseline: dataset too small");

  BaselineTraining result;
  result.model.x_stats = fit_normalization(
      train_data, std::span<const FeatureId>(kFullFeatureIds));
  std::vector<double> powers;
  powers.reserve(train_data.size());
  for (const TurbineRecord& r : train_data.records)
    powers.push_back(r.p);
  result.model.p_stats = fit_scalar_stats(powers, "p");

  auto [fit_part, val_part] = split(train_data, 1.0 - val_fraction, cfg.seed);
  auto build = [&](const Dataset& part) {
    TrainSet set;
    set.dim = kFullFeatureCount;
    for (const TurbineRecord& r : part.records) {
      double z[kFullFeatureCount];
      standardize_full(result.model.x_stats, full_features(r), z);
      set.add_row({z, kFullFeatureCount},
                  (r.p - result.model.p_stats.mean) / result.model.p_stats.stddev);
    }
    return set;
  };
  const TrainSet fit_set = build(fit_part);
  const TrainSet val_set = build(val_part);

  std::vector<int> sizes;
  sizes.push_back(kFullFeatureCount);
  for (int h : hidden_layers)
    sizes.push_back(h);
  sizes.push_back(1);
  result.model.net =
      make_mlp(sizes, activation, OutputActivation::identity(), cfg.seed);
  result.trace = train(result.model.net, fit_set, val_set, cfg);
  return result;
}

double predict_baseline(const BaselineModel& model, const FullFeatures& x) {
  double z[kFullFeatureCount];
  standardize_full(model.x_stats, x, z);
  const double raw = forward(model.net, {z, kFullFeatureCount})[0];
  return model.p_stats.mean + model.p_stats.stddev * raw;
}

QuantileHeads train_quantile_heads(const HybridModel& model,
                                   const Dataset& train_data,
                                   const TrainConfig& cfg, double alpha,
                                   double val_fraction) {
  if (!(alpha > 0 && alpha < 1))
    throw ConfigError("quantile heads: alpha must lie in (0,1)");

  const std::vector<ResidualSample> samples =
      make_residual_set(model.physics, train_data);
  const ResidualSets sets =
      build_residual_sets(samples, model.xfull_stats, model.r_stats,
                          val_fraction, cfg.seed);

  QuantileHeads heads;
  heads.q_lo = alpha / 2.0;
  heads.q_hi = 1.0 - alpha / 2.0;
  std::tie(heads.lower, heads.upper) = quantile_heads(
      model.residual, sets.fit, sets.val, cfg, heads.q_lo, heads.q_hi);
  return heads;
}

std::pair<double, double> predict_quantiles(const HybridModel& model,
                                            const QuantileHeads& heads,
                                            const FullFeatures& x) {
  const double p_phys = predict_power(model.physics, phys_part(x));
  double z[kFullFeatureCount];
  standardize_full(model.xfull_stats, x, z);
  const double lo_raw = forward(heads.lower, {z, kFullFeatureCount})[0];
  const double hi_raw = forward(heads.upper, {z, kFullFeatureCount})[0];
  const double lo = p_phys + model.r_stats.mean + model.r_stats.stddev * lo_raw;
  const double hi = p_phys + model.r_stats.mean + model.r_stats.stddev * hi_raw;
  return {lo, hi};
}

} // namespace windhybrid
