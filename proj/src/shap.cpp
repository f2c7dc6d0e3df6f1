#include "windhybrid/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <utility>

#include "windhybrid/rng.hpp"

namespace windhybrid {

namespace {

// w[s] = s! (n-1-s)! / n! for coalition size s.
std::vector<double> coalition_weights(std::size_t n) {
  std::vector<double> fact(n + 1, 1.0);
  for (std::size_t i = 1; i <= n; ++i)
    fact[i] = fact[i - 1] * static_cast<double>(i);
  std::vector<double> w(n);
  for (std::size_t s = 0; s < n; ++s)
    w[s] = fact[s] * fact[n - 1 - s] / fact[n];
  return w;
}

} // namespace

std::vector<double> shapley_exact(const PredictFn& f,
                                  std::span<const double> instance,
                                  const std::vector<std::vector<double>>& background) {
  const std::size_t n = instance.size();
  if (n == 0 || n > kShapMaxFeatures)
    throw ConfigError("shapley_exact: feature count must lie in [1, " +
                      std::to_string(kShapMaxFeatures) +
                      "] for exact enumeration");
  if (background.empty())
    throw DataError("shapley_exact: empty background");
  for (const std::vector<double>& b : background)
    if (b.size() != n)
      throw DataError("shapley_exact: background dimension mismatch");

  const std::size_t masks = std::size_t{1} << n;
  const double inv_b = 1.0 / static_cast<double>(background.size());

  // value[S] = mean over background of f with features in S taken from the
  // instance. Masks are independent, so this loop parallelizes cleanly.
  std::vector<double> value(masks);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(masks); ++m) {
    const std::size_t mask = static_cast<std::size_t>(m);
    std::vector<double> mixed(n);
    double acc = 0;
    for (const std::vector<double>& b : background) {
      for (std::size_t j = 0; j < n; ++j)
        mixed[j] = (mask >> j) & 1u ? instance[j] : b[j];
      acc += f(mixed);
    }
    value[mask] = acc * inv_b;
  }

  const std::vector<double> w = coalition_weights(n);
  std::vector<double> phi(n, 0.0);
  for (std::size_t mask = 0; mask < masks; ++mask) {
    const std::size_t s = static_cast<std::size_t>(std::popcount(mask));
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1u)
        continue;
      phi[i] += w[s] * (value[mask | (std::size_t{1} << i)] - value[mask]);
    }
  }
  return phi;
}

BackgroundSet sample_background(const Dataset& train_data, std::size_t size,
                                std::uint64_t seed) {
  if (size == 0)
    throw ConfigError("background size must be >= 1");
  if (train_data.empty())
    throw DataError("background: empty training data");

  BackgroundSet bg;
  bg.seed = seed;
  std::mt19937_64 gen(mix_seed(seed, 0x62675f73ull));
  const std::size_t n = train_data.size();
  if (size >= n) {
    for (const TurbineRecord& r : train_data.records)
      bg.records.push_back(full_features(r));
    return bg;
  }
  std::vector<std::size_t> idx = random_permutation(n, gen);
  bg.records.reserve(size);
  for (std::size_t i = 0; i < size; ++i)
    bg.records.push_back(full_features(train_data.records[idx[i]]));
  return bg;
}

double ShapExplanation::reconstruction() const {
  double acc = base_phys + base_res;
  for (double p : phi_phys)
    acc += p;
  for (double p : phi_res)
    acc += p;
  return acc;
}

namespace {

ShapExplanation explain_one(const HybridModel& model, const FullFeatures& x,
                            const BackgroundSet& background) {
  std::vector<std::vector<double>> bg_phys, bg_res;
  bg_phys.reserve(background.records.size());
  bg_res.reserve(background.records.size());
  for (const FullFeatures& b : background.records) {
    bg_phys.emplace_back(b.begin(), b.begin() + kPhysFeatureCount);
    bg_res.emplace_back(b.begin(), b.end());
  }

  const PredictFn f_phys = [&](std::span<const double> z) {
    return predict_power(model.physics, {z[0], z[1], z[2]});
  };
  const PredictFn f_res = [&](std::span<const double> z) {
    FullFeatures xf;
    std::copy(z.begin(), z.end(), xf.begin());
    return predict_residual(model, xf);
  };

  const PhysFeatures xp = phys_part(x);
  const std::vector<double> phi_p =
      shapley_exact(f_phys, std::span<const double>(xp.data(), xp.size()), bg_phys);
  const std::vector<double> phi_r =
      shapley_exact(f_res, std::span<const double>(x.data(), x.size()), bg_res);

  ShapExplanation e;
  std::copy(phi_p.begin(), phi_p.end(), e.phi_phys.begin());
  std::copy(phi_r.begin(), phi_r.end(), e.phi_res.begin());

  double acc_p = 0, acc_r = 0;
  for (const FullFeatures& b : background.records) {
    acc_p += predict_power(model.physics, phys_part(b));
    acc_r += predict_residual(model, b);
  }
  e.base_phys = acc_p / static_cast<double>(background.records.size());
  e.base_res = acc_r / static_cast<double>(background.records.size());
  return e;
}

std::vector<ShapExplanation> batch_explain(const HybridModel& model,
                                           std::span<const FullFeatures> instances,
                                           const BackgroundSet& background,
                                           bool parallel) {
  std::vector<ShapExplanation> out(instances.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(instances.size()); ++i)
    out[static_cast<std::size_t>(i)] =
        explain_one(model, instances[static_cast<std::size_t>(i)], background);
  return out;
}

} // namespace

ShapExplanation explain_hybrid(const HybridModel& model, const FullFeatures& x,
                               const BackgroundSet& background) {
  return explain_one(model, x, background);
}

std::vector<ShapExplanation> explain_batch(const HybridModel& model,
                                           std::span<const FullFeatures> instances,
                                           const BackgroundSet& background) {
  return batch_explain(model, instances, background, true);
}

std::vector<ShapExplanation> explain_batch_ref(const HybridModel& model,
                                               std::span<const FullFeatures> instances,
                                               const BackgroundSet& background) {
  return batch_explain(model, instances, background, false);
}

ShapSummary shap_summary(std::span<const ShapExplanation> explanations) {
  if (explanations.empty())
    throw DataError("shap_summary: no explanations");

  ShapSummary summary;
  std::array<double, 11> acc{};
  for (const ShapExplanation& e : explanations) {
    for (int i = 0; i < kPhysFeatureCount; ++i)
      acc[static_cast<std::size_t>(i)] += std::fabs(e.phi_phys[i]);
    for (int i = 0; i < kFullFeatureCount; ++i)
      acc[static_cast<std::size_t>(kPhysFeatureCount + i)] += std::fabs(e.phi_res[i]);

    double sp = e.base_phys, sr = e.base_res;
    for (double p : e.phi_phys)
      sp += p;
    for (double p : e.phi_res)
      sr += p;
    summary.physics_sum.push_back(sp);
    summary.residual_sum.push_back(sr);
  }
  for (std::size_t i = 0; i < acc.size(); ++i)
    summary.ranking.push_back(
        {kShapFeatureNames[i], acc[i] / static_cast<double>(explanations.size())});
  std::stable_sort(summary.ranking.begin(), summary.ranking.end(),
                   [](const ShapRankingEntry& a, const ShapRankingEntry& b) {
                     return a.mean_abs_phi > b.mean_abs_phi;
                   });
  return summary;
}

ScatterFit shap_scatter(std::span<const ShapExplanation> explanations,
                        std::span<const FullFeatures> instances,
                        const std::string& feature) {
  if (explanations.size() != instances.size() || explanations.empty())
    throw DataError("shap_scatter: explanation/instance mismatch");

  int slot = -1;
  for (int i = 0; i < kFullFeatureCount; ++i) {
    if (feature == feature_name(kFullFeatureIds[static_cast<std::size_t>(i)])) {
      slot = i;
      break;
    }
  }
  if (slot < 0)
    throw ConfigError("shap_scatter: unknown residual feature '" + feature + "'");

  ScatterFit fit;
  fit.feature = feature;
  const std::size_t n = instances.size();
  fit.value.resize(n);
  fit.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.value[i] = instances[i][static_cast<std::size_t>(slot)];
    fit.phi[i] = explanations[i].phi_res[static_cast<std::size_t>(slot)];
  }

  // Least squares on centered/scaled x for conditioning, mapped back to raw
  // coordinates afterwards.
  double xm = 0, xs = 0;
  for (double x : fit.value)
    xm += x;
  xm /= static_cast<double>(n);
  for (double x : fit.value)
    xs += (x - xm) * (x - xm);
  xs = std::sqrt(xs / static_cast<double>(n));
  if (!(xs > 0))
    throw DataError("shap_scatter: feature '" + feature + "' is constant");

  // Normal equations for degree 1 and 2 in u = (x - xm)/xs.
  double s[5] = {static_cast<double>(n), 0, 0, 0, 0};
  double t[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (fit.value[i] - xm) / xs;
    double up = u;
    for (int k = 1; k <= 4; ++k, up *= u)
      s[k] += up;
    t[0] += fit.phi[i];
    t[1] += fit.phi[i] * u;
    t[2] += fit.phi[i] * u * u;
  }

  // Linear: solve 2x2.
  {
    const double det = s[0] * s[2] - s[1] * s[1];
    const double a0 = (t[0] * s[2] - t[1] * s[1]) / det;
    const double a1 = (s[0] * t[1] - s[1] * t[0]) / det;
    // y = a0 + a1 u, u = (x - xm)/xs
    fit.linear_slope = a1 / xs;
    fit.linear_intercept = a0 - a1 * xm / xs;
  }

  // Quadratic: solve 3x3 by Gaussian elimination.
  {
    double m[3][4] = {{s[0], s[1], s[2], t[0]},
                      {s[1], s[2], s[3], t[1]},
                      {s[2], s[3], s[4], t[2]}};
    for (int col = 0; col < 3; ++col) {
      int piv = col;
      for (int r = col + 1; r < 3; ++r)
        if (std::fabs(m[r][col]) > std::fabs(m[piv][col]))
          piv = r;
      std::swap(m[col], m[piv]);
      for (int r = 0; r < 3; ++r) {
        if (r == col)
          continue;
        const double factor = m[r][col] / m[col][col];
        for (int c = col; c < 4; ++c)
          m[r][c] -= factor * m[col][c];
      }
    }
    const double b0 = m[0][3] / m[0][0];
    const double b1 = m[1][3] / m[1][1];
    const double b2 = m[2][3] / m[2][2];
    // y = b0 + b1 u + b2 u^2 with u = (x - xm)/xs.
    const double inv = 1.0 / xs;
    fit.quadratic[2] = b2 * inv * inv;
    fit.quadratic[1] = b1 * inv - 2.0 * b2 * xm * inv * inv;
    fit.quadratic[0] = b0 - b1 * xm * inv + b2 * xm * xm * inv * inv;
  }
  return fit;
}

} // namespace windhybrid
