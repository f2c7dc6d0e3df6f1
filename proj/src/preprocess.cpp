#include "windhybrid/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace windhybrid {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMadToSigma = 1.4826;

double median_inplace(std::vector<double>& values) {
  const std::size_t n = values.size();
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1)
    return *mid;
  double hi = *mid;
  double lo = *std::max_element(values.begin(), mid);
  return 0.5 * (lo + hi);
}

struct BinStats {
  double median = 0;
  double spread = 0;
};

BinStats bin_stats(const std::vector<double>& powers, SpreadEstimator est) {
  std::vector<double> work = powers;
  BinStats s;
  s.median = median_inplace(work);
  if (est == SpreadEstimator::scaled_mad) {
    for (std::size_t i = 0; i < work.size(); ++i)
      work[i] = std::fabs(powers[i] - s.median);
    s.spread = kMadToSigma * median_inplace(work);
  } else {
    double sum = 0;
    for (double p : powers)
      sum += p;
    double mean = sum / static_cast<double>(powers.size());
    double ss = 0;
    for (double p : powers) {
      double d = p - mean;
      ss += d * d;
    }
    s.spread = std::sqrt(ss / static_cast<double>(powers.size()));
  }
  return s;
}

// One rejection sweep over the records flagged alive. Returns the number of
// newly rejected records. Bins are processed independently, so the parallel
// and serial versions are bit-identical.
std::size_t median_sweep(const Dataset& data, const PreprocessConfig& cfg,
                         std::vector<char>& alive, bool parallel) {
  std::unordered_map<long, std::vector<std::size_t>> bins;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!alive[i])
      continue;
    long bin = static_cast<long>(std::floor(data.records[i].v / cfg.bin_width));
    bins[bin].push_back(i);
  }
  std::vector<const std::vector<std::size_t>*> bin_list;
  bin_list.reserve(bins.size());
  for (const auto& [bin, members] : bins)
    bin_list.push_back(&members);

  std::size_t rejected = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : rejected) if (parallel)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(bin_list.size()); ++b) {
    const std::vector<std::size_t>& members = *bin_list[static_cast<std::size_t>(b)];
    std::vector<double> powers(members.size());
    for (std::size_t j = 0; j < members.size(); ++j)
      powers[j] = data.records[members[j]].p;
    const BinStats s = bin_stats(powers, cfg.spread);
    const double threshold = cfg.sigma_multiplier * s.spread;
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (std::fabs(powers[j] - s.median) > threshold) {
        alive[members[j]] = 0;
        ++rejected;
      }
    }
  }
  return rejected;
}

AnomalyFilterResult run_median_filter(const Dataset& data,
                                      const PreprocessConfig& cfg,
                                      bool parallel) {
  if (data.empty())
    throw DataError("anomaly filter: empty dataset");
  if (!(cfg.bin_width > 0))
    throw ConfigError("anomaly filter: bin_width must be positive");

  std::vector<char> alive(data.size(), 1);
  AnomalyFilterResult result;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    const std::size_t rejected = median_sweep(data, cfg, alive, parallel);
    result.rejected += rejected;
    ++result.iterations;
    if (rejected == 0)
      break;
    if (result.rejected == data.size())
      throw DataError("anomaly filter rejected every record; "
                      "check sigma_multiplier and bin_width");
  }

  result.data.provenance = data.provenance;
  result.data.records.reserve(data.size() - result.rejected);
  for (std::size_t i = 0; i < data.size(); ++i)
    if (alive[i])
      result.data.records.push_back(data.records[i]);
  return result;
}

} // namespace

double compute_cp(const TurbineRecord& record, double rho, double rotor_radius) {
  if (record.v == 0)
    throw NumericError("Cp undefined at zero wind speed");
  const double area = kPi * rotor_radius * rotor_radius;
  const double denom_w = 0.5 * rho * area * record.v * record.v * record.v;
  return record.p * 1000.0 / denom_w;
}

std::pair<Dataset, std::size_t> betz_filter(const Dataset& data,
                                            const PreprocessConfig& cfg) {
  if (!(cfg.betz_limit > 0 && cfg.betz_limit < 1))
    throw ConfigError("betz_limit must lie in (0,1)");
  Dataset kept;
  kept.provenance = data.provenance;
  std::size_t rejected = 0;
  for (const TurbineRecord& r : data.records) {
    if (r.v == 0 || compute_cp(r, cfg.rho, cfg.rotor_radius) > cfg.betz_limit)
      ++rejected;
    else
      kept.records.push_back(r);
  }
  return {std::move(kept), rejected};
}

AnomalyFilterResult iterative_median_filter(const Dataset& data,
                                            const PreprocessConfig& cfg) {
  return run_median_filter(data, cfg, true);
}

AnomalyFilterResult iterative_median_filter_ref(const Dataset& data,
                                                const PreprocessConfig& cfg) {
  return run_median_filter(data, cfg, false);
}

std::pair<Dataset, std::size_t> low_velocity_cutoff(const Dataset& data,
                                                    const PreprocessConfig& cfg) {
  if (cfg.v_cutoff < 0)
    throw ConfigError("v_cutoff must be >= 0");
  Dataset kept;
  kept.provenance = data.provenance;
  std::size_t rejected = 0;
  for (const TurbineRecord& r : data.records) {
    if (r.v < cfg.v_cutoff)
      ++rejected;
    else
      kept.records.push_back(r);
  }
  return {std::move(kept), rejected};
}

std::pair<Dataset, CleaningReport> clean(const Dataset& data,
                                         const PreprocessConfig& cfg) {
  CleaningReport report;
  report.input_count = data.size();

  auto [after_betz, betz_rejected] = betz_filter(data, cfg);
  report.betz_rejected = betz_rejected;

  AnomalyFilterResult anomaly = iterative_median_filter(after_betz, cfg);
  report.anomaly_rejected = anomaly.rejected;
  report.anomaly_iterations = anomaly.iterations;

  auto [final_data, cutoff_rejected] = low_velocity_cutoff(anomaly.data, cfg);
  report.cutoff_rejected = cutoff_rejected;

  report.retained_fraction =
      report.input_count == 0
          ? 0.0
          : static_cast<double>(final_data.size()) /
                static_cast<double>(report.input_count);
  return {std::move(final_data), report};
}

} // namespace windhybrid
