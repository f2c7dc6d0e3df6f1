#ifndef WINDHYBRID_DATASET_HPP
#define WINDHYBRID_DATASET_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "windhybrid/types.hpp"

namespace windhybrid {

// Maps each record field to a column name in the source file. Keys are the
// canonical field ids; unmapped extra columns in the file are ignored.
struct CsvSchema {
  std::string timestamp = "timestamp";
  std::string turbine_id = "turbine_id";
  std::string v = "wind_speed";
  std::string theta = "pitch_angle";
  std::string omega = "rotor_speed";
  std::string t_out = "temp_out";
  std::string t_nac = "temp_nacelle";
  std::string t_rot = "temp_rotor";
  std::string alpha_v = "vane_angle";
  std::string alpha_w = "wind_direction";
  std::string p = "power";
};

struct LoadResult {
  Dataset data;
  std::size_t dropped_count = 0;
};

// Reads a delimited text file (',' or ';', auto-detected from the header).
// Rows with a missing or unparseable mapped field, non-finite values, or
// v < 0 / omega < 0 are dropped and counted. Throws DataError when the file
// is missing, a mapped column is absent from the header, or no row survives.
LoadResult load_csv(const std::string& path, const CsvSchema& schema = {});

// Writes records in the canonical schema so that load_csv reads them back.
void write_csv(const std::string& path, const Dataset& data,
               const CsvSchema& schema = {});

// Seconds since Unix epoch for an ISO-8601 timestamp ("YYYY-MM-DDTHH:MM:SS"
// with optional fractional seconds and 'Z' or +-HH:MM offset). Throws
// DataError on malformed input.
std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t epoch_seconds);

// Per-feature mean and population standard deviation (divisor n).
struct NormalizationStats {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t size() const { return mean.size(); }
  double standardize(std::size_t i, double x) const {
    return (x - mean[i]) / stddev[i];
  }
  double destandardize(std::size_t i, double z) const {
    return mean[i] + stddev[i] * z;
  }
};

// Fits stats over the given records only; callers pass the training split.
// Throws DataError on fewer than 2 records or a zero-variance feature (the
// offending feature is named in the message).
NormalizationStats fit_normalization(const Dataset& data,
                                     std::span<const FeatureId> features);

struct ScalarStats {
  double mean = 0;
  double stddev = 1;
};

ScalarStats fit_scalar_stats(std::span<const double> values, const std::string& label);

// Random partition into (kept, held_out) with |kept| = round(fraction * n).
// Record order within each side follows the input order. Identical seed
// reproduces the identical partition.
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction,
                                  std::uint64_t seed);

} // namespace windhybrid

#endif
