#include "windhybrid/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "windhybrid/rng.hpp"

namespace windhybrid {

const char* feature_name(FeatureId id) {
  switch (id) {
  case FeatureId::v: return "v";
  case FeatureId::theta: return "theta";
  case FeatureId::omega: return "omega";
  case FeatureId::t_out: return "t_out";
  case FeatureId::t_nac: return "t_nac";
  case FeatureId::t_rot: return "t_rot";
  case FeatureId::alpha_v: return "alpha_v";
  case FeatureId::alpha_w: return "alpha_w";
  case FeatureId::p: return "p";
  }
  return "?";
}

double feature_value(const TurbineRecord& r, FeatureId id) {
  switch (id) {
  case FeatureId::v: return r.v;
  case FeatureId::theta: return r.theta;
  case FeatureId::omega: return r.omega;
  case FeatureId::t_out: return r.t_out;
  case FeatureId::t_nac: return r.t_nac;
  case FeatureId::t_rot: return r.t_rot;
  case FeatureId::alpha_v: return r.alpha_v;
  case FeatureId::alpha_w: return r.alpha_w;
  case FeatureId::p: return r.p;
  }
  return 0;
}

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// days_from_civil).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos)
    return false;
  std::size_t e = s.find_last_not_of(" \t") + 1;
  const char* first = s.data() + b;
  const char* last = s.data() + e;
  if (first != last && *first == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

} // namespace

std::int64_t parse_iso8601(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0;
  int consumed = 0;
  // Accept 'T' or ' ' as the date/time separator.
  int n = std::sscanf(text.c_str(), "%d-%d-%d%*1[T ]%d:%d:%lf%n", &y, &mo, &d,
                      &h, &mi, &sec, &consumed);
  if (n != 6 || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 ||
      sec < 0 || sec >= 61)
    throw DataError("malformed ISO-8601 timestamp: '" + text + "'");
  std::int64_t epoch =
      days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 +
      static_cast<std::int64_t>(sec);
  std::string rest = text.substr(consumed);
  if (!rest.empty() && rest != "Z") {
    int oh = 0, om = 0;
    if (std::sscanf(rest.c_str(), "%d:%d", &oh, &om) != 2)
      throw DataError("malformed ISO-8601 offset: '" + text + "'");
    std::int64_t off = std::int64_t(std::abs(oh)) * 3600 + std::int64_t(om) * 60;
    epoch += (oh < 0 || rest[0] == '-') ? off : -off;
  }
  return epoch;
}

std::string format_iso8601(std::int64_t t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                static_cast<int>(rem % 60));
  return buf;
}

LoadResult load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open input file: " + path);

  std::string header;
  if (!std::getline(in, header))
    throw DataError("empty input file: " + path);
  char delim = header.find(';') != std::string::npos ? ';' : ',';
  std::vector<std::string> cols = split_line(header, delim);

  auto col_index = [&](const std::string& name) {
    auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end())
      throw DataError("column '" + name + "' not found in header of " + path);
    return static_cast<std::size_t>(it - cols.begin());
  };

  const std::size_t i_ts = col_index(schema.timestamp);
  const std::size_t i_id = col_index(schema.turbine_id);
  struct NumCol {
    std::size_t index;
    double TurbineRecord::* field;
    bool nonneg;
  };
  const NumCol num_cols[] = {
      {col_index(schema.v), &TurbineRecord::v, true},
      {col_index(schema.theta), &TurbineRecord::theta, false},
      {col_index(schema.omega), &TurbineRecord::omega, true},
      {col_index(schema.t_out), &TurbineRecord::t_out, false},
      {col_index(schema.t_nac), &TurbineRecord::t_nac, false},
      {col_index(schema.t_rot), &TurbineRecord::t_rot, false},
      {col_index(schema.alpha_v), &TurbineRecord::alpha_v, false},
      {col_index(schema.alpha_w), &TurbineRecord::alpha_w, false},
      {col_index(schema.p), &TurbineRecord::p, false},
  };

  LoadResult result;
  result.data.provenance = path;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r")
      continue;
    std::vector<std::string> fields = split_line(line, delim);
    TurbineRecord rec;
    bool ok = true;
    for (const NumCol& c : num_cols) {
      double value;
      if (c.index >= fields.size() || !parse_double(fields[c.index], value) ||
          (c.nonneg && value < 0)) {
        ok = false;
        break;
      }
      rec.*(c.field) = value;
    }
    if (ok) {
      if (i_ts >= fields.size() || i_id >= fields.size()) {
        ok = false;
      } else {
        try {
          rec.timestamp_raw = fields[i_ts];
          rec.timestamp = parse_iso8601(rec.timestamp_raw);
          rec.turbine_id = fields[i_id];
        } catch (const DataError&) {
          ok = false;
        }
      }
    }
    if (ok)
      result.data.records.push_back(std::move(rec));
    else
      ++result.dropped_count;
  }
  if (result.data.records.empty())
    throw DataError("no usable rows in " + path);
  return result;
}

void write_csv(const std::string& path, const Dataset& data,
               const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot open output file: " + path);
  out << schema.timestamp << ',' << schema.turbine_id << ',' << schema.v << ','
      << schema.theta << ',' << schema.omega << ',' << schema.t_out << ','
      << schema.t_nac << ',' << schema.t_rot << ',' << schema.alpha_v << ','
      << schema.alpha_w << ',' << schema.p << '\n';
  for (const TurbineRecord& r : data.records) {
    const std::string& ts =
        r.timestamp_raw.empty() ? format_iso8601(r.timestamp) : r.timestamp_raw;
    out << ts << ',' << r.turbine_id << ',' << format_double(r.v) << ','
        << format_double(r.theta) << ',' << format_double(r.omega) << ','
        << format_double(r.t_out) << ',' << format_double(r.t_nac) << ','
        << format_double(r.t_rot) << ',' << format_double(r.alpha_v) << ','
        << format_double(r.alpha_w) << ',' << format_double(r.p) << '\n';
  }
  if (!out)
    throw DataError("failed writing " + path);
}

NormalizationStats fit_normalization(const Dataset& data,
                                     std::span<const FeatureId> features) {
  if (data.size() < 2)
    throw DataError("normalization requires at least 2 records");
  NormalizationStats stats;
  const double n = static_cast<double>(data.size());
  for (FeatureId id : features) {
    double sum = 0;
    for (const TurbineRecord& r : data.records)
      sum += feature_value(r, id);
    double mean = sum / n;
    double ss = 0;
    for (const TurbineRecord& r : data.records) {
      double d = feature_value(r, id) - mean;
      ss += d * d;
    }
    double sd = std::sqrt(ss / n);
    if (!(sd > 0))
      throw DataError(std::string("feature '") + feature_name(id) +
                      "' has zero variance");
    stats.names.emplace_back(feature_name(id));
    stats.mean.push_back(mean);
    stats.stddev.push_back(sd);
  }
  return stats;
}

ScalarStats fit_scalar_stats(std::span<const double> values,
                             const std::string& label) {
  if (values.size() < 2)
    throw DataError("scalar stats for '" + label + "' require at least 2 values");
  double sum = 0;
  for (double x : values)
    sum += x;
  double mean = sum / static_cast<double>(values.size());
  double ss = 0;
  for (double x : values) {
    double d = x - mean;
    ss += d * d;
  }
  double sd = std::sqrt(ss / static_cast<double>(values.size()));
  if (!(sd > 0))
    throw DataError("'" + label + "' has zero variance");
  return {mean, sd};
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction,
                                  std::uint64_t seed) {
  if (!(fraction > 0 && fraction < 1))
    throw ConfigError("split fraction must lie in (0,1)");
  if (data.empty())
    throw DataError("cannot split an empty dataset");
  const std::size_t n = data.size();
  const std::size_t k =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (k == 0 || k == n)
    throw DataError("dataset too small for the requested split fraction");

  std::mt19937_64 gen(mix_seed(seed, 0x517cc1b727220a95ull));
  std::vector<std::size_t> idx = random_permutation(n, gen);
  std::vector<bool> in_first(n, false);
  for (std::size_t i = 0; i < k; ++i)
    in_first[idx[i]] = true;

  Dataset first, second;
  first.provenance = data.provenance + " [split keep]";
  second.provenance = data.provenance + " [split hold-out]";
  first.records.reserve(k);
  second.records.reserve(n - k);
  for (std::size_t i = 0; i < n; ++i)
    (in_first[i] ? first : second).records.push_back(data.records[i]);
  return {std::move(first), std::move(second)};
}

} // namespace windhybrid
