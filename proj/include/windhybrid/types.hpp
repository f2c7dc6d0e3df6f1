#ifndef WINDHYBRID_TYPES_HPP
#define WINDHYBRID_TYPES_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace windhybrid {

// Error categories aligned with the CLI exit codes:
// ConfigError -> 1, DataError -> 2, NumericError -> 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Theoretical maximum power coefficient (16/27, rounded as commonly quoted).
inline constexpr double kBetzLimit = 0.5926;

// One 10-minute SCADA sample. Angles are stored as ingested (radians),
// temperatures in degC, speeds in m/s and rad/s, power in kW.
struct TurbineRecord {
  std::string timestamp_raw;  // verbatim field from the source file
  std::int64_t timestamp = 0; // parsed, seconds since Unix epoch (UTC)
  std::string turbine_id;
  double v = 0;       // wind speed
  double theta = 0;   // pitch angle
  double omega = 0;   // rotor angular speed
  double t_out = 0;   // outdoor temperature
  double t_nac = 0;   // nacelle temperature
  double t_rot = 0;   // rotor temperature
  double alpha_v = 0; // vane angle
  double alpha_w = 0; // wind direction
  double p = 0;       // generated power
};

inline constexpr int kPhysFeatureCount = 3;
inline constexpr int kFullFeatureCount = 8;

// (v, theta, omega) -- the inputs of the physics submodel.
using PhysFeatures = std::array<double, kPhysFeatureCount>;
// (v, theta, omega, t_out, t_nac, t_rot, alpha_v, alpha_w).
using FullFeatures = std::array<double, kFullFeatureCount>;

inline PhysFeatures phys_features(const TurbineRecord& r) {
  return {r.v, r.theta, r.omega};
}

inline FullFeatures full_features(const TurbineRecord& r) {
  return {r.v, r.theta, r.omega, r.t_out, r.t_nac, r.t_rot, r.alpha_v, r.alpha_w};
}

// The first three entries of the full tuple are the physics inputs.
inline PhysFeatures phys_part(const FullFeatures& x) {
  return {x[0], x[1], x[2]};
}

struct Dataset {
  std::vector<TurbineRecord> records;
  std::string provenance;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

// Feature identifiers used by schema mapping and normalization selectors.
enum class FeatureId {
  v,
  theta,
  omega,
  t_out,
  t_nac,
  t_rot,
  alpha_v,
  alpha_w,
  p,
};

inline constexpr std::array<FeatureId, kFullFeatureCount> kFullFeatureIds = {
    FeatureId::v,     FeatureId::theta, FeatureId::omega,   FeatureId::t_out,
    FeatureId::t_nac, FeatureId::t_rot, FeatureId::alpha_v, FeatureId::alpha_w};

const char* feature_name(FeatureId id);
double feature_value(const TurbineRecord& r, FeatureId id);

} // namespace windhybrid

#endif
