#ifndef WINDHYBRID_SERIALIZE_HPP
#define WINDHYBRID_SERIALIZE_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "windhybrid/conformal.hpp"
#include "windhybrid/hybrid.hpp"
#include "windhybrid/metrics.hpp"
#include "windhybrid/preprocess.hpp"
#include "windhybrid/shap.hpp"

namespace windhybrid {

using Json = nlohmann::json;

Json mlp_to_json(const MlpNetwork& net);
MlpNetwork mlp_from_json(const Json& j);

Json stats_to_json(const NormalizationStats& stats);
NormalizationStats stats_from_json(const Json& j);

Json physics_to_json(const PhysicsModel& model);
PhysicsModel physics_from_json(const Json& j);

// Composite model document; quantile heads are stored when present so that
// interval prediction does not retrain anything.
Json hybrid_to_json(const HybridModel& model,
                    const QuantileHeads* heads = nullptr,
                    const Json& metadata = Json::object());
HybridModel hybrid_from_json(const Json& j,
                             std::optional<QuantileHeads>* heads = nullptr);

Json report_to_json(const CleaningReport& report);
Json report_to_json(const MetricsReport& report);
Json report_to_json(const UncertaintyReport& report);
Json trace_to_json(const TrainTrace& trace);
Json summary_to_json(const ShapSummary& summary);
Json scatter_to_json(const ScatterFit& fit);

void save_json(const std::string& path, const Json& j);
Json load_json(const std::string& path);

} // namespace windhybrid

#endif
