#include "windhybrid/serialize.hpp"

#include <fstream>

namespace windhybrid {

namespace {

constexpr int kModelFormatVersion = 1;

const char* hidden_name(HiddenActivation act) {
  switch (act) {
  case HiddenActivation::relu: return "relu";
  case HiddenActivation::tanh: return "tanh";
  case HiddenActivation::sigmoid: return "sigmoid";
  }
  return "?";
}

HiddenActivation hidden_from_name(const std::string& name) {
  if (name == "relu")
    return HiddenActivation::relu;
  if (name == "tanh")
    return HiddenActivation::tanh;
  if (name == "sigmoid")
    return HiddenActivation::sigmoid;
  throw DataError("unknown hidden activation '" + name + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok)
    throw DataError("model document: " + what);
}

} // namespace

Json mlp_to_json(const MlpNetwork& net) {
  Json j;
  j["version"] = kModelFormatVersion;
  j["layer_sizes"] = net.layer_sizes;
  j["hidden_activation"] = hidden_name(net.hidden_activation);
  if (net.output_activation.kind == OutputActivation::Kind::identity) {
    j["output_activation"] = {{"kind", "identity"}};
  } else {
    j["output_activation"] = {{"kind", "scaled_sigmoid"},
                              {"bound", net.output_activation.bound}};
  }
  j["weights"] = net.weights; // row-major per layer
  j["biases"] = net.biases;
  return j;
}

MlpNetwork mlp_from_json(const Json& j) {
  require(j.contains("version"), "missing version field");
  require(j["version"].get<int>() == kModelFormatVersion,
          "unsupported network format version");
  MlpNetwork net;
  net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  net.hidden_activation = hidden_from_name(j.at("hidden_activation").get<std::string>());
  const Json& out = j.at("output_activation");
  const std::string kind = out.at("kind").get<std::string>();
  if (kind == "identity")
    net.output_activation = OutputActivation::identity();
  else if (kind == "scaled_sigmoid")
    net.output_activation = OutputActivation::scaled_sigmoid(out.at("bound").get<double>());
  else
    throw DataError("unknown output activation '" + kind + "'");
  net.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  net.biases = j.at("biases").get<std::vector<std::vector<double>>>();

  require(net.layer_sizes.size() >= 2, "too few layers");
  require(net.weights.size() == net.layer_sizes.size() - 1 &&
              net.biases.size() == net.weights.size(),
          "layer count mismatch");
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const auto rows = static_cast<std::size_t>(net.layer_sizes[l + 1]);
    const auto cols = static_cast<std::size_t>(net.layer_sizes[l]);
    require(net.weights[l].size() == rows * cols, "weight shape mismatch");
    require(net.biases[l].size() == rows, "bias shape mismatch");
  }
  return net;
}

Json stats_to_json(const NormalizationStats& stats) {
  return Json{{"names", stats.names}, {"mean", stats.mean}, {"stddev", stats.stddev}};
}

NormalizationStats stats_from_json(const Json& j) {
  NormalizationStats stats;
  stats.names = j.at("names").get<std::vector<std::string>>();
  stats.mean = j.at("mean").get<std::vector<double>>();
  stats.stddev = j.at("stddev").get<std::vector<double>>();
  require(stats.mean.size() == stats.stddev.size() &&
              stats.mean.size() == stats.names.size(),
          "normalization stats shape mismatch");
  for (double sd : stats.stddev)
    require(sd > 0, "non-positive standard deviation");
  return stats;
}

Json physics_to_json(const PhysicsModel& model) {
  return Json{{"cp_net", mlp_to_json(model.cp_net)},
              {"constants",
               {{"rho", model.constants.rho},
                {"rotor_radius", model.constants.rotor_radius}}},
              {"x_stats", stats_to_json(model.x_stats)}};
}

PhysicsModel physics_from_json(const Json& j) {
  PhysicsModel model;
  model.cp_net = mlp_from_json(j.at("cp_net"));
  model.constants.rho = j.at("constants").at("rho").get<double>();
  model.constants.rotor_radius = j.at("constants").at("rotor_radius").get<double>();
  model.x_stats = stats_from_json(j.at("x_stats"));
  require(model.cp_net.input_size() == kPhysFeatureCount &&
              model.cp_net.output_size() == 1,
          "physics network shape mismatch");
  return model;
}

Json hybrid_to_json(const HybridModel& model, const QuantileHeads* heads,
                    const Json& metadata) {
  Json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = "hybrid";
  j["physics"] = physics_to_json(model.physics);
  j["residual"] = {{"net", mlp_to_json(model.residual)},
                   {"x_stats", stats_to_json(model.xfull_stats)},
                   {"target_mean", model.r_stats.mean},
                   {"target_std", model.r_stats.stddev}};
  if (heads) {
    j["quantile_heads"] = {{"lower", mlp_to_json(heads->lower)},
                           {"upper", mlp_to_json(heads->upper)},
                           {"q_lo", heads->q_lo},
                           {"q_hi", heads->q_hi}};
  }
  if (!metadata.empty())
    j["metadata"] = metadata;
  return j;
}

HybridModel hybrid_from_json(const Json& j, std::optional<QuantileHeads>* heads) {
  require(j.contains("format_version"), "missing format_version");
  require(j["format_version"].get<int>() == kModelFormatVersion,
          "unsupported model format version");
  require(j.at("kind").get<std::string>() == "hybrid", "not a hybrid model file");

  HybridModel model;
  model.physics = physics_from_json(j.at("physics"));
  const Json& res = j.at("residual");
  model.residual = mlp_from_json(res.at("net"));
  model.xfull_stats = stats_from_json(res.at("x_stats"));
  model.r_stats.mean = res.at("target_mean").get<double>();
  model.r_stats.stddev = res.at("target_std").get<double>();
  require(model.residual.input_size() == kFullFeatureCount &&
              model.residual.output_size() == 1,
          "residual network shape mismatch");

  if (heads) {
    heads->reset();
    if (j.contains("quantile_heads")) {
      const Json& h = j["quantile_heads"];
      QuantileHeads q;
      q.lower = mlp_from_json(h.at("lower"));
      q.upper = mlp_from_json(h.at("upper"));
      q.q_lo = h.at("q_lo").get<double>();
      q.q_hi = h.at("q_hi").get<double>();
      *heads = std::move(q);
    }
  }
  return model;
}

Json report_to_json(const CleaningReport& report) {
  return Json{{"input_count", report.input_count},
              {"betz_rejected", report.betz_rejected},
              {"anomaly_rejected", report.anomaly_rejected},
              {"cutoff_rejected", report.cutoff_rejected},
              {"anomaly_iterations", report.anomaly_iterations},
              {"retained_fraction", report.retained_fraction}};
}

Json report_to_json(const MetricsReport& report) {
  return Json{{"mae_kw", report.mae},
              {"rmse_kw", report.rmse},
              {"mape_percent", report.mape},
              {"r2", report.r2},
              {"n", report.n}};
}

Json report_to_json(const UncertaintyReport& report) {
  return Json{{"empirical_coverage", report.empirical_coverage},
              {"mean_interval_length_kw", report.mean_interval_length},
              {"alpha", report.alpha},
              {"evaluation_size", report.evaluation_size},
              {"crossings", report.crossings}};
}

Json trace_to_json(const TrainTrace& trace) {
  return Json{{"train_loss", trace.train_loss},
              {"val_loss", trace.val_loss},
              {"learning_rate", trace.learning_rate},
              {"best_epoch", trace.best_epoch}};
}

Json summary_to_json(const ShapSummary& summary) {
  Json ranking = Json::array();
  for (const ShapRankingEntry& e : summary.ranking)
    ranking.push_back({{"feature", e.feature}, {"mean_abs_phi_kw", e.mean_abs_phi}});
  return Json{{"ranking", ranking}};
}

Json scatter_to_json(const ScatterFit& fit) {
  return Json{{"feature", fit.feature},
              {"linear", {{"intercept", fit.linear_intercept}, {"slope", fit.linear_slope}}},
              {"quadratic", {{"c0", fit.quadratic[0]},
                             {"c1", fit.quadratic[1]},
                             {"c2", fit.quadratic[2]}}},
              {"n", fit.value.size()}};
}

void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot open output file: " + path);
  out << j.dump(2) << '\n';
  if (!out)
    throw DataError("failed writing " + path);
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw DataError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

} // namespace windhybrid
