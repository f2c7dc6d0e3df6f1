#include "windhybrid/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "windhybrid/rng.hpp"

namespace windhybrid {

namespace {

// Clamp keeps the scaled-sigmoid output strictly inside (0, bound) even for
// saturating pre-activations; the same clamped value feeds the derivative so
// forward and backward stay consistent.
constexpr double kSigmoidClamp = 1e-12;

double stable_sigmoid(double z) {
  double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                    : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(s, kSigmoidClamp, 1.0 - kSigmoidClamp);
}

double hidden_apply(HiddenActivation act, double z) {
  switch (act) {
  case HiddenActivation::relu: return z > 0 ? z : 0.0;
  case HiddenActivation::tanh: return std::tanh(z);
  case HiddenActivation::sigmoid: return stable_sigmoid(z);
  }
  return z;
}

double hidden_derivative(HiddenActivation act, double z) {
  switch (act) {
  case HiddenActivation::relu: return z > 0 ? 1.0 : 0.0;
  case HiddenActivation::tanh: {
    double t = std::tanh(z);
    return 1.0 - t * t;
  }
  case HiddenActivation::sigmoid: {
    double s = stable_sigmoid(z);
    return s * (1.0 - s);
  }
  }
  return 1.0;
}

double output_apply(const OutputActivation& act, double z) {
  if (act.kind == OutputActivation::Kind::identity)
    return z;
  return act.bound * stable_sigmoid(z);
}

double output_derivative(const OutputActivation& act, double z) {
  if (act.kind == OutputActivation::Kind::identity)
    return 1.0;
  double s = stable_sigmoid(z);
  return act.bound * s * (1.0 - s);
}

double loss_value(const LossSpec& loss, double pred, double target) {
  const double u = target - pred;
  if (loss.kind == LossKind::mae)
    return std::fabs(u);
  return u >= 0 ? loss.quantile * u : (loss.quantile - 1.0) * u;
}

// Subgradient at zero residual is 0 for both losses.
double loss_dpred(const LossSpec& loss, double pred, double target) {
  const double u = target - pred;
  if (loss.kind == LossKind::mae)
    return u > 0 ? -1.0 : (u < 0 ? 1.0 : 0.0);
  if (u > 0)
    return -loss.quantile;
  if (u < 0)
    return 1.0 - loss.quantile;
  return 0.0;
}

// Per-sample forward keeping pre-activations for backprop.
struct ForwardScratch {
  std::vector<std::vector<double>> z; // pre-activations per layer
  std::vector<std::vector<double>> a; // activations per layer (a[0] = input)
};

void forward_into(const MlpNetwork& net, std::span<const double> input,
                  ForwardScratch& s) {
  const std::size_t layers = net.layer_count();
  s.z.resize(layers);
  s.a.resize(layers + 1);
  s.a[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = net.layer_sizes[l];
    const int out = net.layer_sizes[l + 1];
    s.z[l].resize(out);
    s.a[l + 1].resize(out);
    const std::vector<double>& w = net.weights[l];
    const std::vector<double>& prev = s.a[l];
    const bool last = l + 1 == layers;
    for (int o = 0; o < out; ++o) {
      double acc = net.biases[l][o];
      const double* wrow = w.data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i)
        acc += wrow[i] * prev[i];
      s.z[l][o] = acc;
      s.a[l + 1][o] = last ? output_apply(net.output_activation, acc)
                           : hidden_apply(net.hidden_activation, acc);
    }
  }
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.batch_size < 1)
    throw ConfigError("train: batch_size must be >= 1");
  if (cfg.max_epochs < 1)
    throw ConfigError("train: max_epochs must be >= 1");
  if (!(cfg.initial_lr > 0))
    throw ConfigError("train: initial_lr must be positive");
  if (!(cfg.lr_decay_factor > 0 && cfg.lr_decay_factor < 1))
    throw ConfigError("train: lr_decay_factor must lie in (0,1)");
  if (cfg.patience < 1)
    throw ConfigError("train: patience must be >= 1");
  if (cfg.loss.kind == LossKind::pinball &&
      !(cfg.loss.quantile > 0 && cfg.loss.quantile < 1))
    throw ConfigError("train: pinball quantile must lie in (0,1)");
}

} // namespace

OutputActivation OutputActivation::scaled_sigmoid(double bound) {
  if (!(bound > 0))
    throw ConfigError("scaled_sigmoid bound must be positive");
  return {Kind::scaled_sigmoid, bound};
}

LossSpec LossSpec::pinball(double q) {
  if (!(q > 0 && q < 1))
    throw ConfigError("pinball quantile must lie in (0,1)");
  return {LossKind::pinball, q};
}

std::size_t MlpNetwork::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += weights[l].size() + biases[l].size();
  return n;
}

MlpNetwork make_mlp(std::vector<int> layer_sizes, HiddenActivation hidden,
                    OutputActivation output, std::uint64_t seed) {
  if (layer_sizes.size() < 2)
    throw ConfigError("network needs at least input and output layers");
  for (int s : layer_sizes)
    if (s < 1)
      throw ConfigError("layer sizes must be positive");

  MlpNetwork net;
  net.layer_sizes = std::move(layer_sizes);
  net.hidden_activation = hidden;
  net.output_activation = output;
  std::mt19937_64 gen(mix_seed(seed, 0x6d6c705full));
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const int in = net.layer_sizes[l];
    const int out = net.layer_sizes[l + 1];
    const double r = std::sqrt(6.0 / (in + out));
    std::vector<double> w(static_cast<std::size_t>(in) * out);
    for (double& x : w)
      x = uniform(gen, -r, r);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(out, 0.0);
  }
  return net;
}

std::vector<double> forward(const MlpNetwork& net, std::span<const double> input) {
  if (static_cast<int>(input.size()) != net.input_size())
    throw DataError("forward: input dimension mismatch");
  ForwardScratch s;
  forward_into(net, input, s);
  return s.a.back();
}

namespace {

void batch_eval(const MlpNetwork& net, std::span<const double> X, std::size_t n,
                std::span<double> out, bool parallel) {
  if (net.output_size() != 1)
    throw DataError("forward_batch expects a single-output network");
  const std::size_t dim = static_cast<std::size_t>(net.input_size());
  if (X.size() != n * dim || out.size() != n)
    throw DataError("forward_batch: shape mismatch");
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    ForwardScratch s;
    forward_into(net, {X.data() + static_cast<std::size_t>(i) * dim, dim}, s);
    out[static_cast<std::size_t>(i)] = s.a.back()[0];
  }
}

} // namespace

void forward_batch(const MlpNetwork& net, std::span<const double> X,
                   std::size_t n, std::span<double> out) {
  batch_eval(net, X, n, out, true);
}

void forward_batch_ref(const MlpNetwork& net, std::span<const double> X,
                       std::size_t n, std::span<double> out) {
  batch_eval(net, X, n, out, false);
}

void TrainSet::add_row(std::span<const double> x, double target, double s) {
  if (dim == 0)
    dim = x.size();
  if (x.size() != dim)
    throw DataError("TrainSet: inconsistent row dimension");
  X.insert(X.end(), x.begin(), x.end());
  y.push_back(target);
  if (s != 1.0 || !scale.empty()) {
    if (scale.empty())
      scale.assign(y.size() - 1, 1.0);
    scale.push_back(s);
  }
}

MlpGradients gradients(const MlpNetwork& net, const TrainSet& data,
                       std::span<const std::size_t> rows, const LossSpec& loss) {
  if (rows.empty())
    throw DataError("gradients: empty batch");
  if (net.output_size() != 1)
    throw DataError("gradients: training expects a single-output network");
  if (data.dim != static_cast<std::size_t>(net.input_size()))
    throw DataError("gradients: input dimension mismatch");

  const std::size_t layers = net.layer_count();
  MlpGradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    g.weights[l].assign(net.weights[l].size(), 0.0);
    g.biases[l].assign(net.biases[l].size(), 0.0);
  }

  ForwardScratch s;
  std::vector<std::vector<double>> delta(layers);
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (std::size_t idx : rows) {
    forward_into(net, data.row(idx), s);
    const double k = data.scale_at(idx);
    const double pred = k * s.a[layers][0];
    const double dl = loss_dpred(loss, pred, data.y[idx]) * k;

    delta[layers - 1].assign(1, dl * output_derivative(net.output_activation,
                                                       s.z[layers - 1][0]));
    for (std::size_t l = layers - 1; l-- > 0;) {
      const int out = net.layer_sizes[l + 1];
      const int next = net.layer_sizes[l + 2];
      delta[l].assign(out, 0.0);
      const std::vector<double>& w_next = net.weights[l + 1];
      for (int o = 0; o < out; ++o) {
        double acc = 0;
        for (int q = 0; q < next; ++q)
          acc += w_next[static_cast<std::size_t>(q) * out + o] * delta[l + 1][q];
        delta[l][o] = acc * hidden_derivative(net.hidden_activation, s.z[l][o]);
      }
    }

    for (std::size_t l = 0; l < layers; ++l) {
      const int in = net.layer_sizes[l];
      const int out = net.layer_sizes[l + 1];
      for (int o = 0; o < out; ++o) {
        const double d = delta[l][o] * inv_n;
        g.biases[l][o] += d;
        double* grow = g.weights[l].data() + static_cast<std::size_t>(o) * in;
        const std::vector<double>& prev = s.a[l];
        for (int i = 0; i < in; ++i)
          grow[i] += d * prev[i];
      }
    }
  }
  return g;
}

double batch_loss(const MlpNetwork& net, const TrainSet& data,
                  const LossSpec& loss) {
  const std::size_t n = data.size();
  if (n == 0)
    throw DataError("batch_loss: empty set");
  ForwardScratch s;
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    forward_into(net, data.row(i), s);
    acc += loss_value(loss, data.scale_at(i) * s.a.back()[0], data.y[i]);
  }
  return acc / static_cast<double>(n);
}

TrainTrace train(MlpNetwork& net, const TrainSet& train_set,
                 const TrainSet& val_set, const TrainConfig& cfg) {
  validate_config(cfg);
  const std::size_t n = train_set.size();
  if (n == 0 || val_set.size() == 0)
    throw DataError("train: empty training or validation set");

  TrainTrace trace;
  double lr = cfg.initial_lr;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_w = net.weights;
  std::vector<std::vector<double>> best_b = net.biases;
  int stall = 0;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = i;

  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::mt19937_64 gen(mix_seed(cfg.seed, 0xe70c5 + static_cast<std::uint64_t>(epoch)));
    shuffle_inplace(order, gen);

    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      MlpGradients g = gradients(net, train_set, {order.data() + start, len}, cfg.loss);
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        for (std::size_t j = 0; j < net.weights[l].size(); ++j)
          net.weights[l][j] -= lr * g.weights[l][j];
        for (std::size_t j = 0; j < net.biases[l].size(); ++j)
          net.biases[l][j] -= lr * g.biases[l][j];
      }
    }

    const double tl = batch_loss(net, train_set, cfg.loss);
    const double vl = batch_loss(net, val_set, cfg.loss);
    if (!std::isfinite(tl) || !std::isfinite(vl))
      throw NumericError("training diverged (non-finite loss) at epoch " +
                         std::to_string(epoch));
    trace.train_loss.push_back(tl);
    trace.val_loss.push_back(vl);
    trace.learning_rate.push_back(lr);

    if (vl < best_val) {
      best_val = vl;
      best_w = net.weights;
      best_b = net.biases;
      trace.best_epoch = epoch;
      stall = 0;
    } else if (++stall >= cfg.patience) {
      lr *= cfg.lr_decay_factor;
      stall = 0;
    }
  }

  net.weights = std::move(best_w);
  net.biases = std::move(best_b);
  return trace;
}

std::pair<MlpNetwork, MlpNetwork> quantile_heads(const MlpNetwork& base,
                                                 const TrainSet& train_set,
                                                 const TrainSet& val_set,
                                                 const TrainConfig& cfg,
                                                 double q_lo, double q_hi) {
  if (!(q_lo > 0 && q_lo <= q_hi && q_hi < 1))
    throw ConfigError("quantile_heads: require 0 < q_lo <= q_hi < 1");
  MlpNetwork lower = base;
  MlpNetwork upper = base;
  TrainConfig lo_cfg = cfg;
  lo_cfg.loss = LossSpec::pinball(q_lo);
  TrainConfig hi_cfg = cfg;
  hi_cfg.loss = LossSpec::pinball(q_hi);
  train(lower, train_set, val_set, lo_cfg);
  train(upper, train_set, val_set, hi_cfg);
  return {std::move(lower), std::move(upper)};
}

GridChoice select_hyperparameters(const TrainSet& train_set,
                                  const TrainSet& val_set, HiddenActivation hidden,
                                  OutputActivation output, TrainConfig base_cfg) {
  static const int kDepths[] = {1, 2};
  static const int kWidths[] = {16, 32, 64};
  static const double kRates[] = {1e-2, 1e-3};

  GridChoice best;
  best.val_loss = std::numeric_limits<double>::infinity();
  const int in = static_cast<int>(train_set.dim);
  for (int depth : kDepths) {
    for (int width : kWidths) {
      for (double lr : kRates) {
        std::vector<int> sizes;
        sizes.push_back(in);
        for (int d = 0; d < depth; ++d)
          sizes.push_back(width);
        sizes.push_back(1);
        MlpNetwork net = make_mlp(sizes, hidden, output, base_cfg.seed);
        TrainConfig cfg = base_cfg;
        cfg.initial_lr = lr;
        TrainTrace trace = train(net, train_set, val_set, cfg);
        const double vl = trace.val_loss[static_cast<std::size_t>(trace.best_epoch)];
        if (vl < best.val_loss) {
          best.val_loss = vl;
          best.learning_rate = lr;
          best.hidden_layers.assign(sizes.begin() + 1, sizes.end() - 1);
        }
      }
    }
  }
  return best;
}

} // namespace windhybrid
