#ifndef WINDHYBRID_NN_HPP
#define WINDHYBRID_NN_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "windhybrid/types.hpp"

namespace windhybrid {

enum class HiddenActivation { relu, tanh, sigmoid };

struct OutputActivation {
  enum class Kind { identity, scaled_sigmoid };
  Kind kind = Kind::identity;
  double bound = 0; // upper bound for scaled_sigmoid; output lies in (0, bound)

  static OutputActivation identity() { return {Kind::identity, 0}; }
  static OutputActivation scaled_sigmoid(double bound);
};

// Fully-connected network. weights[l] has shape
// (layer_sizes[l+1] x layer_sizes[l]), row-major.
struct MlpNetwork {
  std::vector<int> layer_sizes;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  HiddenActivation hidden_activation = HiddenActivation::tanh;
  OutputActivation output_activation;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;
};

// Glorot-uniform weights, zero biases, seeded.
MlpNetwork make_mlp(std::vector<int> layer_sizes, HiddenActivation hidden,
                    OutputActivation output, std::uint64_t seed);

std::vector<double> forward(const MlpNetwork& net, std::span<const double> input);

// Batch evaluation for single-output networks: out[i] = net(X row i).
// forward_batch runs the rows in parallel; forward_batch_ref is the serial
// reference and produces bit-identical results.
void forward_batch(const MlpNetwork& net, std::span<const double> X,
                   std::size_t n, std::span<double> out);
void forward_batch_ref(const MlpNetwork& net, std::span<const double> X,
                       std::size_t n, std::span<double> out);

enum class LossKind { mae, pinball };

struct LossSpec {
  LossKind kind = LossKind::mae;
  double quantile = 0.5; // used by pinball only

  static LossSpec mae() { return {LossKind::mae, 0.5}; }
  static LossSpec pinball(double q);
};

// Training data for a single-output network. The prediction for row i is
// scale[i] * net(x_i); an empty scale means 1 everywhere. The physics
// submodel uses scale to push the kinematic factor of the power equation
// through the loss.
struct TrainSet {
  std::vector<double> X; // n * dim, row-major
  std::vector<double> y; // n
  std::vector<double> scale;
  std::size_t dim = 0;

  std::size_t size() const { return dim == 0 ? 0 : X.size() / dim; }
  std::span<const double> row(std::size_t i) const {
    return {X.data() + i * dim, dim};
  }
  double scale_at(std::size_t i) const { return scale.empty() ? 1.0 : scale[i]; }
  void add_row(std::span<const double> x, double target, double s = 1.0);
};

struct MlpGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

// Gradient of the mean loss over the given rows with respect to every
// weight and bias.
MlpGradients gradients(const MlpNetwork& net, const TrainSet& data,
                       std::span<const std::size_t> rows, const LossSpec& loss);

double batch_loss(const MlpNetwork& net, const TrainSet& data,
                  const LossSpec& loss);

struct TrainConfig {
  int batch_size = 128;
  int max_epochs = 150;
  double initial_lr = 0.01;
  double lr_decay_factor = 0.5;
  int patience = 8; // epochs without validation improvement before decay
  LossSpec loss = LossSpec::mae();
  std::uint64_t seed = 0;
};

struct TrainTrace {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> learning_rate;
  int best_epoch = -1; // argmin of val_loss; parameters restored from it
};

// Mini-batch gradient descent with decay-on-plateau. The network is left at
// the parameters of best_epoch. Fully reproducible under cfg.seed. Throws
// NumericError if the loss turns non-finite.
TrainTrace train(MlpNetwork& net, const TrainSet& train_set,
                 const TrainSet& val_set, const TrainConfig& cfg);

// Two copies of `base` fine-tuned with pinball(q_lo) and pinball(q_hi).
std::pair<MlpNetwork, MlpNetwork> quantile_heads(const MlpNetwork& base,
                                                 const TrainSet& train_set,
                                                 const TrainSet& val_set,
                                                 const TrainConfig& cfg,
                                                 double q_lo, double q_hi);

// Fixed small grid over depth, width and learning rate, selected on
// validation loss. Returns the winning hidden layout and learning rate.
struct GridChoice {
  std::vector<int> hidden_layers;
  double learning_rate = 0;
  double val_loss = 0;
};
GridChoice select_hyperparameters(const TrainSet& train_set,
                                  const TrainSet& val_set, HiddenActivation hidden,
                                  OutputActivation output, TrainConfig base_cfg);

} // namespace windhybrid

#endif
