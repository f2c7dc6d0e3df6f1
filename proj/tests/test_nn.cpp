#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "windhybrid/nn.hpp"
#include "windhybrid/rng.hpp"

using namespace windhybrid;

namespace {

// Independent oracle: central finite differences of the batch loss with
// respect to every parameter.
MlpGradients finite_difference_gradients(MlpNetwork net, const TrainSet& data,
                                         std::span<const std::size_t> rows,
                                         const LossSpec& loss,
                                         double h = 1e-5) {
  TrainSet batch;
  batch.dim = data.dim;
  for (std::size_t idx : rows)
    batch.add_row(data.row(idx), data.y[idx], data.scale_at(idx));

  MlpGradients g;
  g.weights.resize(net.layer_count());
  g.biases.resize(net.layer_count());
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    g.weights[l].assign(net.weights[l].size(), 0.0);
    g.biases[l].assign(net.biases[l].size(), 0.0);
    for (std::size_t j = 0; j < net.weights[l].size(); ++j) {
      const double saved = net.weights[l][j];
      net.weights[l][j] = saved + h;
      const double up = batch_loss(net, batch, loss);
      net.weights[l][j] = saved - h;
      const double down = batch_loss(net, batch, loss);
      net.weights[l][j] = saved;
      g.weights[l][j] = (up - down) / (2 * h);
    }
    for (std::size_t j = 0; j < net.biases[l].size(); ++j) {
      const double saved = net.biases[l][j];
      net.biases[l][j] = saved + h;
      const double up = batch_loss(net, batch, loss);
      net.biases[l][j] = saved - h;
      const double down = batch_loss(net, batch, loss);
      net.biases[l][j] = saved;
      g.biases[l][j] = (up - down) / (2 * h);
    }
  }
  return g;
}

double max_relative_error(const MlpGradients& a, const MlpGradients& b) {
  double worst = 0;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    for (std::size_t j = 0; j < a.weights[l].size(); ++j) {
      double denom = std::max({std::fabs(a.weights[l][j]),
                               std::fabs(b.weights[l][j]), 1e-3});
      worst = std::max(worst,
                       std::fabs(a.weights[l][j] - b.weights[l][j]) / denom);
    }
    for (std::size_t j = 0; j < a.biases[l].size(); ++j) {
      double denom = std::max({std::fabs(a.biases[l][j]),
                               std::fabs(b.biases[l][j]), 1e-3});
      worst =
          std::max(worst, std::fabs(a.biases[l][j] - b.biases[l][j]) / denom);
    }
  }
  return worst;
}

// Random batch with targets offset from predictions so no residual sits on
// the loss kink within the finite-difference step.
TrainSet random_batch(const MlpNetwork& net, std::size_t n, std::uint64_t seed,
                      bool with_scale = false) {
  std::mt19937_64 gen(seed);
  TrainSet set;
  set.dim = static_cast<std::size_t>(net.input_size());
  std::vector<double> x(set.dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& xi : x)
      xi = normal01(gen);
    const double scale = with_scale ? uniform(gen, 0.5, 3.0) : 1.0;
    const double offset = (uniform01(gen) < 0.5 ? -1.0 : 1.0) *
                          uniform(gen, 0.1, 1.0);
    const double pred = scale * forward(net, x)[0];
    set.add_row(x, pred + offset, scale);
  }
  return set;
}

} // namespace

TEST_CASE("forward matches affine arithmetic") {
  MlpNetwork net = make_mlp({1, 1}, HiddenActivation::relu,
                            OutputActivation::identity(), 0);
  net.weights[0] = {2.0};
  net.biases[0] = {1.0};
  const double in = 3.0;
  CHECK(forward(net, {&in, 1})[0] == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("zero network outputs zero") {
  MlpNetwork net = make_mlp({3, 4, 1}, HiddenActivation::tanh,
                            OutputActivation::identity(), 0);
  for (auto& w : net.weights)
    std::fill(w.begin(), w.end(), 0.0);
  std::vector<double> x = {5.0, -2.0, 0.5};
  CHECK(forward(net, x)[0] == 0.0);
}

TEST_CASE("scaled sigmoid at zero pre-activation gives half the bound") {
  MlpNetwork net = make_mlp({2, 1}, HiddenActivation::tanh,
                            OutputActivation::scaled_sigmoid(0.5926), 0);
  std::fill(net.weights[0].begin(), net.weights[0].end(), 0.0);
  std::vector<double> x = {1.0, 2.0};
  CHECK(forward(net, x)[0] == doctest::Approx(0.2963).epsilon(1e-12));
}

TEST_CASE("scaled sigmoid output stays strictly inside (0, bound)") {
  MlpNetwork net = make_mlp({2, 8, 1}, HiddenActivation::relu,
                            OutputActivation::scaled_sigmoid(0.5926), 21);
  std::mt19937_64 gen(33);
  for (int i = 0; i < 100000; ++i) {
    std::vector<double> x = {uniform(gen, -1e6, 1e6), uniform(gen, -1e6, 1e6)};
    const double y = forward(net, x)[0];
    CHECK(y > 0.0);
    CHECK(y < 0.5926);
  }
}

TEST_CASE("forward rejects dimension mismatch") {
  MlpNetwork net = make_mlp({3, 1}, HiddenActivation::tanh,
                            OutputActivation::identity(), 0);
  std::vector<double> x = {1.0, 2.0};
  CHECK_THROWS_AS(forward(net, x), DataError);
}

TEST_CASE("reverse-mode gradients match central finite differences") {
  struct Arch {
    std::vector<int> sizes;
    HiddenActivation hidden;
    OutputActivation output;
  };
  const Arch archs[] = {
      {{3, 8, 1}, HiddenActivation::tanh, OutputActivation::identity()},
      {{4, 6, 6, 1}, HiddenActivation::relu, OutputActivation::identity()},
      {{3, 10, 1}, HiddenActivation::sigmoid,
       OutputActivation::scaled_sigmoid(0.5926)},
      {{2, 12, 8, 1}, HiddenActivation::tanh,
       OutputActivation::scaled_sigmoid(2.0)},
  };
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Arch& a = archs[seed % 4];
    MlpNetwork net = make_mlp(a.sizes, a.hidden, a.output, seed);
    REQUIRE(net.parameter_count() <= 500);
    TrainSet data = random_batch(net, 16, seed * 13 + 1, seed % 2 == 0);
    std::vector<std::size_t> rows(data.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      rows[i] = i;
    const LossSpec loss =
        seed % 3 == 0 ? LossSpec::pinball(0.3) : LossSpec::mae();
    MlpGradients ad = gradients(net, data, rows, loss);
    MlpGradients fd = finite_difference_gradients(net, data, rows, loss);
    CHECK(max_relative_error(ad, fd) < 1e-4);
    ++checked;
  }
  CHECK(checked == 10);
}

TEST_CASE("MAE subgradient at the kink is zero") {
  MlpNetwork net = make_mlp({1, 1}, HiddenActivation::tanh,
                            OutputActivation::identity(), 5);
  net.weights[0] = {1.0};
  net.biases[0] = {0.0};
  TrainSet data;
  data.dim = 1;
  const double x = 2.0;
  data.add_row({&x, 1}, 2.0); // prediction equals target
  const std::size_t row = 0;
  MlpGradients g = gradients(net, data, {&row, 1}, LossSpec::mae());
  CHECK(g.weights[0][0] == 0.0);
  CHECK(g.biases[0][0] == 0.0);
}

TEST_CASE("pinball(0.5) gradients are exactly half the MAE gradients") {
  MlpNetwork net = make_mlp({3, 6, 1}, HiddenActivation::tanh,
                            OutputActivation::identity(), 17);
  TrainSet data = random_batch(net, 32, 99);
  std::vector<std::size_t> rows(data.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i] = i;
  MlpGradients mae = gradients(net, data, rows, LossSpec::mae());
  MlpGradients pin = gradients(net, data, rows, LossSpec::pinball(0.5));
  for (std::size_t l = 0; l < mae.weights.size(); ++l)
    for (std::size_t j = 0; j < mae.weights[l].size(); ++j)
      CHECK(pin.weights[l][j] == doctest::Approx(0.5 * mae.weights[l][j])
                                     .epsilon(1e-12));
}

TEST_CASE("train fits a noise-free line to below 1e-2 MAE") {
  std::mt19937_64 gen(4);
  TrainSet train_set, val_set;
  train_set.dim = val_set.dim = 1;
  for (int i = 0; i < 1000; ++i) {
    const double x = uniform(gen, -1.0, 1.0);
    (i % 10 == 0 ? val_set : train_set).add_row({&x, 1}, 2.0 * x + 1.0);
  }
  MlpNetwork net = make_mlp({1, 8, 1}, HiddenActivation::tanh,
                            OutputActivation::identity(), 12);
  TrainConfig cfg;
  cfg.max_epochs = 150;
  cfg.initial_lr = 0.1;
  cfg.lr_decay_factor = 0.5;
  cfg.patience = 5;
  cfg.seed = 12;
  TrainTrace trace = train(net, train_set, val_set, cfg);
  CHECK(batch_loss(net, val_set, LossSpec::mae()) < 1e-2);
  CHECK(trace.best_epoch >= 0);

  // Realized learning rate never increases.
  for (std::size_t e = 1; e < trace.learning_rate.size(); ++e)
    CHECK(trace.learning_rate[e] <= trace.learning_rate[e - 1]);

  // best_epoch is the argmin of the validation loss.
  std::size_t argmin = 0;
  for (std::size_t e = 1; e < trace.val_loss.size(); ++e)
    if (trace.val_loss[e] < trace.val_loss[argmin])
      argmin = e;
  CHECK(static_cast<std::size_t>(trace.best_epoch) == argmin);
}

TEST_CASE("training is bitwise reproducible under a fixed seed") {
  auto run = [] {
    std::mt19937_64 gen(8);
    TrainSet train_set, val_set;
    train_set.dim = val_set.dim = 2;
    for (int i = 0; i < 300; ++i) {
      double x[2] = {normal01(gen), normal01(gen)};
      (i % 5 == 0 ? val_set : train_set)
          .add_row({x, 2}, x[0] - 0.5 * x[1] + 0.2);
    }
    MlpNetwork net = make_mlp({2, 8, 1}, HiddenActivation::tanh,
                              OutputActivation::identity(), 77);
    TrainConfig cfg;
    cfg.max_epochs = 30;
    cfg.initial_lr = 0.05;
    cfg.seed = 77;
    TrainTrace trace = train(net, train_set, val_set, cfg);
    return std::make_pair(net, trace);
  };
  auto [net1, trace1] = run();
  auto [net2, trace2] = run();
  CHECK(trace1.train_loss == trace2.train_loss);
  CHECK(trace1.val_loss == trace2.val_loss);
  CHECK(trace1.best_epoch == trace2.best_epoch);
  CHECK(net1.weights == net2.weights);
  CHECK(net1.biases == net2.biases);
}

TEST_CASE("pinball(0.95) head on pure noise learns the normal 95th percentile") {
  std::mt19937_64 gen(15);
  TrainSet train_set, val_set;
  train_set.dim = val_set.dim = 1;
  for (int i = 0; i < 4000; ++i) {
    const double x = normal01(gen);
    (i % 10 == 0 ? val_set : train_set).add_row({&x, 1}, normal01(gen));
  }
  MlpNetwork net = make_mlp({1, 1}, HiddenActivation::tanh,
                            OutputActivation::identity(), 3);
  TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.initial_lr = 0.05;
  cfg.patience = 10;
  cfg.seed = 3;
  cfg.loss = LossSpec::pinball(0.95);
  train(net, train_set, val_set, cfg);

  double mean_pred = 0;
  for (int i = 0; i < 200; ++i) {
    const double x = normal01(gen);
    mean_pred += forward(net, {&x, 1})[0];
  }
  mean_pred /= 200.0;
  CHECK(mean_pred == doctest::Approx(1.645).epsilon(0.07)); // ~ +-0.1 abs
}

TEST_CASE("quantile heads order and cover their quantiles") {
  std::mt19937_64 gen(25);
  TrainSet train_set, val_set;
  train_set.dim = val_set.dim = 1;
  std::vector<double> xs, ys;
  for (int i = 0; i < 3000; ++i) {
    const double x = uniform(gen, -1, 1);
    const double y = 2.0 * x + 0.5 * normal01(gen);
    if (i % 10 == 0)
      val_set.add_row({&x, 1}, y);
    else {
      train_set.add_row({&x, 1}, y);
      xs.push_back(x);
      ys.push_back(y);
    }
  }
  MlpNetwork base = make_mlp({1, 8, 1}, HiddenActivation::tanh,
                             OutputActivation::identity(), 31);
  TrainConfig cfg;
  cfg.max_epochs = 80;
  cfg.initial_lr = 0.05;
  cfg.seed = 31;
  train(base, train_set, val_set, cfg);

  auto [lo, hi] = quantile_heads(base, train_set, val_set, cfg, 0.05, 0.95);

  double mean_lo = 0, mean_base = 0, mean_hi = 0;
  std::size_t below_hi = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double l = forward(lo, {&xs[i], 1})[0];
    const double b = forward(base, {&xs[i], 1})[0];
    const double h = forward(hi, {&xs[i], 1})[0];
    mean_lo += l;
    mean_base += b;
    mean_hi += h;
    if (ys[i] <= h)
      ++below_hi;
  }
  const double n = static_cast<double>(xs.size());
  CHECK(mean_lo / n <= mean_base / n);
  CHECK(mean_base / n <= mean_hi / n);
  // Empirical fraction below the 0.95 head on its own training data.
  CHECK(static_cast<double>(below_hi) / n == doctest::Approx(0.95).epsilon(0.032));
}

TEST_CASE("degenerate quantile heads reduce to the base median fit") {
  std::mt19937_64 gen(41);
  TrainSet train_set, val_set;
  train_set.dim = val_set.dim = 1;
  for (int i = 0; i < 1500; ++i) {
    const double x = uniform(gen, -1, 1);
    (i % 10 == 0 ? val_set : train_set).add_row({&x, 1}, 3.0 * x - 1.0);
  }
  MlpNetwork base = make_mlp({1, 8, 1}, HiddenActivation::tanh,
                             OutputActivation::identity(), 51);
  TrainConfig cfg;
  cfg.max_epochs = 60;
  cfg.initial_lr = 0.05;
  cfg.seed = 51;
  train(base, train_set, val_set, cfg);

  auto [lo, hi] = quantile_heads(base, train_set, val_set, cfg, 0.5, 0.5);
  double max_gap = 0;
  for (double x = -1.0; x <= 1.0; x += 0.05) {
    const double b = forward(base, {&x, 1})[0];
    max_gap = std::max(max_gap, std::fabs(forward(lo, {&x, 1})[0] - b));
    max_gap = std::max(max_gap, std::fabs(forward(hi, {&x, 1})[0] - b));
  }
  CHECK(max_gap < 0.15); // both heads track the base fit on noise-free data
}

TEST_CASE("train aborts on divergence with a diagnostic") {
  std::mt19937_64 gen(66);
  TrainSet train_set, val_set;
  train_set.dim = val_set.dim = 1;
  for (int i = 0; i < 100; ++i) {
    const double x = uniform(gen, -1, 1);
    (i % 5 == 0 ? val_set : train_set).add_row({&x, 1}, 1e300 * (x + 2.0));
  }
  MlpNetwork net = make_mlp({1, 4, 1}, HiddenActivation::relu,
                            OutputActivation::identity(), 1);
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.initial_lr = 1e10;
  cfg.seed = 1;
  CHECK_THROWS_AS(train(net, train_set, val_set, cfg), NumericError);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(LossSpec::pinball(0.0), ConfigError);
  CHECK_THROWS_AS(LossSpec::pinball(1.0), ConfigError);
  CHECK_THROWS_AS(OutputActivation::scaled_sigmoid(0.0), ConfigError);
  CHECK_THROWS_AS(make_mlp({3}, HiddenActivation::tanh,
                           OutputActivation::identity(), 0),
                  ConfigError);

  TrainSet s;
  s.dim = 1;
  const double x = 0;
  s.add_row({&x, 1}, 1.0);
  MlpNetwork net = make_mlp({1, 1}, HiddenActivation::tanh,
                            OutputActivation::identity(), 0);
  TrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(net, s, s, bad), ConfigError);
  TrainConfig bad2;
  bad2.lr_decay_factor = 1.0;
  CHECK_THROWS_AS(train(net, s, s, bad2), ConfigError);
}

TEST_CASE("grid search returns a member of the grid deterministically") {
  std::mt19937_64 gen(91);
  TrainSet train_set, val_set;
  train_set.dim = val_set.dim = 2;
  for (int i = 0; i < 400; ++i) {
    double x[2] = {uniform(gen, -1, 1), uniform(gen, -1, 1)};
    (i % 5 == 0 ? val_set : train_set).add_row({x, 2}, x[0] * x[1]);
  }
  TrainConfig cfg;
  cfg.max_epochs = 10;
  cfg.seed = 7;
  GridChoice c1 = select_hyperparameters(train_set, val_set,
                                         HiddenActivation::tanh,
                                         OutputActivation::identity(), cfg);
  GridChoice c2 = select_hyperparameters(train_set, val_set,
                                         HiddenActivation::tanh,
                                         OutputActivation::identity(), cfg);
  CHECK((c1.hidden_layers.size() == 1 || c1.hidden_layers.size() == 2));
  CHECK((c1.hidden_layers[0] == 16 || c1.hidden_layers[0] == 32 ||
         c1.hidden_layers[0] == 64));
  CHECK((c1.learning_rate == 1e-2 || c1.learning_rate == 1e-3));
  CHECK(c1.hidden_layers == c2.hidden_layers);
  CHECK(c1.learning_rate == c2.learning_rate);
}
