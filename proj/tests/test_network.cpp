#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "treg/gradcheck.hpp"
#include "treg/network.hpp"
#include "treg/ols.hpp"

using treg::Matrix;
namespace nn = treg::nn;
namespace act = treg::act;
namespace lk = treg::loss_kind;

namespace {

nn::NetworkConfig config_of(std::vector<nn::LayerSpec> layers, std::uint64_t seed = 1) {
  nn::NetworkConfig c;
  c.layers = std::move(layers);
  c.seed = seed;
  return c;
}

// Single identity layer with the given weights and bias.
nn::NetworkState affine_state(const Matrix& w, const Matrix& b) {
  nn::NetworkState s = nn::init_network(config_of({{w.rows(), act::Identity{}}}), w.cols());
  s.layers[0].weights = w;
  s.layers[0].biases = b;
  return s;
}

void zero_parameters(nn::NetworkState& s) {
  for (auto& l : s.layers) {
    l.weights = Matrix(l.weights.rows(), l.weights.cols());
    l.biases = Matrix(l.biases.rows(), 1);
  }
}

oracle::PlainNetwork plain_copy(const nn::NetworkState& s) {
  oracle::PlainNetwork p;
  for (const auto& l : s.layers) {
    p.weights.push_back(oracle::to_grid(l.weights));
    p.biases.push_back(l.biases.values());
    const std::string name = treg::activation_name(l.activation);
    p.activations.push_back(name == "sigmoid" ? oracle::Act::Sigmoid
                            : name == "swish" ? oracle::Act::Swish
                                              : oracle::Act::Identity);
  }
  return p;
}

}  // namespace

TEST(InitNetwork, ShapesZeroBiasesAndDeterminism) {
  const auto c = config_of({{4, act::Swish{}}, {3, act::Relu{}}, {2, act::Identity{}}}, 7);
  const nn::NetworkState a = nn::init_network(c, 5), b = nn::init_network(c, 5);
  const std::size_t q[] = {5, 4, 3, 2};
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(a.layers[l].weights.rows(), q[l + 1]);
    EXPECT_EQ(a.layers[l].weights.cols(), q[l]);
    EXPECT_EQ(a.layers[l].biases, Matrix(q[l + 1], 1));
    EXPECT_EQ(a.layers[l].weights, b.layers[l].weights);
    EXPECT_EQ(a.layers[l].weight_state.timestep, 0u);
  }
  EXPECT_EQ(a.epoch, 1u);
  EXPECT_NE(nn::init_network(config_of(c.layers, 8), 5).layers[0].weights, a.layers[0].weights);
}

TEST(InitNetwork, LayerSeedsAreBasePlusIndex) {
  const auto c = config_of({{3, act::Swish{}}, {2, act::Identity{}}}, 100);
  const nn::NetworkState s = nn::init_network(c, 4);
  treg::SeededRng r0(100), r1(101);
  EXPECT_EQ(s.layers[0].weights, treg::init_weights(c.initializer, 4, 3, r0));
  EXPECT_EQ(s.layers[1].weights, treg::init_weights(c.initializer, 3, 2, r1));
}

TEST(Validate, RejectsBadConfigs) {
  auto c = config_of({{3, act::Swish{}}, {2, act::Identity{}}});
  EXPECT_NO_THROW(nn::validate(c, 2));
  EXPECT_THROW(nn::validate(c, 1), treg::ConfigError);
  auto d = c;
  d.tolerance = 0.0;
  EXPECT_THROW(nn::validate(d, 2), treg::ConfigError);
  d = c;
  d.max_epochs = 0;
  EXPECT_THROW(nn::validate(d, 2), treg::ConfigError);
  d = c;
  d.layers[0].units = 0;
  EXPECT_THROW(nn::validate(d, 2), treg::ConfigError);
  d = c;
  d.layers.clear();
  EXPECT_THROW(nn::validate(d, 2), treg::ConfigError);
}

TEST(Forward, ZeroReluNetworkOutputsZero) {
  nn::NetworkState s =
      nn::init_network(config_of({{4, act::Relu{}}, {2, act::Relu{}}}), 3);
  zero_parameters(s);
  oracle::Gen gen(1);
  const nn::ForwardCache c = nn::forward(s, gen.matrix(3, 7));
  for (const Matrix& z : c.activations) EXPECT_EQ(z, Matrix(z.rows(), 7));
  EXPECT_EQ(nn::predict(s, gen.matrix(3, 2)), Matrix(2, 2));
}

TEST(Forward, SingleAffineLayer) {
  const nn::NetworkState s = affine_state(Matrix{{2, 0}}, Matrix{{1}});
  const Matrix out = nn::forward(s, Matrix{{-1, 0, 2.5}, {0, 0, 0}}).output();
  EXPECT_EQ(out, (Matrix{{-1, 1, 6}}));
  EXPECT_EQ(nn::predict(s, Matrix{{3}, {9}}), (Matrix{{7}}));
}

TEST(Forward, CacheStructure) {
  oracle::Gen gen(2);
  const nn::NetworkState s = nn::init_network(
      config_of({{4, act::Sigmoid{}}, {3, act::Softmax{}}, {2, act::Identity{}}}), 3);
  const Matrix z0 = gen.matrix(3, 9);
  const nn::ForwardCache c = nn::forward(s, z0);
  ASSERT_EQ(c.preactivations.size(), 3u);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(c.activations[l].cols(), 9u);
    EXPECT_EQ(c.activations[l], treg::apply_matrix(s.layers[l].activation, c.preactivations[l]));
  }
  EXPECT_EQ(c.layer_output(0), z0);
  EXPECT_EQ(nn::predict(s, z0), c.output());
  EXPECT_THROW(nn::forward(s, gen.matrix(2, 9)), treg::ShapeError);
}

TEST(Forward, NonFiniteValuesNameTheLayer) {
  nn::NetworkState s = nn::init_network(config_of({{2, act::Identity{}}, {1, act::Identity{}}}), 1);
  s.layers[1].weights = Matrix{{1e308, 1e308}};
  s.layers[0].weights = Matrix{{1e10}, {1e10}};
  try {
    nn::forward(s, Matrix{{1e10}});
    FAIL();
  } catch (const treg::DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 2"), std::string::npos) << e.what();
  }
}

TEST(Losses, BatchValidationAndTrainingLoss) {
  const nn::NetworkState s = affine_state(Matrix{{1}}, Matrix{{0}});
  const nn::ForwardCache c = nn::forward(s, Matrix{{1, 2, 3, 4}});
  // Training columns 1,2 and validation columns 3,4.
  EXPECT_EQ(nn::batch_validation_loss(c, Matrix{{3, 4}}, lk::Mse{}), 0.0);
  EXPECT_EQ(nn::batch_validation_loss(c, Matrix{{5}}, lk::Mse{}), 1.0);
  EXPECT_EQ(nn::batch_validation_loss(c, Matrix{{2, 6}}, lk::Mse{}), (1.0 + 4.0) / 2.0);
  EXPECT_EQ(nn::batch_training_loss(c, Matrix{{0, 0}}, lk::Mse{}), (1.0 + 4.0) / 2.0);
}

TEST(Deltas, OutputDeltaForMseIdentity) {
  oracle::Gen gen(3);
  const nn::NetworkState s = nn::init_network(config_of({{3, act::Identity{}}}), 2);
  const nn::ForwardCache c = nn::forward(s, gen.matrix(2, 6));
  const Matrix y = gen.matrix(3, 4);
  const Matrix d = nn::output_delta(c, y, lk::Mse{}, act::Identity{});
  ASSERT_EQ(d.rows(), 3u);
  ASSERT_EQ(d.cols(), 4u);
  EXPECT_LE(treg::max_abs_diff(d, (2.0 / 3.0) * (treg::column_block(c.output(), 0, 4) - y)),
            1e-15);
  EXPECT_EQ(nn::output_delta(c, treg::column_block(c.output(), 0, 4), lk::Mse{}, act::Identity{}),
            Matrix(3, 4));
}

TEST(Deltas, HiddenDeltaCases) {
  oracle::Gen gen(4);
  const Matrix dn = gen.matrix(2, 5), w = gen.matrix(2, 3), s = gen.matrix(3, 5);
  EXPECT_EQ(nn::hidden_delta(dn, Matrix(2, 3), s, act::Sigmoid{}), Matrix(3, 5));
  EXPECT_EQ(nn::hidden_delta(dn, w, s, act::Identity{}),
            treg::matmul(treg::transpose(w), dn));
  EXPECT_THROW(nn::hidden_delta(dn, gen.matrix(3, 3), s, act::Identity{}), treg::ShapeError);
}

TEST(Gradients, LayerGradientCases) {
  oracle::Gen gen(5);
  const auto zero = nn::layer_gradients(Matrix(3, 4), gen.matrix(2, 4));
  EXPECT_EQ(zero.grad_w, Matrix(3, 2));
  EXPECT_EQ(zero.grad_b, Matrix(3, 1));
  const Matrix d = gen.matrix(3, 1), z = gen.matrix(2, 1);
  const auto one = nn::layer_gradients(d, z);
  EXPECT_EQ(one.grad_w, treg::outer(d, z));
  EXPECT_EQ(one.grad_b, d);
  // Average of per-sample outer products.
  const Matrix D = gen.matrix(3, 5), Z = gen.matrix(2, 5);
  Matrix avg(3, 2);
  for (std::size_t i = 0; i < 5; ++i)
    avg += treg::outer(treg::column_block(D, i, 1), treg::column_block(Z, i, 1));
  EXPECT_LE(treg::max_abs_diff(nn::layer_gradients(D, Z).grad_w, 0.2 * avg), 1e-15);
}

TEST(Gradients, SoftmaxLayerMatchesFiniteDifferences) {
  oracle::Gen gen(6);
  auto c = config_of({{4, act::Softmax{}}, {2, act::Swish{}}}, 3);
  c.initializer = treg::init::RandomUniform{1.0};
  nn::NetworkState s = nn::init_network(c, 3);
  const Matrix x = gen.matrix(3, 5), y = gen.matrix(2, 5);
  const auto grads = nn::backward(s, nn::forward(s, x), y, lk::Mse{});
  for (std::size_t l = 0; l < 2; ++l) {
    for (std::size_t i = 0; i < s.layers[l].weights.size(); ++i) {
      double& w = s.layers[l].weights.values()[i];
      const double saved = w;
      const auto f = [&](double v) {
        w = v;
        return nn::batch_training_loss(nn::forward(s, x), y, lk::Mse{});
      };
      const double numeric = oracle::central_difference(f, saved, 1e-5);
      w = saved;
      EXPECT_LE(oracle::relative_error(grads[l].grad_w.values()[i], numeric, 1e-7), 1e-4);
    }
  }
}

TEST(Gradients, NonSmoothActivationsAwayFromKinks) {
  oracle::Gen gen(7);
  for (const treg::Activation& a :
       {treg::Activation{act::Relu{}}, treg::Activation{act::LeakyRelu{0.1}},
        treg::Activation{act::Elu{0.7}}, treg::Activation{act::ParametricRelu{0.3}}}) {
    auto c = config_of({{3, a}, {1, act::Identity{}}}, 11);
    c.initializer = treg::init::RandomUniform{1.0};
    nn::NetworkState s = nn::init_network(c, 2);
    const Matrix x = gen.matrix(2, 6), y = gen.matrix(1, 6);
    const auto grads = nn::backward(s, nn::forward(s, x), y, lk::Huber{0.5});
    for (std::size_t i = 0; i < s.layers[0].weights.size(); ++i) {
      double& w = s.layers[0].weights.values()[i];
      const double saved = w;
      const auto f = [&](double v) {
        w = v;
        return nn::batch_training_loss(nn::forward(s, x), y, lk::Huber{0.5});
      };
      const double numeric = oracle::central_difference(f, saved, 1e-6);
      w = saved;
      EXPECT_LE(oracle::relative_error(grads[0].grad_w.values()[i], numeric, 1e-7), 1e-4)
          << treg::activation_name(a);
    }
  }
}

TEST(Train, SingleEpochBound) {
  oracle::Gen gen(8);
  auto c = config_of({{2, act::Swish{}}, {1, act::Identity{}}});
  c.max_epochs = 1;
  const auto r = nn::train(nn::init_network(c, 1), gen.matrix(1, 10), gen.matrix(1, 10),
                           gen.matrix(1, 3), gen.matrix(1, 3), c);
  EXPECT_EQ(r.report.epochs_run, 1u);
  EXPECT_EQ(r.report.epoch_losses.size(), 1u);
  EXPECT_EQ(r.report.stop_reason, nn::StopReason::MaxEpochs);
  EXPECT_EQ(r.state.epoch, 2u);
}

TEST(Train, HugeToleranceStopsAtSecondEpoch) {
  oracle::Gen gen(9);
  auto c = config_of({{2, act::Swish{}}, {1, act::Identity{}}});
  c.tolerance = 1e9;
  const auto r = nn::train(nn::init_network(c, 1), gen.matrix(1, 10), gen.matrix(1, 10),
                           gen.matrix(1, 3), gen.matrix(1, 3), c);
  EXPECT_EQ(r.report.epochs_run, 2u);
  EXPECT_EQ(r.report.stop_reason, nn::StopReason::ToleranceReached);
  EXPECT_LT(r.report.final_gap, c.tolerance);
}

TEST(Train, FirstEpochUpdatesAndOnlyTrainingColumnsDriveGradients) {
  oracle::Gen gen(10);
  auto c = config_of({{3, act::Sigmoid{}}, {1, act::Identity{}}});
  c.optimizer = treg::opt::Gd{0.05};
  c.max_epochs = 1;
  const Matrix xt = gen.matrix(1, 8), yt = gen.matrix(1, 8), xv = gen.matrix(1, 2),
               yv = gen.matrix(1, 2);
  const nn::NetworkState start = nn::init_network(c, 1);
  const auto r = nn::train(start, xt, yt, xv, yv, c);
  // One GD step computed by hand from the same pieces.
  nn::NetworkState manual = start;
  const auto g = nn::backward(start, nn::forward(start, xt), yt, c.loss);
  for (std::size_t l = 0; l < 2; ++l) {
    manual.layers[l].weights -= 0.05 * g[l].grad_w;
    manual.layers[l].biases -= 0.05 * g[l].grad_b;
  }
  for (std::size_t l = 0; l < 2; ++l) {
    EXPECT_LE(treg::max_abs_diff(r.state.layers[l].weights, manual.layers[l].weights), 1e-15);
    EXPECT_LE(treg::max_abs_diff(r.state.layers[l].biases, manual.layers[l].biases), 1e-15);
  }
}

TEST(Train, RejectsEmptyPartitionsAndMismatches) {
  oracle::Gen gen(11);
  auto c = config_of({{1, act::Identity{}}});
  const nn::NetworkState s = nn::init_network(c, 1);
  EXPECT_THROW(nn::train(s, gen.matrix(1, 4), gen.matrix(1, 4), Matrix(1, 0), Matrix(1, 0), c),
               treg::DataError);
  EXPECT_THROW(nn::train(s, gen.matrix(1, 4), gen.matrix(1, 3), gen.matrix(1, 2),
                         gen.matrix(1, 2), c),
               treg::ShapeError);
  c.tolerance = 0.0;
  EXPECT_THROW(nn::train(s, gen.matrix(1, 4), gen.matrix(1, 4), gen.matrix(1, 2),
                         gen.matrix(1, 2), c),
               treg::ConfigError);
}

TEST(Train, DivergenceReportsEpoch) {
  oracle::Gen gen(12);
  auto c = config_of({{1, act::Identity{}}});
  c.optimizer = treg::opt::Gd{1e3};
  c.max_epochs = 1000;
  c.tolerance = 1e-300;
  const Matrix x = 10.0 * gen.matrix(1, 6);
  try {
    nn::train(nn::init_network(c, 1), x, gen.matrix(1, 6), gen.matrix(1, 2), gen.matrix(1, 2), c);
    FAIL();
  } catch (const treg::DivergenceError& e) {
    EXPECT_GT(e.index(), 1u);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Gradcheck, LibraryRunnerPasses) {
  const nn::GradcheckResult r = nn::run_gradcheck(3);
  EXPECT_EQ(r.configurations, 50u);
  EXPECT_GT(r.entries_checked, 0u);
  EXPECT_LE(r.max_relative_error, 1e-4);
}

// Properties.

TEST(NetworkProperty, GradientsMatchIndependentFiniteDifferences) {
  treg::SeededRng rng(20);
  for (int t = 0; t < 100; ++t) {
    nn::GradcheckProblem p = nn::random_gradcheck_problem(rng);
    const auto grads = nn::backward(p.state, nn::forward(p.state, p.features), p.targets, p.loss);
    const auto numeric = oracle::numeric_gradients(
        plain_copy(p.state), oracle::to_grid(p.features), oracle::to_grid(p.targets),
        treg::loss_name(p.loss) == "mse" ? oracle::Cost::Mse : oracle::Cost::LogCosh, 1e-5);
    for (std::size_t l = 0; l < grads.size(); ++l) {
      std::vector<double> analytic = grads[l].grad_w.values();
      analytic.insert(analytic.end(), grads[l].grad_b.values().begin(),
                      grads[l].grad_b.values().end());
      ASSERT_EQ(analytic.size(), numeric[l].size());
      for (std::size_t i = 0; i < analytic.size(); ++i)
        EXPECT_LE(oracle::relative_error(analytic[i], numeric[l][i], 1e-7), 1e-4);
    }
  }
}

TEST(NetworkProperty, ValidationTargetsNeverReachGradients) {
  oracle::Gen gen(21);
  for (int t = 0; t < 20; ++t) {
    auto c = config_of({{gen.index(1, 5), act::Swish{}}, {2, act::Identity{}}}, t);
    const Matrix xt = gen.matrix(3, 7), yt = gen.matrix(2, 7), xv = gen.matrix(3, 4),
                 yv = gen.matrix(2, 4);
    const Matrix yv2 = yv + gen.matrix(2, 4, 1.0, 2.0);
    c.max_epochs = 15;
    c.tolerance = 1e-300;
    const auto a = nn::train(nn::init_network(c, 3), xt, yt, xv, yv, c);
    const auto b = nn::train(nn::init_network(c, 3), xt, yt, xv, yv2, c);
    EXPECT_NE(a.report.epoch_losses, b.report.epoch_losses);
    for (std::size_t l = 0; l < 2; ++l) {
      EXPECT_EQ(a.state.layers[l].weights, b.state.layers[l].weights);
      EXPECT_EQ(a.state.layers[l].biases, b.state.layers[l].biases);
    }
  }
}

TEST(NetworkProperty, ShapesConservedAndStoppingSound) {
  oracle::Gen gen(22);
  const treg::Optimizer opts[] = {treg::opt::Gd{}, treg::opt::Momentum{}, treg::opt::Nesterov{},
                                  treg::opt::AdaGrad{}, treg::opt::RmsProp{}, treg::opt::Adam{},
                                  treg::opt::Nadam{}};
  for (int t = 0; t < 35; ++t) {
    auto c = config_of({{gen.index(1, 4), act::Sigmoid{}}, {gen.index(1, 4), act::Elu{}},
                        {1, act::Identity{}}},
                       t);
    c.optimizer = opts[t % 7];
    c.max_epochs = gen.index(1, 60);
    c.tolerance = std::pow(10.0, -gen.uniform(1, 8));
    const nn::NetworkState start = nn::init_network(c, 2);
    const auto r = nn::train(start, gen.matrix(2, 12), gen.matrix(1, 12), gen.matrix(2, 4),
                             gen.matrix(1, 4), c);
    for (std::size_t l = 0; l < 3; ++l) {
      EXPECT_TRUE(r.state.layers[l].weights.same_shape(start.layers[l].weights));
      EXPECT_TRUE(r.state.layers[l].biases.same_shape(start.layers[l].biases));
    }
    EXPECT_EQ(r.report.epoch_losses.size(), r.report.epochs_run);
    if (r.report.stop_reason == nn::StopReason::ToleranceReached) {
      EXPECT_LT(r.report.final_gap, c.tolerance);
    } else {
      EXPECT_EQ(r.report.epochs_run, c.max_epochs);
    }
  }
}

TEST(NetworkProperty, OneLayerNetworkFollowsOlsGradient) {
  oracle::Gen gen(23);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = gen.index(1, 4), m = gen.index(1, 3), p = gen.index(2, 12);
    const Matrix w = gen.matrix(m, n), b = gen.matrix(m, 1);
    const nn::NetworkState s = affine_state(w, b);
    const Matrix features = gen.matrix(n, p), targets = gen.matrix(m, p);
    const auto g = nn::backward(s, nn::forward(s, features), targets, lk::Mse{});

    // The same map as OLS coefficients B = [W | b] on rows-per-sample data.
    std::vector<std::vector<double>> f, y;
    for (std::size_t k = 0; k < p; ++k) {
      f.push_back(features.col(k));
      y.push_back(targets.col(k));
    }
    const treg::ols::Problem prob = treg::ols::build_problem(f, y);
    Matrix bmat(m, n + 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) bmat(i, j) = w(i, j);
      bmat(i, n) = b(i, 0);
    }
    const Matrix ols_grad =
        treg::ols::loss_gradient(bmat, treg::ols::gram(prob), treg::ols::moment(prob));
    const double scale = 1.0 / (double(p) * double(m));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        EXPECT_NEAR(g[0].grad_w(i, j), scale * ols_grad(i, j), 1e-10);
      EXPECT_NEAR(g[0].grad_b(i, 0), scale * ols_grad(i, n), 1e-10);
    }
  }
}
