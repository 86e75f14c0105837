// Trains a small swish network on a noisy sine curve and prints the
// validation loss every few hundred epochs.
#include <cmath>
#include <cstdio>

#include "treg/treg.hpp"

namespace {

treg::Matrix sine_row(std::size_t count, double lo, double hi, treg::SeededRng& rng,
                      treg::Matrix* targets) {
  treg::Matrix x(1, count);
  *targets = treg::Matrix(1, count);
  for (std::size_t i = 0; i < count; ++i) {
    x(0, i) = lo + (hi - lo) * rng.uniform01();
    (*targets)(0, i) = std::sin(x(0, i)) + rng.normal(0.0, 0.05);
  }
  return x;
}

}  // namespace

int main() {
  treg::SeededRng rng(2024);
  treg::Matrix train_y, val_y;
  const treg::Matrix train_x = sine_row(160, -3.0, 3.0, rng, &train_y);
  const treg::Matrix val_x = sine_row(40, -3.0, 3.0, rng, &val_y);

  treg::nn::NetworkConfig config;
  config.layers = {{8, treg::act::Swish{}}, {8, treg::act::Swish{}}, {1, treg::act::Identity{}}};
  config.optimizer = treg::opt::Adam{0.01};
  config.max_epochs = 200;
  config.tolerance = 1e-10;
  config.seed = 11;

  treg::nn::NetworkState state = treg::nn::init_network(config, 1);
  std::size_t epochs = 0;
  try {
    for (int round = 0; round < 10; ++round) {
      auto result = treg::nn::train(std::move(state), train_x, train_y, val_x, val_y, config);
      state = std::move(result.state);
      epochs += result.report.epochs_run;
      std::printf("epoch %5zu  validation mse %.6f\n", epochs,
                  result.report.epoch_losses.back());
      if (result.report.stop_reason == treg::nn::StopReason::ToleranceReached) break;
    }
  } catch (const treg::Error& e) {
    std::fprintf(stderr, "ann_demo: %s\n", e.what());
    return 1;
  }

  for (double x : {-2.5, -1.0, 0.0, 1.0, 2.5}) {
    const double y = treg::nn::predict(state, treg::Matrix{{x}})(0, 0);
    std::printf("f(%5.2f) = %8.5f   sin = %8.5f\n", x, y, std::sin(x));
  }
  return 0;
}
