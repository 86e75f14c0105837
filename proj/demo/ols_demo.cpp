// Fits house prices from rooms, age and distance, once in closed form and
// once by gradient descent, and prints both coefficient sets.
#include <cstdio>
#include <string>

#include "treg/treg.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "demo/data/housing.csv";
  try {
    const treg::io::Dataset d =
        treg::io::load_csv(path, {{"rooms", "age", "distance"}, {"price"}});
    const auto x = treg::io::normalize(d.features);
    const auto y = treg::io::normalize(d.targets);

    std::vector<std::vector<double>> features, targets;
    for (std::size_t r = 0; r < d.samples(); ++r) {
      features.push_back(x.data.row(r));
      targets.push_back(y.data.row(r));
    }
    const treg::ols::Problem problem = treg::ols::build_problem(features, targets);

    const treg::ols::Model exact = treg::ols::solve_analytic(problem);
    const treg::ols::GdResult gd = treg::ols::solve_gd(problem, {});

    std::printf("%zu samples from %s\n", d.samples(), path.c_str());
    std::printf("%-10s %14s %14s\n", "term", "analytic", "gd");
    const char* names[] = {"rooms", "age", "distance", "bias"};
    for (std::size_t j = 0; j < 4; ++j)
      std::printf("%-10s %14.9f %14.9f\n", names[j], exact.b(0, j), gd.model.b(0, j));
    std::printf("gd: %zu iterations, last step %.3g\n", gd.trace.iterations,
                gd.trace.final_step_norm);
    std::printf("residual sum of squares (normalized): %.6f\n",
                treg::ols::sum_squared_residuals(problem, exact.b));
  } catch (const treg::Error& e) {
    std::fprintf(stderr, "ols_demo: %s\n", e.what());
    return 1;
  }
  return 0;
}
