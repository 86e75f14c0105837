#pragma once

// Command-line front end.
//
//   treg ols-fit   --data F --features a,b --targets y --method analytic|gd
//                  [--epsilon E] [--max-iters N] [--fallback-gd] --out M
//   treg ann-train --data F --features ... --targets ... --layers "4:swish,1:identity"
//                  [--loss mse] [--optimizer adam] [--init xavier] [--epochs A]
//                  [--epsilon E] [--val-fraction V] [--seed S] --out M
//   treg predict   --model M --data F [--out CSV]
//   treg gradcheck [--seed S]
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "treg/csv.hpp"
#include "treg/dataset.hpp"
#include "treg/errors.hpp"
#include "treg/gradcheck.hpp"
#include "treg/model_io.hpp"
#include "treg/network.hpp"
#include "treg/ols.hpp"

namespace treg::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

inline constexpr double kGradcheckThreshold = 1e-4;

// Splits "a,b,c" into names, dropping surrounding blanks.
inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty name in list '" + s + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

// "units:activation[:beta]" entries separated by commas.
inline std::vector<nn::LayerSpec> parse_layers(const std::string& text) {
  std::vector<nn::LayerSpec> layers;
  for (const std::string& entry : split_list(text)) {
    std::vector<std::string> parts;
    std::stringstream ss(entry);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 3) {
      throw ConfigError("layer '" + entry + "' must look like units:activation[:beta]");
    }
    std::size_t units = 0;
    std::optional<double> beta;
    try {
      std::size_t used = 0;
      const long long u = std::stoll(parts[0], &used);
      if (used != parts[0].size() || u < 1) throw std::invalid_argument("units");
      units = static_cast<std::size_t>(u);
      if (parts.size() == 3) beta = io::parse_number(parts[2]);
    } catch (const std::exception&) {
      throw ConfigError("layer '" + entry + "' has an invalid unit count or parameter");
    }
    layers.push_back({units, parse_activation(parts[1], beta)});
  }
  return layers;
}

namespace detail {

struct DataArgs {
  std::string data;
  std::string features;
  std::string targets;
  std::string out;
};

inline void add_data_options(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--data", args.data, "CSV file with a header row")->required();
  cmd->add_option("--features", args.features, "comma-separated feature columns")->required();
  cmd->add_option("--targets", args.targets, "comma-separated target columns")->required();
  cmd->add_option("--out", args.out, "model file to write")->required();
}

struct OlsArgs {
  DataArgs data;
  std::string method = "analytic";
  double epsilon = 1e-10;
  std::size_t max_iters = 10000;
  bool fallback_gd = false;
};

inline int run_ols_fit(const OlsArgs& args, std::ostream& out) {
  const io::ColumnSchema schema{split_list(args.data.features), split_list(args.data.targets)};
  const io::Dataset data = io::load_csv(args.data.data, schema);
  const io::Normalized x = io::normalize(data.features, std::nullopt, schema.feature_columns);
  const io::Normalized y = io::normalize(data.targets, std::nullopt, schema.target_columns);

  std::vector<std::vector<double>> features, targets;
  for (std::size_t r = 0; r < data.samples(); ++r) {
    features.push_back(x.data.row(r));
    targets.push_back(y.data.row(r));
  }
  const ols::Problem problem = ols::build_problem(features, targets);

  ols::GdConfig gd;
  gd.epsilon = args.epsilon;
  gd.max_iterations = args.max_iters;
  auto fit_gd = [&] {
    const ols::GdResult r = ols::solve_gd(problem, gd);
    out << "ols-fit: gradient descent ran " << r.trace.iterations << " iterations, "
        << (r.trace.converged ? "converged" : "did not converge")
        << " (final step norm " << r.trace.final_step_norm << ")\n";
    return r.model;
  };

  ols::Model model;
  if (args.method == "gd") {
    model = fit_gd();
  } else {
    try {
      model = ols::solve_analytic(problem);
      out << "ols-fit: analytic solution\n";
    } catch (const SingularityError& e) {
      if (!args.fallback_gd) throw;
      out << "ols-fit: " << e.what() << "\nols-fit: falling back to gradient descent\n";
      model = fit_gd();
    }
  }

  io::ModelFile file{model, schema.feature_columns, schema.target_columns,
                     x.stats, y.stats, std::nullopt};
  io::save_model(file, args.data.out);
  out << "ols-fit: wrote " << args.data.out << "\n";
  return kOk;
}

struct AnnArgs {
  DataArgs data;
  std::string layers;
  std::string loss = "mse";
  double huber_delta = 1.0;
  std::string optimizer = "adam";
  std::optional<double> learning_rate;
  std::string init = "xavier";
  std::optional<double> init_scale;
  std::size_t epochs = 1000;
  double epsilon = 1e-9;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
};

inline int run_ann_train(const AnnArgs& args, std::ostream& out) {
  nn::NetworkConfig config;
  config.layers = parse_layers(args.layers);
  config.loss = parse_loss(args.loss, args.huber_delta);
  config.optimizer = parse_optimizer(args.optimizer, args.learning_rate);
  config.initializer = parse_initializer(args.init, args.init_scale);
  config.max_epochs = args.epochs;
  config.tolerance = args.epsilon;
  config.seed = args.seed;

  const io::ColumnSchema schema{split_list(args.data.features), split_list(args.data.targets)};
  nn::validate(config, schema.target_columns.size());

  const io::Dataset data = io::load_csv(args.data.data, schema);
  const io::SplitIndices parts = io::split(data.samples(), args.val_fraction, args.seed);
  const Matrix x_train_raw = io::select_rows(data.features, parts.train);
  const Matrix y_train_raw = io::select_rows(data.targets, parts.train);
  const io::Normalized x_train = io::normalize(x_train_raw, std::nullopt, schema.feature_columns);
  const io::Normalized y_train = io::normalize(y_train_raw, std::nullopt, schema.target_columns);
  const Matrix x_val =
      io::apply_normalization(io::select_rows(data.features, parts.validation), x_train.stats);
  const Matrix y_val =
      io::apply_normalization(io::select_rows(data.targets, parts.validation), y_train.stats);

  nn::NetworkState state = nn::init_network(config, schema.feature_columns.size());
  nn::TrainResult result =
      nn::train(std::move(state), transpose(x_train.data), transpose(y_train.data),
                transpose(x_val), transpose(y_val), config);

  out << "ann-train: " << parts.train.size() << " training / " << parts.validation.size()
      << " validation samples, " << result.report.epochs_run << " epochs, stopped by "
      << nn::to_string(result.report.stop_reason) << ", final validation loss "
      << result.report.epoch_losses.back() << " (normalized units)\n";

  io::ModelFile file{io::AnnModel{std::move(result.state), config.loss, config.optimizer,
                                  config.initializer},
                     schema.feature_columns,
                     schema.target_columns,
                     x_train.stats,
                     y_train.stats,
                     args.seed};
  io::save_model(file, args.data.out);
  out << "ann-train: wrote " << args.data.out << "\n";
  return kOk;
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
};

inline int run_predict(const PredictArgs& args, std::ostream& out) {
  const io::ModelFile file = io::load_model(args.model);
  const io::CsvTable table = io::parse_csv(io::read_file(args.data));
  if (table.records.empty()) throw DataError("csv: no data rows");
  const Matrix features = io::select_columns(table, file.feature_columns);
  const Matrix predictions = io::predict(file, features);
  if (args.out.empty()) {
    io::write_csv(out, file.target_columns, predictions);
  } else {
    std::ofstream f(args.out, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write '" + args.out + "'");
    io::write_csv(f, file.target_columns, predictions);
  }
  return kOk;
}

inline int run_gradcheck(std::uint64_t seed, std::size_t configurations, std::ostream& out) {
  nn::GradcheckOptions options;
  options.configurations = configurations;
  const nn::GradcheckResult r = nn::run_gradcheck(seed, options);
  out << "gradcheck: " << r.configurations << " networks, " << r.entries_checked
      << " parameters, max relative error " << r.max_relative_error << "\n";
  return r.max_relative_error <= kGradcheckThreshold ? kOk : kNumerical;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Least-squares and neural-network regression", "treg"};
  app.require_subcommand(1);

  detail::OlsArgs ols_args;
  CLI::App* ols_cmd = app.add_subcommand("ols-fit", "fit a linear model by least squares");
  detail::add_data_options(ols_cmd, ols_args.data);
  ols_cmd->add_option("--method", ols_args.method, "analytic or gd")
      ->check(CLI::IsMember({"analytic", "gd"}));
  ols_cmd->add_option("--epsilon", ols_args.epsilon, "gradient-descent step tolerance")
      ->check(CLI::PositiveNumber);
  ols_cmd->add_option("--max-iters", ols_args.max_iters, "gradient-descent iteration cap")
      ->check(CLI::PositiveNumber);
  ols_cmd->add_flag("--fallback-gd", ols_args.fallback_gd,
                    "use gradient descent when the analytic system is singular");

  detail::AnnArgs ann_args;
  CLI::App* ann_cmd = app.add_subcommand("ann-train", "train a dense network by backpropagation");
  detail::add_data_options(ann_cmd, ann_args.data);
  ann_cmd->add_option("--layers", ann_args.layers, "e.g. \"4:swish,1:identity\"")->required();
  ann_cmd->add_option("--loss", ann_args.loss, "mse, mae, huber, log_cosh, msle, poisson");
  ann_cmd->add_option("--huber-delta", ann_args.huber_delta, "Huber threshold");
  ann_cmd->add_option("--optimizer", ann_args.optimizer,
                      "gd, momentum, nesterov, adagrad, rmsprop, adam, nadam");
  ann_cmd->add_option("--learning-rate", ann_args.learning_rate, "optimizer learning rate");
  ann_cmd->add_option("--init", ann_args.init,
                      "random_uniform, random_normal, xavier, kaiming_uniform, "
                      "kaiming_normal, lecun");
  ann_cmd->add_option("--init-scale", ann_args.init_scale,
                      "beta or sigma of the random initializers");
  ann_cmd->add_option("--epochs", ann_args.epochs, "maximum number of epochs")
      ->check(CLI::PositiveNumber);
  ann_cmd->add_option("--epsilon", ann_args.epsilon, "validation-loss change tolerance");
  ann_cmd->add_option("--val-fraction", ann_args.val_fraction, "validation fraction in (0,1)");
  ann_cmd->add_option("--seed", ann_args.seed, "random seed");

  detail::PredictArgs predict_args;
  CLI::App* predict_cmd = app.add_subcommand("predict", "predict with a saved model");
  predict_cmd->add_option("--model", predict_args.model, "model file")->required();
  predict_cmd->add_option("--data", predict_args.data, "CSV with the feature columns")->required();
  predict_cmd->add_option("--out", predict_args.out, "output CSV (stdout when omitted)");

  std::uint64_t gradcheck_seed = 0;
  std::size_t gradcheck_configs = 50;
  CLI::App* gradcheck_cmd =
      app.add_subcommand("gradcheck", "compare backprop gradients with finite differences");
  gradcheck_cmd->add_option("--seed", gradcheck_seed, "random seed");
  gradcheck_cmd->add_option("--configs", gradcheck_configs, "number of random networks")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (*ols_cmd) return detail::run_ols_fit(ols_args, out);
    if (*ann_cmd) return detail::run_ann_train(ann_args, out);
    if (*predict_cmd) return detail::run_predict(predict_args, out);
    if (*gradcheck_cmd) return detail::run_gradcheck(gradcheck_seed, gradcheck_configs, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SingularityError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace treg::cli
