#pragma once

// Versioned JSON model files. A file holds either an OLS coefficient matrix
// or a full network (layer shapes, activations, weights, biases, loss and
// optimizer settings), together with the column names and the normalization
// statistics needed to predict in original units.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "treg/csv.hpp"
#include "treg/dataset.hpp"
#include "treg/errors.hpp"
#include "treg/network.hpp"
#include "treg/ols.hpp"
#include "treg/overloaded.hpp"

namespace treg::io {

inline constexpr int kModelFormatVersion = 1;

class ModelVersionError : public DataError {
 public:
  using DataError::DataError;
};

struct AnnModel {
  nn::NetworkState state;
  Loss loss = loss_kind::Mse{};
  Optimizer optimizer = opt::Adam{};
  Initializer initializer = init::XavierUniform{};
};

struct ModelFile {
  std::variant<ols::Model, AnnModel> model;
  std::vector<std::string> feature_columns;
  std::vector<std::string> target_columns;
  NormalizationStats feature_stats;
  NormalizationStats target_stats;
  std::optional<std::uint64_t> seed;

  bool is_ols() const { return std::holds_alternative<ols::Model>(model); }
};

namespace detail {

using nlohmann::json;

inline json stats_to_json(const NormalizationStats& s) {
  return {{"mean", s.mean}, {"std", s.stddev}};
}

inline json optimizer_to_json(const Optimizer& o) {
  json j = std::visit(
      treg::detail::overloaded{
          [](const opt::Gd& k) { return json{{"gamma", k.gamma}}; },
          [](const opt::Momentum& k) { return json{{"gamma", k.gamma}, {"mu", k.mu}}; },
          [](const opt::Nesterov& k) { return json{{"gamma", k.gamma}, {"mu", k.mu}}; },
          [](const opt::AdaGrad& k) { return json{{"gamma", k.gamma}, {"eps", k.eps}}; },
          [](const opt::RmsProp& k) {
            return json{{"gamma", k.gamma}, {"rho", k.rho}, {"eps", k.eps}};
          },
          [](const opt::Adam& k) {
            return json{{"gamma", k.gamma}, {"beta1", k.beta1}, {"beta2", k.beta2}, {"eps", k.eps}};
          },
          [](const opt::Nadam& k) {
            return json{{"gamma", k.gamma}, {"beta1", k.beta1}, {"beta2", k.beta2}, {"eps", k.eps}};
          },
      },
      o);
  j["name"] = optimizer_name(o);
  return j;
}

inline Optimizer optimizer_from_json(const json& j) {
  Optimizer o = parse_optimizer(j.at("name").get<std::string>(), j.at("gamma").get<double>());
  std::visit(treg::detail::overloaded{
                 [](opt::Gd&) {},
                 [&](opt::Momentum& k) { k.mu = j.at("mu").get<double>(); },
                 [&](opt::Nesterov& k) { k.mu = j.at("mu").get<double>(); },
                 [&](opt::AdaGrad& k) { k.eps = j.at("eps").get<double>(); },
                 [&](opt::RmsProp& k) {
                   k.rho = j.at("rho").get<double>();
                   k.eps = j.at("eps").get<double>();
                 },
                 [&](opt::Adam& k) {
                   k.beta1 = j.at("beta1").get<double>();
                   k.beta2 = j.at("beta2").get<double>();
                   k.eps = j.at("eps").get<double>();
                 },
                 [&](opt::Nadam& k) {
                   k.beta1 = j.at("beta1").get<double>();
                   k.beta2 = j.at("beta2").get<double>();
                   k.eps = j.at("eps").get<double>();
                 },
             },
             o);
  return o;
}

inline json loss_to_json(const Loss& l) {
  json j{{"name", loss_name(l)}};
  if (auto* h = std::get_if<loss_kind::Huber>(&l)) j["delta"] = h->delta;
  return j;
}

inline json initializer_to_json(const Initializer& k) {
  json j{{"name", initializer_name(k)}};
  if (auto* u = std::get_if<init::RandomUniform>(&k)) j["scale"] = u->beta;
  if (auto* n = std::get_if<init::RandomNormal>(&k)) j["scale"] = n->sigma;
  return j;
}

inline Matrix matrix_from_json(const json& values, std::size_t rows, std::size_t cols,
                               const std::string& what) {
  auto data = values.get<std::vector<double>>();
  if (data.size() != rows * cols) {
    throw DataError("model file: " + what + " declares " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " but holds " + std::to_string(data.size()) +
                    " values");
  }
  return Matrix(rows, cols, std::move(data));
}

inline NormalizationStats stats_from_json(const json& j, std::size_t columns,
                                          const std::string& what) {
  NormalizationStats s{j.at("mean").get<std::vector<double>>(),
                       j.at("std").get<std::vector<double>>()};
  if (s.mean.size() != columns || s.stddev.size() != columns) {
    throw DataError("model file: " + what + " normalization does not cover " +
                    std::to_string(columns) + " columns");
  }
  return s;
}

}  // namespace detail

inline nlohmann::json to_json(const ModelFile& file) {
  using nlohmann::json;
  json j;
  j["format_version"] = kModelFormatVersion;
  j["feature_columns"] = file.feature_columns;
  j["target_columns"] = file.target_columns;
  j["normalization"] = {{"features", detail::stats_to_json(file.feature_stats)},
                        {"targets", detail::stats_to_json(file.target_stats)}};
  j["seed"] = file.seed ? json(*file.seed) : json(nullptr);
  if (const auto* m = std::get_if<ols::Model>(&file.model)) {
    j["model_kind"] = "ols";
    j["ols"] = {{"rows", m->b.rows()}, {"cols", m->b.cols()}, {"b", m->b.values()}};
  } else {
    const auto& ann = std::get<AnnModel>(file.model);
    json layers = json::array();
    for (const nn::Layer& layer : ann.state.layers) {
      json lj{{"units", layer.weights.rows()},
              {"inputs", layer.weights.cols()},
              {"activation", activation_name(layer.activation)},
              {"weights", layer.weights.values()},
              {"biases", layer.biases.values()}};
      if (auto beta = activation_beta(layer.activation)) lj["beta"] = *beta;
      layers.push_back(std::move(lj));
    }
    j["model_kind"] = "ann";
    j["ann"] = {{"input_dim", ann.state.input_dim},
                {"loss", detail::loss_to_json(ann.loss)},
                {"optimizer", detail::optimizer_to_json(ann.optimizer)},
                {"initializer", detail::initializer_to_json(ann.initializer)},
                {"layers", std::move(layers)}};
  }
  return j;
}

inline ModelFile from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelVersionError("model file: unsupported format_version " +
                              std::to_string(version) + " (expected " +
                              std::to_string(kModelFormatVersion) + ")");
    }
    ModelFile file;
    file.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
    file.target_columns = j.at("target_columns").get<std::vector<std::string>>();
    const std::size_t n = file.feature_columns.size();
    const std::size_t m = file.target_columns.size();
    file.feature_stats =
        detail::stats_from_json(j.at("normalization").at("features"), n, "feature");
    file.target_stats =
        detail::stats_from_json(j.at("normalization").at("targets"), m, "target");
    if (!j.at("seed").is_null()) file.seed = j.at("seed").get<std::uint64_t>();

    const std::string kind = j.at("model_kind").get<std::string>();
    if (kind == "ols") {
      const auto& o = j.at("ols");
      const auto rows = o.at("rows").get<std::size_t>();
      const auto cols = o.at("cols").get<std::size_t>();
      if (rows != m || cols != n + 1) {
        throw DataError("model file: OLS coefficients are " + std::to_string(rows) + "x" +
                        std::to_string(cols) + ", columns imply " + std::to_string(m) +
                        "x" + std::to_string(n + 1));
      }
      file.model = ols::Model{detail::matrix_from_json(o.at("b"), rows, cols, "B")};
    } else if (kind == "ann") {
      const auto& a = j.at("ann");
      AnnModel ann;
      const auto& lj = a.at("loss");
      ann.loss = parse_loss(lj.at("name").get<std::string>(), lj.value("delta", 1.0));
      ann.optimizer = detail::optimizer_from_json(a.at("optimizer"));
      const auto& ij = a.at("initializer");
      ann.initializer = parse_initializer(
          ij.at("name").get<std::string>(),
          ij.contains("scale") ? std::optional<double>(ij.at("scale").get<double>())
                               : std::nullopt);
      ann.state.input_dim = a.at("input_dim").get<std::size_t>();
      if (ann.state.input_dim != n) {
        throw DataError("model file: network input_dim does not match feature_columns");
      }
      std::size_t fan_in = ann.state.input_dim;
      for (const auto& layer_json : a.at("layers")) {
        const auto units = layer_json.at("units").get<std::size_t>();
        const auto inputs = layer_json.at("inputs").get<std::size_t>();
        if (inputs != fan_in || units == 0) {
          throw DataError("model file: layer shapes do not chain");
        }
        nn::Layer layer;
        layer.weights = detail::matrix_from_json(layer_json.at("weights"), units, inputs, "weights");
        layer.biases = detail::matrix_from_json(layer_json.at("biases"), units, 1, "biases");
        layer.activation = parse_activation(
            layer_json.at("activation").get<std::string>(),
            layer_json.contains("beta")
                ? std::optional<double>(layer_json.at("beta").get<double>())
                : std::nullopt);
        layer.weight_state = OptimizerState::for_block(layer.weights);
        layer.bias_state = OptimizerState::for_block(layer.biases);
        ann.state.layers.push_back(std::move(layer));
        fan_in = units;
      }
      if (ann.state.layers.empty() || fan_in != m) {
        throw DataError("model file: network output does not match target_columns");
      }
      file.model = std::move(ann);
    } else {
      throw DataError("model file: unknown model_kind '" + kind + "'");
    }
    return file;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: malformed (") + e.what() + ")");
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

inline std::string serialize_model(const ModelFile& file) {
  return to_json(file).dump(2) + "\n";
}

inline ModelFile parse_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: malformed (") + e.what() + ")");
  }
  return from_json(j);
}

inline void save_model(const ModelFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << serialize_model(file);
  if (!out) throw DataError("failed writing '" + path + "'");
}

inline ModelFile load_model(const std::string& path) {
  return parse_model(read_file(path));
}

// Predictions in original target units for row-per-sample `features`
// (original feature units). Returns a samples×m matrix.
inline Matrix predict(const ModelFile& file, const Matrix& features) {
  const Matrix x = apply_normalization(features, file.feature_stats);
  Matrix y_norm;
  if (const auto* m = std::get_if<ols::Model>(&file.model)) {
    y_norm = Matrix(x.rows(), m->b.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const std::vector<double> y = ols::predict(*m, x.row(r));
      for (std::size_t c = 0; c < y.size(); ++c) y_norm(r, c) = y[c];
    }
  } else {
    y_norm = transpose(nn::predict(std::get<AnnModel>(file.model).state, transpose(x)));
  }
  return denormalize(y_norm, file.target_stats);
}

}  // namespace treg::io
