#pragma once

// JSON run configuration. Top-level keys mirror TrainConfig; "dataset",
// "model" and "out" describe the run around it. `screen.amplitude` is given in
// 0-255 grey levels and divided by 255 at load; everything else is on the
// [0, 1] pixel scale.
//
// Every leaf key can be overridden from the environment as ADVSUB_<PATH>, the
// key path upper-cased and joined with '_', e.g. ADVSUB_RATIO_R,
// ADVSUB_ATTACK_EPSILON, ADVSUB_SCREEN_AMPLITUDE, ADVSUB_DATASET_DIR.
// Precedence: defaults < file < environment < command-line flags.

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "advsub/dataset.hpp"
#include "advsub/error.hpp"
#include "advsub/nn.hpp"
#include "advsub/trainer.hpp"

namespace advsub {

inline constexpr const char* kEnvPrefix = "ADVSUB_";

struct DatasetSpec {
  std::string format = "idx";  // "idx" (MNIST layout) or "cifar"
  std::string dir;
  std::size_t train_limit = 0;  // 0 keeps every sample
  std::size_t test_limit = 0;
};

struct RunConfig {
  TrainConfig train;
  DatasetSpec dataset;
  ModelKind model = ModelKind::kMlp;
  std::string out;
};

inline nlohmann::json to_json(const RunConfig& rc) {
  const TrainConfig& t = rc.train;
  return {
      {"mode", std::string(to_string(t.mode))},
      {"ratio_r", t.ratio_r},
      {"refilter_period_epochs", t.refilter_period_epochs},
      {"warmup_epochs", t.warmup_epochs},
      {"epochs", t.epochs},
      {"batch_size", t.batch_size},
      {"attack", {{"epsilon", t.attack.epsilon}}},
      {"screen",
       {{"amplitude", t.screen.amplitude * 255},
        {"trials_per_attack", t.screen.trials_per_attack},
        {"grid_line_cap", t.screen.grid_line_cap},
        {"grid_fraction", t.screen.grid_fraction},
        {"grid_value", t.screen.grid_value}}},
      {"sgd",
       {{"learning_rate", t.sgd.learning_rate},
        {"momentum", t.sgd.momentum},
        {"weight_decay", t.sgd.weight_decay}}},
      {"replay_m", t.replay_m},
      {"seed", t.seed},
      {"dataset",
       {{"format", rc.dataset.format},
        {"dir", rc.dataset.dir},
        {"train_limit", rc.dataset.train_limit},
        {"test_limit", rc.dataset.test_limit}}},
      {"model", rc.model == ModelKind::kMlp ? "mlp" : "cnn"},
      {"out", rc.out},
  };
}

namespace detail {

/// Overlays `patch` onto `base`, rejecting keys `base` does not have.
inline void merge_known(nlohmann::json& base, const nlohmann::json& patch, const std::string& path) {
  require(patch.is_object(), ErrorKind::kConfig,
          "config section '" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    require(base.contains(key), ErrorKind::kConfig, "unknown config key '" + where + "'");
    if (base[key].is_object()) {
      merge_known(base[key], value, where);
    } else {
      require(value.is_primitive() && !value.is_null(), ErrorKind::kConfig,
              "config key '" + where + "' must be a scalar");
      base[key] = value;
    }
  }
}

inline std::string env_name(const std::string& path) {
  std::string name = kEnvPrefix;
  for (char c : path) name.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(c)));
  return name;
}

inline nlohmann::json parse_env_value(const nlohmann::json& like, const std::string& text,
                                      const std::string& var) {
  try {
    if (like.is_string()) return text;
    if (like.is_boolean()) return text == "1" || text == "true";
    if (like.is_number_unsigned()) return std::stoull(text);
    if (like.is_number_integer()) return std::stoll(text);
    return std::stod(text);
  } catch (const std::exception&) {
    fail(ErrorKind::kConfig, "cannot parse " + var + "='" + text + "'");
  }
}

inline void apply_env(nlohmann::json& node, const std::string& path,
                      const std::function<const char*(const std::string&)>& getenv_fn) {
  for (auto& [key, value] : node.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (value.is_object()) {
      apply_env(value, where, getenv_fn);
      continue;
    }
    const std::string var = env_name(where);
    if (const char* text = getenv_fn(var)) value = parse_env_value(value, text, var);
  }
}

template <class T>
T get_as(const nlohmann::json& j, const char* key, const std::string& section) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::kConfig, "config key '" + section + key + "' has the wrong type");
  }
}

}  // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  using detail::get_as;
  RunConfig rc;
  TrainConfig& t = rc.train;
  t.mode = parse_train_mode(get_as<std::string>(j, "mode", ""));
  t.ratio_r = get_as<std::uint32_t>(j, "ratio_r", "");
  t.refilter_period_epochs = get_as<std::uint32_t>(j, "refilter_period_epochs", "");
  t.warmup_epochs = get_as<std::uint32_t>(j, "warmup_epochs", "");
  t.epochs = get_as<std::uint32_t>(j, "epochs", "");
  t.batch_size = get_as<std::uint32_t>(j, "batch_size", "");
  t.attack.epsilon = get_as<real>(j.at("attack"), "epsilon", "attack.");
  const auto& s = j.at("screen");
  t.screen.amplitude = get_as<real>(s, "amplitude", "screen.") / 255;
  t.screen.trials_per_attack = get_as<std::size_t>(s, "trials_per_attack", "screen.");
  t.screen.grid_line_cap = get_as<std::size_t>(s, "grid_line_cap", "screen.");
  t.screen.grid_fraction = get_as<real>(s, "grid_fraction", "screen.");
  t.screen.grid_value = get_as<real>(s, "grid_value", "screen.");
  const auto& g = j.at("sgd");
  t.sgd.learning_rate = get_as<real>(g, "learning_rate", "sgd.");
  t.sgd.momentum = get_as<real>(g, "momentum", "sgd.");
  t.sgd.weight_decay = get_as<real>(g, "weight_decay", "sgd.");
  t.replay_m = get_as<std::uint32_t>(j, "replay_m", "");
  t.seed = get_as<std::uint64_t>(j, "seed", "");
  const auto& d = j.at("dataset");
  rc.dataset.format = get_as<std::string>(d, "format", "dataset.");
  rc.dataset.dir = get_as<std::string>(d, "dir", "dataset.");
  rc.dataset.train_limit = get_as<std::size_t>(d, "train_limit", "dataset.");
  rc.dataset.test_limit = get_as<std::size_t>(d, "test_limit", "dataset.");
  const std::string model = get_as<std::string>(j, "model", "");
  require(model == "mlp" || model == "cnn", ErrorKind::kConfig,
          "model must be 'mlp' or 'cnn', got '" + model + "'");
  rc.model = model == "mlp" ? ModelKind::kMlp : ModelKind::kCnn;
  rc.out = get_as<std::string>(j, "out", "");
  require(rc.dataset.format == "idx" || rc.dataset.format == "cifar", ErrorKind::kConfig,
          "dataset.format must be 'idx' or 'cifar'");
  t.validate();
  return rc;
}

/// Defaults overlaid with `file_json` and then the environment.
inline RunConfig resolve_run_config(
    const nlohmann::json& file_json,
    const std::function<const char*(const std::string&)>& getenv_fn =
        [](const std::string& k) { return std::getenv(k.c_str()); }) {
  nlohmann::json merged = to_json(RunConfig{});
  if (!file_json.is_null()) detail::merge_known(merged, file_json, "");
  detail::apply_env(merged, "", getenv_fn);
  return run_config_from_json(merged);
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  require(!j.is_discarded(), ErrorKind::kConfig, path.string() + " is not valid JSON");
  return j;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return resolve_run_config(read_json_file(path));
}

struct DatasetPair {
  DatasetHandle train;
  DatasetHandle test;
};

inline DatasetPair load_datasets(const DatasetSpec& spec) {
  require(!spec.dir.empty(), ErrorKind::kConfig, "dataset.dir is not set");
  const std::filesystem::path dir(spec.dir);
  DatasetPair p;
  if (spec.format == "idx") {
    p.train = load_mnist_dir(dir, true);
    p.test = load_mnist_dir(dir, false);
  } else {
    p.train = load_cifar_dir(dir, true);
    p.test = load_cifar_dir(dir, false);
  }
  p.train = p.train.head(spec.train_limit);
  p.test = p.test.head(spec.test_limit);
  return p;
}

}  // namespace advsub
