#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "gmrbm/errors.hpp"

namespace gmrbm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw UsageError("config key '" + key + "': '" + value + "' is not " + expected);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a non-negative integer");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true or false");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(parse_integer<T>(key, trim(item)));
  if (out.empty()) bad_value(key, value, "a comma-separated list");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto size = [](std::size_t RunConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) {
        c.*field = parse_integer<std::size_t>(k, v);
      };
    };
    auto train_size = [](std::size_t TrainConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) {
        c.train.*field = parse_integer<std::size_t>(k, v);
      };
    };
    auto train_real = [](double TrainConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) {
        c.train.*field = parse_real(k, v);
      };
    };
    auto path = [](std::filesystem::path RunConfig::*field) {
      return [field](RunConfig& c, const std::string&, const std::string& v) {
        c.*field = v;
      };
    };

    t["n"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.n = parse_integer<std::size_t>(k, v);
    };
    t["m"] = size(&RunConfig::m);
    t["q"] = size(&RunConfig::q);

    t["learning_rate"] = train_real(&TrainConfig::learning_rate);
    t["batch_size"] = train_size(&TrainConfig::batch_size);
    t["cd_k"] = train_size(&TrainConfig::cd_k);
    t["burn_in"] = train_size(&TrainConfig::burn_in);
    t["max_epochs"] = train_size(&TrainConfig::max_epochs);
    t["adam_beta1"] = train_real(&TrainConfig::adam_beta1);
    t["adam_beta2"] = train_real(&TrainConfig::adam_beta2);
    t["adam_epsilon"] = train_real(&TrainConfig::adam_epsilon);
    t["checkpoint_every"] = train_size(&TrainConfig::checkpoint_every);
    t["chain_pool"] = train_size(&TrainConfig::chain_pool);

    t["sampler"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.train.sampler.kind = parse_sampler_kind(v);
    };
    t["langevin_eps"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.sampler.langevin_eps = parse_real(k, v);
    };
    t["langevin_steps"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.sampler.langevin_steps = parse_integer<std::size_t>(k, v);
    };
    t["persistent"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.sampler.persistent = parse_bool(k, v);
    };

    t["target_accuracy"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.early_stop.target_accuracy = parse_real(k, v);
    };
    t["window"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.early_stop.window = parse_integer<std::size_t>(k, v);
    };
    t["std_threshold"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.early_stop.std_threshold = parse_real(k, v);
    };
    t["patience"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.early_stop.patience = parse_integer<std::size_t>(k, v);
    };
    t["improvement_tolerance"] = [](RunConfig& c, const std::string& k,
                                    const std::string& v) {
      c.early_stop.improvement_tolerance = parse_real(k, v);
    };

    t["recall_steps"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.recall.steps = parse_integer<std::size_t>(k, v);
    };
    t["readout"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.recall.readout = parse_readout(v);
    };
    t["metric"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.recall.metric = parse_distance_metric(v);
    };
    t["task"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v != "vectors" && v != "pairs") bad_value(k, v, "vectors or pairs");
      c.task = v;
    };
    t["validation_pairs"] = size(&RunConfig::validation_pairs);

    t["data"] = path(&RunConfig::data);
    t["pairs"] = path(&RunConfig::pairs);
    t["model"] = path(&RunConfig::model);
    t["out"] = path(&RunConfig::out);
    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.seed = parse_integer<std::uint64_t>(k, v);
    };
    t["threads"] = size(&RunConfig::threads);

    t["samples"] = size(&RunConfig::samples);
    t["sample_steps"] = size(&RunConfig::sample_steps);
    t["diag_steps"] = size(&RunConfig::diag_steps);

    t["n_w"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.n_w = parse_integer<std::uint64_t>(k, v);
    };
    t["n_v"] = size(&RunConfig::n_v);
    t["q_list"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.q_list = parse_list<std::size_t>(k, v);
    };
    t["hidden_list"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.hidden_list = parse_list<std::size_t>(k, v);
    };
    t["sizes"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.sizes = parse_list<std::size_t>(k, v);
    };
    t["seeds"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.seeds = parse_list<std::uint64_t>(k, v);
    };
    t["structure"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.structure = parse_pair_structure(v);
    };
    t["synth_count"] = size(&RunConfig::synth_count);
    t["synth_dim"] = size(&RunConfig::synth_dim);
    return t;
  }();
  return table;
}

}  // namespace

Settings parse_settings(const std::string& text) {
  Settings out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw UsageError("config line " + std::to_string(line_no) + ": empty key");
    }
    if (!out.emplace(key, value).second) {
      throw UsageError("config line " + std::to_string(line_no) +
                       ": duplicate key '" + key + "'");
    }
  }
  return out;
}

Settings load_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_settings(text.str());
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, setter] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

RunConfig make_run_config(const Settings& settings) {
  RunConfig config;
  const auto& table = setters();
  for (const auto& [key, value] : settings) {
    const auto it = table.find(key);
    if (it == table.end()) throw UsageError("unknown config key '" + key + "'");
    it->second(config, key, value);
  }
  config.train.seed = config.seed;
  config.train.threads = config.threads;
  return config;
}

}  // namespace gmrbm::cli
