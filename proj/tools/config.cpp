#include "config.hpp"

#include <filesystem>
#include <fstream>

#include "lossmoe/error.hpp"

namespace lossmoe::cli {

namespace {

template <class T>
T get(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParameterError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

void apply_json(CliConfig& c, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParameterError("config file must hold a JSON object");
  auto& s = c.sweep;
  for (const auto& [key, v] : doc.items()) {
    if (key == "variant") {
      c.variant = parse_variant(get<std::string>(v, key));
    } else if (key == "m_theta") {
      s.m_theta = get<int>(v, key);
    } else if (key == "m_phi") {
      s.m_phi = get<int>(v, key);
    } else if (key == "xi") {
      c.xi = get<double>(v, key);
    } else if (key == "level") {
      s.level = parse_level(get<std::string>(v, key));
    } else if (key == "use_prop2") {
      s.use_prop2 = get<bool>(v, key);
    } else if (key == "p_err") {
      s.p_err_list = {get<double>(v, key)};
    } else if (key == "p_err_start") {
      s.p_err_start = get<double>(v, key);
    } else if (key == "p_err_stop") {
      s.p_err_stop = get<double>(v, key);
    } else if (key == "p_err_step") {
      s.p_err_step = get<double>(v, key);
    } else if (key == "p_err_list") {
      s.p_err_list = get<std::vector<double>>(v, key);
    } else if (key == "workers") {
      s.workers = get<int>(v, key);
    } else if (key == "tol") {
      s.solver.tol = get<double>(v, key);
    } else if (key == "near_tol") {
      s.solver.near_tol = get<double>(v, key);
    } else if (key == "max_iter") {
      s.solver.max_iter = get<int>(v, key);
    } else if (key == "pad") {
      s.solver.pad = get<double>(v, key);
    } else if (key == "output") {
      c.output = get<std::string>(v, key);
    } else if (key == "cache") {
      c.cache = get<bool>(v, key);
    } else if (key == "cache_dir") {
      s.cache_dir = get<std::string>(v, key);
    } else if (key == "n") {
      c.n = get<int>(v, key);
    } else if (key == "q") {
      c.q = get<int>(v, key);
    } else if (key == "eta") {
      c.eta = get<double>(v, key);
    } else if (key == "delta") {
      c.delta = get<double>(v, key);
    } else if (key == "beta") {
      c.beta = get<double>(v, key);
    } else if (key == "flavor") {
      c.flavor = parse_flavor(get<std::string>(v, key));
    } else if (key == "integer_k") {
      c.integer_k = get<bool>(v, key);
    } else if (key == "p_step") {
      c.p_step = get<double>(v, key);
    } else {
      throw ParameterError("unknown config key '" + key + "'");
    }
  }
}

void load_config_file(CliConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("config file " + path + ": " + e.what());
  }
  apply_json(config, doc);
}

std::string default_cache_dir(const std::string& output) {
  std::filesystem::path base = output.empty() ? std::filesystem::path(".")
                                              : std::filesystem::path(output).parent_path();
  if (base.empty()) base = ".";
  return (base / ".lossmoe-cache").string();
}

}  // namespace lossmoe::cli
