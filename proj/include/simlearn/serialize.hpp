#pragma once

#include <nlohmann/json.hpp>

#include "simlearn/nn.hpp"

namespace simlearn {

inline constexpr int kModelFormatVersion = 1;

/// Versioned network document. Parameters are a flat array in the documented
/// order (per layer: weights row-major, then bias). nlohmann serializes
/// doubles with max_digits10 precision, so the round trip is value-exact.
inline nlohmann::json network_to_json(const nn::Network& net) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["layout"] = net.layout;
  std::vector<std::string> acts;
  for (auto a : net.acts) acts.push_back(nn::to_string(a));
  j["activations"] = acts;
  j["seed"] = net.seed;
  j["parameters"] = std::vector<double>(net.params.data(), net.params.data() + net.params.size());
  return j;
}

inline nn::Network network_from_json(const nlohmann::json& j) {
  if (j.value("format_version", -1) != kModelFormatVersion)
    throw ConfigError("unsupported network format_version");
  nn::Network net;
  net.layout = j.at("layout").get<std::vector<int>>();
  for (const auto& s : j.at("activations"))
    net.acts.push_back(nn::activation_from_string(s.get<std::string>()));
  net.seed = j.value("seed", std::uint64_t{0});
  auto p = j.at("parameters").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(p.size()) != nn::param_count(net.layout))
    throw ConfigError("network parameter array length does not match layout");
  net.params = Eigen::Map<const Eigen::VectorXd>(p.data(), (Eigen::Index)p.size());
  return net;
}

}  // namespace simlearn
