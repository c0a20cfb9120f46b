#include "advprobe/train/policy.hpp"

#include <fstream>
#include <numeric>
#include <stdexcept>

#include "advprobe/common/hash.hpp"
#include "common/json_io.hpp"

namespace advprobe::train {

using detail::json;

const char* algorithm_name(Algorithm a) { return a == Algorithm::DQN ? "DQN" : "A2C"; }

Algorithm parse_algorithm(const std::string& name) {
  if (name == "DQN" || name == "dqn") return Algorithm::DQN;
  if (name == "A2C" || name == "a2c") return Algorithm::A2C;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

void FrozenPolicy::check() const {
  const int total = std::accumulate(cardinalities.begin(), cardinalities.end(), 0);
  if (net.layers().empty() || static_cast<std::size_t>(total) != net.output_dim())
    throw std::invalid_argument("policy output size does not match action cardinalities");
}

env::MultiDiscreteAction greedy_segments(const Eigen::Ref<const Eigen::VectorXd>& output,
                                         std::span<const int> cardinalities) {
  env::MultiDiscreteAction action;
  action.reserve(cardinalities.size());
  Eigen::Index off = 0;
  for (int card : cardinalities) {
    int best = 0;
    for (int i = 1; i < card; ++i)
      if (output(off + i) > output(off + best)) best = i;
    action.push_back(best);
    off += card;
  }
  return action;
}

env::MultiDiscreteAction select_action(const FrozenPolicy& policy,
                                       std::span<const double> obs) {
  return greedy_segments(policy.net.output(obs), policy.cardinalities);
}

namespace {

const char* activation_name(nn::Activation a) {
  switch (a) {
    case nn::Activation::ReLU: return "relu";
    case nn::Activation::Tanh: return "tanh";
    default: return "identity";
  }
}

nn::Activation parse_activation(const std::string& s) {
  if (s == "relu") return nn::Activation::ReLU;
  if (s == "tanh") return nn::Activation::Tanh;
  if (s == "identity") return nn::Activation::Identity;
  throw InputError("unknown activation '" + s + "'");
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  return flat;
}

}  // namespace

std::string policy_to_text(const FrozenPolicy& p) {
  p.check();
  json layers = json::array();
  for (const auto& l : p.net.layers()) {
    std::vector<double> bias(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"weight", matrix_to_json(l.weight)}, {"bias", bias}});
  }
  json history = json::array();
  for (const auto& h : p.history)
    history.push_back({{"level", h.level},
                       {"episodes", h.episodes},
                       {"env_steps", h.env_steps},
                       {"final_win_rate", h.final_win_rate},
                       {"passed", h.passed}});
  const json doc = {{"format", kPolicyFormat},
                    {"version", kPolicyVersion},
                    {"algorithm", algorithm_name(p.algorithm)},
                    {"tag", p.tag},
                    {"curriculum", p.curriculum},
                    {"seed", p.seed},
                    {"cardinalities", p.cardinalities},
                    {"history", history},
                    {"net",
                     {{"dims", p.net.dims()},
                      {"activation", activation_name(p.net.activation())},
                      {"layers", layers}}}};
  return doc.dump() + "\n";
}

FrozenPolicy policy_from_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed policy checkpoint: ") + e.what());
  }
  detail::expect_header(doc, kPolicyFormat, kPolicyVersion);
  try {
    FrozenPolicy p;
    p.algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    p.tag = doc.at("tag").get<std::string>();
    p.curriculum = doc.at("curriculum").get<std::string>();
    p.seed = doc.at("seed").get<std::uint64_t>();
    p.cardinalities = doc.at("cardinalities").get<std::vector<int>>();
    for (const auto& h : doc.at("history"))
      p.history.push_back({h.at("level").get<int>(), h.at("episodes").get<std::size_t>(),
                           h.at("env_steps").get<std::size_t>(),
                           h.at("final_win_rate").get<double>(), h.at("passed").get<bool>()});
    const json& net = doc.at("net");
    auto dims = net.at("dims").get<std::vector<std::size_t>>();
    p.net = nn::Mlp::zeros(dims, parse_activation(net.at("activation").get<std::string>()));
    const json& layers = net.at("layers");
    if (layers.size() != p.net.layers().size()) throw InputError("layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& layer = p.net.layers()[l];
      const auto w = layers[l].at("weight").get<std::vector<double>>();
      const auto b = layers[l].at("bias").get<std::vector<double>>();
      if (w.size() != static_cast<std::size_t>(layer.weight.size()) ||
          b.size() != static_cast<std::size_t>(layer.bias.size()))
        throw InputError("layer " + std::to_string(l) + " has the wrong parameter count");
      std::size_t i = 0;
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = w[i++];
      for (std::size_t k = 0; k < b.size(); ++k) layer.bias(static_cast<Eigen::Index>(k)) = b[k];
    }
    p.check();
    return p;
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid policy checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("invalid policy checkpoint: ") + e.what());
  }
}

void save_policy(const FrozenPolicy& policy, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << policy_to_text(policy);
}

FrozenPolicy load_policy(const std::filesystem::path& path) {
  return policy_from_text(read_file(path));
}

}  // namespace advprobe::train
