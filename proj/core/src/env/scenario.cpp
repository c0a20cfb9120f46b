#include "advprobe/env/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <unordered_map>

#include "advprobe/common/hash.hpp"

namespace advprobe::env {

namespace {

using Kind = ScenarioError::Kind;

[[noreturn]] void fail(Kind kind, const std::string& msg) {
  throw ScenarioError(kind, msg);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(Kind::Parse, "invalid value for " + what);
  }
}

template <typename T>
T scalar_or(const YAML::Node& parent, const char* key, T fallback,
            const std::string& what) {
  const YAML::Node n = parent[key];
  if (!n || n.IsNull()) return fallback;
  return scalar<T>(n, what + "." + key);
}

YAML::Node require(const YAML::Node& parent, const char* key,
                   const std::string& where) {
  const YAML::Node n = parent[key];
  if (!n) fail(Kind::Parse, "missing key '" + std::string(key) + "' in " + where);
  return n;
}

}  // namespace

std::size_t ScenarioConfig::target_index() const {
  for (std::size_t i = 0; i < red_assets.size(); ++i)
    if (red_assets[i].is_target) return i;
  throw ScenarioError(Kind::Invariant, "scenario has no target red asset");
}

bool ScenarioConfig::defends(std::size_t defender, std::size_t node) const {
  const auto& d = defense_network[node];
  return std::find(d.begin(), d.end(), defender) != d.end();
}

ScenarioConfig load_scenario(std::string_view yaml_text) {
  YAML::Node loaded;
  try {
    loaded = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    fail(Kind::Parse, std::string("YAML parse failure: ") + e.what());
  }
  const YAML::Node root = loaded;
  if (!root.IsMap()) fail(Kind::Parse, "scenario document must be a mapping");

  ScenarioConfig cfg;
  std::unordered_map<std::string, std::size_t> adr_index;

  if (const YAML::Node vars = root["adr_variables"]; vars && !vars.IsNull()) {
    if (!vars.IsSequence()) fail(Kind::Parse, "adr_variables must be a list");
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const std::string where = "adr_variables[" + std::to_string(i) + "]";
      AdrVariable v;
      v.id = scalar<std::string>(require(vars[i], "id", where), where + ".id");
      const YAML::Node params = require(vars[i], "parameters", where);
      v.mean = scalar<double>(require(params, "mean", where), where + ".mean");
      v.stdev = scalar<double>(require(params, "stdev", where), where + ".stdev");
      v.minimum = scalar<double>(require(params, "minimum", where), where + ".minimum");
      v.maximum = scalar<double>(require(params, "maximum", where), where + ".maximum");
      if (adr_index.contains(v.id)) fail(Kind::Invariant, "duplicate ADR id " + v.id);
      adr_index.emplace(v.id, cfg.adr_variables.size());
      cfg.adr_variables.push_back(std::move(v));
    }
  }

  const YAML::Node scenario = require(root, "scenario", "document");
  const YAML::Node red = require(scenario, "red", "scenario");
  const YAML::Node red_assets = require(red, "assets", "scenario.red");
  if (!red_assets.IsSequence()) fail(Kind::Parse, "scenario.red.assets must be a list");
  for (std::size_t i = 0; i < red_assets.size(); ++i) {
    const std::string where = "scenario.red.assets[" + std::to_string(i) + "]";
    RedAsset a;
    a.is_target = scalar_or<bool>(red_assets[i], "is_target", false, where);
    a.type = scalar<int>(require(red_assets[i], "type", where), where + ".type");
    a.is_alive = scalar_or<bool>(red_assets[i], "is_alive", true, where);
    cfg.red_assets.push_back(a);
  }

  const YAML::Node net = require(red, "defense_network", "scenario.red");
  if (!net.IsSequence()) fail(Kind::Parse, "defense_network must be a list");
  for (std::size_t j = 0; j < net.size(); ++j) {
    const std::string where = "defense_network[" + std::to_string(j) + "]";
    std::vector<std::size_t> defenders;
    if (!net[j].IsNull()) {
      if (!net[j].IsSequence()) fail(Kind::Parse, where + " must be a list");
      for (const auto& d : net[j]) {
        const long long v = scalar<long long>(d, where);
        if (v < 0) fail(Kind::Invariant, where + " has negative defender index");
        defenders.push_back(static_cast<std::size_t>(v));
      }
    }
    cfg.defense_network.push_back(std::move(defenders));
  }

  const YAML::Node blue = require(scenario, "blue", "scenario");
  const YAML::Node blue_assets = require(blue, "assets", "scenario.blue");
  if (!blue_assets.IsSequence()) fail(Kind::Parse, "scenario.blue.assets must be a list");
  for (std::size_t i = 0; i < blue_assets.size(); ++i) {
    const std::string where = "scenario.blue.assets[" + std::to_string(i) + "]";
    BlueAsset b;
    b.type = scalar<int>(require(blue_assets[i], "type", where), where + ".type");
    b.loss_cost = scalar_or<double>(blue_assets[i], "loss_cost", 0.0, where);
    b.use_cost = scalar_or<double>(blue_assets[i], "use_cost", 0.0, where);
    b.is_alive = scalar_or<bool>(blue_assets[i], "is_alive", true, where);
    cfg.blue_assets.push_back(b);
  }
  cfg.episode_cap = scalar_or<int>(scenario, "episode_cap", kDefaultEpisodeCap, "scenario");

  // effect_probability may sit at the top level or under scenario.blue.
  // YAML::Node assignment writes through to the referenced node, so pick the
  // source with reset() rather than operator=.
  YAML::Node effects;
  for (const YAML::Node* parent : {&root, &blue, &scenario}) {
    const YAML::Node candidate = (*parent)["effect_probability"];
    if (candidate) {
      effects.reset(candidate);
      break;
    }
  }
  if (!effects) fail(Kind::Parse, "missing key 'effect_probability'");
  if (!effects.IsSequence()) fail(Kind::Parse, "effect_probability must be a list");
  for (std::size_t r = 0; r < effects.size(); ++r) {
    if (!effects[r].IsSequence()) fail(Kind::Parse, "effect_probability rows must be lists");
    std::vector<EffectEntry> row;
    for (std::size_t c = 0; c < effects[r].size(); ++c) {
      const YAML::Node cell = effects[r][c];
      const std::string where =
          "effect_probability[" + std::to_string(r) + "][" + std::to_string(c) + "]";
      EffectEntry e;
      double value = 0.0;
      if (YAML::convert<double>::decode(cell, value)) {
        e.literal = value;
      } else {
        const std::string ref = scalar<std::string>(cell, where);
        auto it = adr_index.find(ref);
        if (it == adr_index.end())
          fail(Kind::DanglingAdrReference,
               where + " references undeclared ADR variable '" + ref + "'");
        e.adr = it->second;
      }
      row.push_back(e);
    }
    cfg.effect_probability.push_back(std::move(row));
  }

  validate(cfg);
  return cfg;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const InputError& e) {
    throw ScenarioError(Kind::Parse, e.what());
  }
  return load_scenario(text);
}

void validate(const ScenarioConfig& cfg) {
  const std::size_t nr = cfg.num_red();
  if (nr == 0) fail(Kind::Invariant, "scenario needs at least one red asset");
  if (cfg.num_blue() == 0) fail(Kind::Invariant, "scenario needs at least one blue asset");

  const auto targets = std::count_if(cfg.red_assets.begin(), cfg.red_assets.end(),
                                     [](const RedAsset& a) { return a.is_target; });
  if (targets != 1)
    fail(Kind::Invariant,
         "exactly one red asset must be the target (found " + std::to_string(targets) + ")");

  if (cfg.defense_network.size() != nr)
    fail(Kind::Invariant, "defense_network has " + std::to_string(cfg.defense_network.size()) +
                              " rows for " + std::to_string(nr) + " red assets");
  for (std::size_t j = 0; j < nr; ++j) {
    for (std::size_t k : cfg.defense_network[j]) {
      if (k >= nr)
        fail(Kind::Invariant, "red node " + std::to_string(j) + " lists defender " +
                                  std::to_string(k) + " which is out of range");
      if (k == j) fail(Kind::Invariant, "red node " + std::to_string(j) + " defends itself");
    }
  }

  int max_type = 0;
  for (const auto& a : cfg.red_assets) {
    if (a.type < 0) fail(Kind::Invariant, "negative red asset type");
    max_type = std::max(max_type, a.type);
  }
  for (const auto& b : cfg.blue_assets) {
    if (b.type < 0) fail(Kind::Invariant, "negative blue asset type");
    max_type = std::max(max_type, b.type);
  }
  const std::size_t side = static_cast<std::size_t>(max_type) + 1;
  if (cfg.effect_probability.size() != side)
    fail(Kind::Invariant, "effect_probability must be " + std::to_string(side) + "x" +
                              std::to_string(side));
  for (const auto& row : cfg.effect_probability) {
    if (row.size() != side) fail(Kind::Invariant, "effect_probability must be square");
    for (const auto& e : row) {
      if (e.adr) {
        if (*e.adr >= cfg.adr_variables.size())
          fail(Kind::DanglingAdrReference, "effect entry references missing ADR variable");
      } else if (!(e.literal >= 0.0 && e.literal <= 1.0)) {
        fail(Kind::Invariant, "effect probability outside [0, 1]");
      }
    }
  }

  for (const auto& v : cfg.adr_variables) {
    if (!(v.minimum <= v.mean && v.mean <= v.maximum))
      fail(Kind::Invariant, "ADR variable " + v.id + " violates minimum <= mean <= maximum");
    if (!(v.stdev >= 0.0)) fail(Kind::Invariant, "ADR variable " + v.id + " has negative stdev");
  }
  if (cfg.episode_cap <= 0) fail(Kind::Invariant, "episode_cap must be positive");
}

double CurriculumLevel::stdev_for(const AdrVariable& var) const {
  auto it = stdev_overrides.find(var.id);
  return it == stdev_overrides.end() ? var.stdev : it->second;
}

CurriculumLevel CurriculumLevel::deterministic(const ScenarioConfig& config, int index) {
  return uniform(config, 0.0, index);
}

CurriculumLevel CurriculumLevel::uniform(const ScenarioConfig& config, double stdev,
                                         int index) {
  CurriculumLevel level;
  level.index = index;
  for (const auto& v : config.adr_variables) level.stdev_overrides[v.id] = stdev;
  return level;
}

}  // namespace advprobe::env
