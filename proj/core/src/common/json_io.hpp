#pragma once

#include <json.hpp>

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "advprobe/common/error.hpp"
#include "advprobe/env/cyberstrike.hpp"

namespace advprobe::detail {

using nlohmann::json;

inline const char* outcome_name(env::Outcome o) {
  switch (o) {
    case env::Outcome::Win: return "win";
    case env::Outcome::Loss: return "loss";
    default: return "undecided";
  }
}

inline env::Outcome parse_outcome(const std::string& s) {
  if (s == "win") return env::Outcome::Win;
  if (s == "loss") return env::Outcome::Loss;
  if (s == "undecided") return env::Outcome::Undecided;
  throw InputError("unknown outcome '" + s + "'");
}

inline json to_json(const env::PropertyLog& p) {
  return json{{"win", outcome_name(p.win)},
              {"red_count", p.red_count},
              {"blue_count", p.blue_count},
              {"trajectory_length", p.trajectory_length}};
}

inline env::PropertyLog property_log_from_json(const json& j) {
  env::PropertyLog p;
  p.win = parse_outcome(j.at("win").get<std::string>());
  p.red_count = j.at("red_count").get<int>();
  p.blue_count = j.at("blue_count").get<int>();
  p.trajectory_length = j.at("trajectory_length").get<int>();
  return p;
}

/// Writes one compact JSON document followed by '\n'.
inline void write_line(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

/// Reads the next non-empty line as JSON; returns false at end of stream.
inline bool read_line(std::istream& in, json& j) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(std::string("malformed JSON line: ") + e.what());
    }
    return true;
  }
  return false;
}

/// Checks a versioned table header line {"format": ..., "version": ...}.
inline void expect_header(const json& header, const std::string& format, int version) {
  if (!header.is_object() || header.value("format", "") != format)
    throw InputError("expected a '" + format + "' file");
  if (header.value("version", -1) != version)
    throw InputError("unsupported " + format + " version " +
                     std::to_string(header.value("version", -1)));
}

}  // namespace advprobe::detail
