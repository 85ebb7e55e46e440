#pragma once

#include <atomic>
#include <iosfwd>
#include <string>
#include <vector>

#include "biharm/experiments.hpp"

namespace biharm {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitPartial = 3;

// Reads a config file into a JSON tree: *.json as JSON, anything else as
// key = value text with [sections] (forcing, initial, sweep).
json load_config_file(const std::string& path);

// "a.b=v" -> {"a": {"b": "v"}}
json parse_assignment(const std::string& assignment);

// Recursive merge; scalars in `patch` replace those in `doc`.
void merge_into(json& doc, const json& patch);

struct SweepConfig {
    std::vector<double> p_ladder;
    std::vector<double> omega_ladder;
    std::vector<double> eps_ladder;
    SweepOptions options;
};

// Splits a config document into the problem part and the sweep table; both
// reject unknown keys with the key path.
ProblemSpec problem_from_config(const json& doc, const ProblemSpec& base);
SweepConfig sweep_from_config(const json& doc, const SweepConfig& base);
json to_json(const SweepConfig& s);

std::vector<double> parse_list(const std::string& csv, const std::string& path);

// Set by SIGINT; sweeps and runs stop at the next step.
std::atomic<bool>& cancel_flag();

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace biharm
