#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "gapforge/benchmark.hpp"
#include "gapforge/synthetic.hpp"

namespace gapforge::detail {

using Json = nlohmann::ordered_json;

Json json_value(const MissingnessSpec& spec);
Json json_value(const ImputerSpec& spec);
Json json_value(const LearnerSpec& spec);
Json json_value(const BenchmarkPlan& plan);
Json json_value(const SyntheticSpec& spec);

MissingnessSpec missingness_from_json(const Json& j, const std::string& path,
                                      std::optional<std::uint64_t> default_seed);
ImputerSpec imputer_from_json(const Json& j, const std::string& path);
LearnerSpec learner_from_json(const Json& j, const std::string& path);
BenchmarkPlan plan_from_json(const Json& j, std::optional<std::uint64_t> default_seed);
SyntheticSpec synthetic_from_json(const Json& j, std::optional<std::uint64_t> default_seed);

}  // namespace gapforge::detail
