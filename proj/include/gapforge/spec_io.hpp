#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "gapforge/benchmark.hpp"
#include "gapforge/imputers.hpp"
#include "gapforge/learners.hpp"
#include "gapforge/missingness.hpp"
#include "gapforge/synthetic.hpp"

namespace gapforge {

// JSON documents for every spec type. Parsing rejects unknown fields and
// reports problems as SpecError with a dotted field path such as
// "imputers[3].learner.n_trees". `default_seed` is used when the document has
// no seed of its own.

MissingnessSpec parse_missingness_spec(std::string_view json,
                                       std::optional<std::uint64_t> default_seed = std::nullopt);
ImputerSpec parse_imputer_spec(std::string_view json);
LearnerSpec parse_learner_spec(std::string_view json);
BenchmarkPlan parse_benchmark_plan(std::string_view json,
                                   std::optional<std::uint64_t> default_seed = std::nullopt);
SyntheticSpec parse_synthetic_spec(std::string_view json,
                                   std::optional<std::uint64_t> default_seed = std::nullopt);

std::string to_json(const MissingnessSpec& spec);
std::string to_json(const ImputerSpec& spec);
std::string to_json(const LearnerSpec& spec);
std::string to_json(const BenchmarkPlan& plan);
std::string to_json(const SyntheticSpec& spec);

}  // namespace gapforge
