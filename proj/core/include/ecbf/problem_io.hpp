#pragma once

#include <string>

#include "ecbf/model.hpp"

namespace ecbf {

/// Builds a ProblemSpec from a JSON document with keys
///   dynamics {type, params}, barrier {type, params}, alpha {type, k},
///   limits {A, b} (or {lower, upper}), u_des, domain {min, max}, p_s.
/// Only structural problems throw (Error with kConfigError); semantic checks
/// are left to validate_spec.
ProblemSpec parse_problem(const std::string& json_text);
ProblemSpec load_problem(const std::string& path);

}  // namespace ecbf
