#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "exponent_kit/channel.hpp"
#include "exponent_kit/source.hpp"

namespace exponent_kit {

using Problem = std::variant<ChannelProblem, SourceProblem>;

// JSON schema:
//   {"type": "channel", "matrix": [[...],...], "cost": [...]}        cost optional
//   {"type": "source",  "matrix": [[P_X...]], "distortion": [[...],...]}
// Rows whose sum deviates from 1 by more than 1e-9 are rejected; smaller
// drift is renormalized. strict makes the missing-zero-distortion warning an
// error.
Problem parse_problem(const nlohmann::json& j, bool strict = false);
Problem parse_problem_file(const std::string& path, bool strict = false);

nlohmann::json emit_problem(const Problem& p);

} // namespace exponent_kit
