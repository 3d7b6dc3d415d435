#pragma once

#include <string>

#include "json.hpp"

#include "branchbayes/branching.hpp"
#include "branchbayes/hitting.hpp"
#include "branchbayes/montecarlo.hpp"
#include "branchbayes/posterior.hpp"

namespace branchbayes {

nlohmann::json to_json(const DiscreteDist& dist);
nlohmann::json to_json(const JointPosterior& post);
nlohmann::json to_json(const HittingDist& hd);
nlohmann::json to_json(const ExperimentReport& rep);
nlohmann::json to_json(const Path& path);

// Path input: a JSON array of positive integers, or text with one positive
// integer per line (blank lines and lines starting with '#' are skipped).
// Malformed input raises invalid_argument naming the offending line.
Path parse_path_text(const std::string& text);

}  // namespace branchbayes
