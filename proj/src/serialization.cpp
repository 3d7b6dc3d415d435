#include "branchbayes/serialization.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace branchbayes {

nlohmann::json to_json(const DiscreteDist& dist) {
  return nlohmann::json{{"support", {dist.lo(), dist.hi()}},
                        {"probs", dist.probs()},
                        {"log_weights", dist.log_weights()}};
}

nlohmann::json to_json(const JointPosterior& post) {
  nlohmann::json x0_probs = nlohmann::json::object();
  for (std::int64_t x0 = post.x0_marginal.lo(); x0 <= post.x0_marginal.hi(); ++x0) {
    x0_probs[std::to_string(x0)] = post.x0_marginal.prob(x0);
  }
  return nlohmann::json{{"x1", post.x1},
                        {"xn", post.xn},
                        {"sn", post.sn},
                        {"x0_probs", std::move(x0_probs)},
                        {"u_mean", post.u_mean},
                        {"u_sd", post.u_sd},
                        {"u_grid", post.u_grid},
                        {"u_density", post.u_marginal_density}};
}

nlohmann::json to_json(const HittingDist& hd) {
  nlohmann::json j = to_json(hd.dist);
  j["hitting_prob"] = hd.hitting_prob;
  return j;
}

nlohmann::json to_json(const ExperimentReport& rep) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [key, value] : rep.params) params[key] = value;
  return nlohmann::json{{"name", rep.name},         {"params", std::move(params)},
                        {"statistic", rep.statistic}, {"threshold", rep.threshold},
                        {"n_samples", rep.n_samples}, {"seed", rep.seed},
                        {"passed", rep.passed}};
}

nlohmann::json to_json(const Path& path) {
  nlohmann::json j = nlohmann::json::array();
  for (std::int64_t v : path.values) j.push_back(v);
  return j;
}

Path parse_path_text(const std::string& text) {
  Path path;
  path.origin_included = false;

  std::size_t first = 0;
  while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
  if (first < text.size() && (text[first] == '[' || text[first] == '{')) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(std::string("path file: invalid JSON: ") + e.what());
    }
    if (j.is_object()) {
      // Accept the simulate output verbatim: the path lives under "path".
      if (!j.contains("path")) {
        throw std::invalid_argument("path file: JSON object has no \"path\" array");
      }
      j = j["path"];
    }
    if (!j.is_array()) throw std::invalid_argument("path file: JSON value is not an array");
    for (const auto& v : j) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        throw std::invalid_argument("path file: JSON array entries must be positive integers");
      }
      path.values.push_back(v.get<std::int64_t>());
    }
    return path;
  }

  std::istringstream in(text);
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    if (line[begin] == '#') continue;
    const std::size_t stop = line.find_last_not_of(" \t\r") + 1;
    const std::string token = line.substr(begin, stop - begin);
    std::int64_t value = 0;
    std::size_t used = 0;
    try {
      value = std::stoll(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || value < 1) {
      throw std::invalid_argument("path file: line " + std::to_string(line_no) +
                                  " is not a positive integer: \"" + token + "\"");
    }
    path.values.push_back(value);
  }
  return path;
}

}  // namespace branchbayes
