#include "kgeval/subprocess_scorer.hpp"

#include "json.hpp"
#include "kgeval/error.hpp"

namespace kgeval {

using nlohmann::json;

SubprocessPairScorer::SubprocessPairScorer(const std::string& command) : command_(command), process_(command) {}

std::vector<double> SubprocessPairScorer::score_pairs(std::span<const TextPair> pairs) {
  if (pairs.empty()) return {};
  std::lock_guard lock(mutex_);
  if (broken_) throw ScorerUnavailable("scorer '" + command_ + "' is no longer usable");

  json request;
  json& arr = request["pairs"] = json::array();
  for (const auto& [p, y] : pairs) arr.push_back(json::array({p, y}));

  if (!process_.write_line(request.dump(-1, ' ', false, json::error_handler_t::replace))) {
    broken_ = true;
    throw ScorerUnavailable("scorer '" + command_ + "' closed its input");
  }
  const auto line = process_.read_line();
  if (!line) {
    broken_ = true;
    throw ScorerUnavailable("scorer '" + command_ + "' exited without answering");
  }

  std::vector<double> scores;
  try {
    const json response = json::parse(*line);
    const json& values = response.at("scores");
    if (!values.is_array()) throw ScorerUnavailable("scorer response 'scores' is not an array");
    scores.reserve(values.size());
    for (const auto& v : values) {
      if (!v.is_number()) throw ScorerUnavailable("scorer response holds a non-numeric score");
      scores.push_back(v.get<double>());
    }
  } catch (const json::exception& e) {
    // The stream may be out of sync from here on.
    broken_ = true;
    throw ScorerUnavailable(std::string("bad scorer response: ") + e.what());
  }
  return scores;
}

}  // namespace kgeval
