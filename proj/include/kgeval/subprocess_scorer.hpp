#pragma once

#include <mutex>
#include <string>

#include "kgeval/line_process.hpp"
#include "kgeval/phrase_sim.hpp"

namespace kgeval {

// PairScorer backed by a child process speaking line-delimited JSON:
//   request  {"pairs": [[p, y], ...]}
//   response {"scores": [s, ...]}
// One batch is in flight at a time; concurrent callers queue on a mutex.
class SubprocessPairScorer : public PairScorer {
 public:
  explicit SubprocessPairScorer(const std::string& command);

  std::vector<double> score_pairs(std::span<const TextPair> pairs) override;

 private:
  std::mutex mutex_;
  std::string command_;
  LineProcess process_;
  bool broken_ = false;
};

}  // namespace kgeval
