#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgeval/text_norm.hpp"

namespace kgeval {

struct PairScore {
  double ed = 0.0;        // 1 - distance / max(|p|, |y|)
  double token_f1 = 0.0;  // multiset token F1 over stems
  double combined = 0.0;  // (ed + token_f1) / 2
  std::size_t raw_distance = 0;
};

struct ScoreEntry {
  std::size_t prediction = 0;
  std::size_t target = 0;  // smallest target index attaining the max
  double score = 0.0;

  bool operator==(const ScoreEntry&) const = default;
};

// One entry per prediction, in prediction order.
using ScoreList = std::vector<ScoreEntry>;

// Token-level Levenshtein distance between stem sequences.
std::size_t edit_distance(const Phrase& p, const Phrase& y);
std::size_t edit_distance(std::span<const std::string> p, std::span<const std::string> y);

double ed_score(const Phrase& p, const Phrase& y);
double token_f1(const Phrase& p, const Phrase& y);
PairScore pair_score(const Phrase& p, const Phrase& y);

// Per prediction, the best combined pair score over all targets.
// Targets must be non-empty.
ScoreList score_list(std::span<const Phrase> predictions, std::span<const Phrase> targets);

// (prediction text, target text), in that order.
using TextPair = std::pair<std::string, std::string>;

// A continuous similarity model living outside the process (or standing in
// for one). Implementations return one score in [0,1] per pair and signal
// failure with ScorerUnavailable.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual std::vector<double> score_pairs(std::span<const TextPair> pairs) = 0;
};

// Same shape as score_list, with similarities taken from the scorer. All
// |P| x |Y| pairs are sent as one batch. Throws ScorerUnavailable on scorer
// failure, arity mismatch or out-of-range scores.
ScoreList score_list_external(std::span<const Phrase> predictions, std::span<const Phrase> targets,
                              PairScorer& scorer);

// Scores pairs with pair_score().combined after normalizing both texts.
class CombinedPairScorer : public PairScorer {
 public:
  explicit CombinedPairScorer(NormalizeOptions options = {}) : options_(options) {}
  std::vector<double> score_pairs(std::span<const TextPair> pairs) override;

 private:
  NormalizeOptions options_;
};

}  // namespace kgeval
