#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kgeval/phrase_sim.hpp"
#include "kgeval/text_norm.hpp"

namespace kgeval {

// Stem multiset over all target phrases.
struct WordBudget {
  std::map<std::string, std::size_t> counts;

  static WordBudget from_targets(std::span<const Phrase> targets);
};

struct RepetitionResult {
  std::vector<double> adjusted;      // original prediction order
  std::vector<std::size_t> zeroed;   // ascending prediction indices
  std::map<std::string, std::size_t> consumed;  // budgeted stems seen in predictions
};

struct InstanceScore {
  double fg = 0.0;
  double base_mean = 0.0;
  double corr = 0.0;
  std::vector<double> adjusted_scores;
  std::vector<std::size_t> zeroed;
};

// Repetition rate penalty. Predictions are visited by descending score
// (stable, so ties keep prediction order). Every budgeted stem a prediction
// contains is consumed; a prediction whose consumption pushes any stem past
// its budget gets score 0, and its remaining stems are still consumed.
RepetitionResult repetition_penalty(const ScoreList& scores, std::span<const Phrase> predictions,
                                    std::span<const Phrase> targets);

// 1 - (|Y| - |P|)^2 / max(|Y|, |P|)^2; 1.0 when both are zero.
double quantity_coefficient(std::size_t n_targets, std::size_t n_predictions);

// Instance FG score from a score list computed on (predictions, targets).
// Empty predictions score 0 against non-empty targets and 1 against empty
// targets.
InstanceScore fg_score(std::span<const Phrase> predictions, std::span<const Phrase> targets,
                       const ScoreList& scores);

}  // namespace kgeval
