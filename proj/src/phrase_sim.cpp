#include "kgeval/phrase_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "kgeval/error.hpp"

namespace kgeval {

std::size_t edit_distance(std::span<const std::string> p, std::span<const std::string> y) {
  // Rolling row over y: row[m] holds D(k, m) for the current prefix length k.
  std::vector<std::size_t> row(y.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t k = 1; k <= p.size(); ++k) {
    std::size_t diag = row[0];
    row[0] = k;
    for (std::size_t m = 1; m <= y.size(); ++m) {
      const std::size_t up = row[m];
      const std::size_t substitution = diag + (p[k - 1] == y[m - 1] ? 0 : 1);
      row[m] = std::min({substitution, row[m - 1] + 1, up + 1});
      diag = up;
    }
  }
  return row[y.size()];
}

std::size_t edit_distance(const Phrase& p, const Phrase& y) {
  return edit_distance(std::span<const std::string>(p.stems()), std::span<const std::string>(y.stems()));
}

double ed_score(const Phrase& p, const Phrase& y) {
  const std::size_t longest = std::max(p.length(), y.length());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(p, y)) / static_cast<double>(longest);
}

double token_f1(const Phrase& p, const Phrase& y) {
  if (p.length() == 0 || y.length() == 0) return 0.0;
  std::unordered_map<std::string_view, std::size_t> remaining;
  for (const auto& s : y.stems()) ++remaining[s];
  std::size_t overlap = 0;
  for (const auto& s : p.stems()) {
    auto it = remaining.find(s);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(p.length());
  const double recall = static_cast<double>(overlap) / static_cast<double>(y.length());
  return 2.0 * precision * recall / (precision + recall);
}

PairScore pair_score(const Phrase& p, const Phrase& y) {
  PairScore s;
  s.raw_distance = edit_distance(p, y);
  const std::size_t longest = std::max(p.length(), y.length());
  s.ed = longest == 0 ? 1.0 : 1.0 - static_cast<double>(s.raw_distance) / static_cast<double>(longest);
  s.token_f1 = token_f1(p, y);
  s.combined = (s.ed + s.token_f1) / 2.0;
  return s;
}

ScoreList score_list(std::span<const Phrase> predictions, std::span<const Phrase> targets) {
  ScoreList out;
  out.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    ScoreEntry best{i, 0, -1.0};
    for (std::size_t j = 0; j < targets.size(); ++j) {
      const double s = pair_score(predictions[i], targets[j]).combined;
      if (s > best.score) {
        best.target = j;
        best.score = s;
      }
    }
    if (best.score < 0.0) best.score = 0.0;
    out.push_back(best);
  }
  return out;
}

ScoreList score_list_external(std::span<const Phrase> predictions, std::span<const Phrase> targets,
                              PairScorer& scorer) {
  ScoreList out;
  if (predictions.empty()) return out;
  std::vector<std::string> target_texts;
  target_texts.reserve(targets.size());
  for (const auto& y : targets) target_texts.push_back(y.text());

  std::vector<TextPair> pairs;
  pairs.reserve(predictions.size() * targets.size());
  for (const auto& p : predictions) {
    const std::string ptext = p.text();
    for (const auto& ytext : target_texts) pairs.emplace_back(ptext, ytext);
  }
  const std::vector<double> scores = scorer.score_pairs(pairs);
  if (scores.size() != pairs.size()) {
    throw ScorerUnavailable("scorer returned " + std::to_string(scores.size()) + " scores for " +
                            std::to_string(pairs.size()) + " pairs");
  }
  for (double s : scores) {
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
      throw ScorerUnavailable("scorer returned out-of-range score " + std::to_string(s));
    }
  }

  out.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    ScoreEntry best{i, 0, -1.0};
    for (std::size_t j = 0; j < targets.size(); ++j) {
      const double s = scores[i * targets.size() + j];
      if (s > best.score) {
        best.target = j;
        best.score = s;
      }
    }
    if (best.score < 0.0) best.score = 0.0;
    out.push_back(best);
  }
  return out;
}

std::vector<double> CombinedPairScorer::score_pairs(std::span<const TextPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [ptext, ytext] : pairs) {
    const auto p = tokenize(ptext, options_);
    const auto y = tokenize(ytext, options_);
    if (p.empty() || y.empty()) {
      out.push_back(0.0);
      continue;
    }
    out.push_back(pair_score(Phrase(p), Phrase(y)).combined);
  }
  return out;
}

}  // namespace kgeval
