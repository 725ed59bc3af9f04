#include <gtest/gtest.h>

#include <random>

#include "kgeval/exact_metrics.hpp"
#include "oracles.hpp"

using namespace kgeval;

namespace {

std::vector<Phrase> phrases(std::initializer_list<const char*> raw) {
  std::vector<Phrase> out;
  for (const char* r : raw) out.push_back(normalize_phrase(r));
  return out;
}

std::vector<std::string> texts(const std::vector<Phrase>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(p.text());
  return out;
}

}  // namespace

TEST(Dedup, Examples) {
  EXPECT_EQ(texts(dedup(phrases({"a b", "a b", "c"}))), (std::vector<std::string>{"a b", "c"}));
  EXPECT_EQ(texts(dedup(phrases({"Processing", "processed"}))), std::vector<std::string>{"processing"});
  EXPECT_TRUE(dedup(std::vector<Phrase>{}).empty());
  EXPECT_EQ(texts(dedup(phrases({"b a", "a b"}))), (std::vector<std::string>{"b a", "a b"}));
}

TEST(F1AtK, TwoCorrectOfThreeTargets) {
  const auto Y = phrases({"graph search", "neural network", "topic model"});
  const auto P = phrases({"neural networks", "graph search"});
  const auto r = f1_at_5(P, Y);
  EXPECT_DOUBLE_EQ(r.precision, 0.4);
  EXPECT_NEAR(r.recall, 2.0 / 3.0, 1e-15);
  const double expected = 2 * 0.4 * (2.0 / 3.0) / (0.4 + 2.0 / 3.0);
  EXPECT_NEAR(r.f1, expected, 1e-12);
  EXPECT_NEAR(r.f1, 0.5, 1e-12);
}

TEST(F1AtK, AllAndNone) {
  const auto Y = phrases({"a", "b", "c", "d", "e"});
  EXPECT_DOUBLE_EQ(f1_at_5(Y, Y).f1, 1.0);
  EXPECT_DOUBLE_EQ(f1_at_5(phrases({"x", "y"}), Y).f1, 0.0);
  EXPECT_DOUBLE_EQ(f1_at_5({}, Y).f1, 0.0);
}

TEST(F1AtK, TruncatesToFirstFive) {
  const auto Y = phrases({"f"});
  EXPECT_DOUBLE_EQ(f1_at_5(phrases({"a", "b", "c", "d", "e", "f"}), Y).f1, 0.0);
  EXPECT_DOUBLE_EQ(f1_at_5(phrases({"f", "a", "b", "c", "d", "e"}), Y).recall, 1.0);
  EXPECT_DOUBLE_EQ(f1_at_k(phrases({"a", "f"}), Y, 1).f1, 0.0);
}

TEST(F1AtM, Examples) {
  const auto Y = phrases({"graph search", "neural network", "topic model"});
  const auto r = f1_at_m(phrases({"neural network", "graph search"}), Y);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_NEAR(r.f1, 2 * 1.0 * (2.0 / 3.0) / (1.0 + 2.0 / 3.0), 1e-12);
  EXPECT_NEAR(r.f1, 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(f1_at_m(Y, Y).f1, 1.0);
  EXPECT_DOUBLE_EQ(f1_at_m({}, Y).f1, 0.0);
}

TEST(MatchExact, EachTargetCreditedOnce) {
  const auto Y = phrases({"graph"});
  const auto m = match_exact(phrases({"graph", "graphs"}), Y);
  EXPECT_EQ(m.flags, (std::vector<bool>{true, false}));
  EXPECT_EQ(m.true_positives(), 1u);
  EXPECT_EQ(m.matched_targets[0], std::optional<std::size_t>(0));
  EXPECT_FALSE(m.matched_targets[1]);
}

TEST(MatchExact, GreedyEqualsMaximumMatching) {
  std::mt19937 rng(8);
  const auto vocab = oracle::fuzz_vocab(4);
  for (int trial = 0; trial < 2000; ++trial) {
    auto inst = oracle::random_instance(rng, vocab, 5, 6);
    std::vector<std::vector<std::string>> ps, ys;
    for (const auto& p : inst.predictions) ps.push_back(p.stems());
    for (const auto& y : inst.targets) ys.push_back(y.stems());
    std::vector<bool> used(ys.size(), false);
    EXPECT_EQ(match_exact(inst.predictions, inst.targets).true_positives(),
              oracle::max_exact_matching(ps, ys, 0, used));
  }
}

TEST(MatchExact, PaddingNeverChangesMatches) {
  std::mt19937 rng(9);
  const auto vocab = oracle::fuzz_vocab(8);
  for (int trial = 0; trial < 1000; ++trial) {
    auto inst = oracle::random_instance(rng, vocab, 8, 5);
    const auto plain = match_exact(inst.predictions, inst.targets);
    std::vector<std::optional<Phrase>> slots(inst.predictions.begin(), inst.predictions.end());
    slots.resize(5);
    const auto padded = match_exact(std::span<const std::optional<Phrase>>(slots), inst.targets);
    EXPECT_EQ(padded.true_positives(), plain.true_positives());
    for (std::size_t i = 0; i < plain.flags.size(); ++i) EXPECT_EQ(padded.flags[i], plain.flags[i]);
  }
}

TEST(F1AtK, EqualsF1AtMWithExactlyFivePredictions) {
  std::mt19937 rng(10);
  const auto vocab = oracle::fuzz_vocab(10);
  int checked = 0;
  while (checked < 300) {
    auto inst = oracle::random_instance(rng, vocab, 8, 12);
    auto P = dedup(inst.predictions);
    if (P.size() < 5) continue;
    P.resize(5);
    const auto a = f1_at_5(P, inst.targets);
    const auto b = f1_at_m(P, inst.targets);
    EXPECT_EQ(a.f1, b.f1);
    ++checked;
  }
}

TEST(TokenCorpusPrf, Examples) {
  const auto Y = phrases({"natural language processing"});
  const auto same = token_corpus_prf(Y, Y);
  EXPECT_DOUBLE_EQ(same.f1, 1.0);
  const auto partial = token_corpus_prf(phrases({"natural language"}), Y);
  EXPECT_DOUBLE_EQ(partial.precision, 1.0);
  EXPECT_NEAR(partial.recall, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(partial.f1, 0.8, 1e-12);
  const auto disjoint = token_corpus_prf(phrases({"apple tree"}), Y);
  EXPECT_DOUBLE_EQ(disjoint.precision, 0.0);
  EXPECT_DOUBLE_EQ(disjoint.recall, 0.0);
  EXPECT_DOUBLE_EQ(disjoint.f1, 0.0);
}

TEST(SplitPresentAbsent, Examples) {
  const Document doc = normalize_document("Fast processing systems for natural text and language models.");
  const auto Y = phrases({"processing systems", "natural language", "language models"});
  const auto P = phrases({"processed systems", "natural language", "text"});
  const auto parts = split_present_absent(Y, P, doc);
  EXPECT_EQ(texts(parts.present.targets), (std::vector<std::string>{"processing systems", "language models"}));
  EXPECT_EQ(texts(parts.absent.targets), std::vector<std::string>{"natural language"});
  EXPECT_EQ(texts(parts.present.predictions), (std::vector<std::string>{"processed systems", "text"}));
  EXPECT_EQ(texts(parts.absent.predictions), std::vector<std::string>{"natural language"});

  const auto all_present = split_present_absent(phrases({"fast processing"}), {}, doc);
  EXPECT_TRUE(all_present.absent.targets.empty());
}

TEST(SplitPresentAbsent, PartitionsAreDisjointAndComplete) {
  std::mt19937 rng(12);
  const auto vocab = oracle::fuzz_vocab(8);
  for (int trial = 0; trial < 500; ++trial) {
    auto inst = oracle::random_instance(rng, vocab);
    std::string doc_text;
    for (int i = 0; i < 15; ++i) doc_text += oracle::random_phrase_text(rng, vocab, 1) + " ";
    const Document doc = normalize_document(doc_text);
    const auto parts = split_present_absent(inst.targets, inst.predictions, doc);
    EXPECT_EQ(parts.present.targets.size() + parts.absent.targets.size(), inst.targets.size());
    EXPECT_EQ(parts.present.predictions.size() + parts.absent.predictions.size(), inst.predictions.size());
    for (const auto& y : parts.present.targets) EXPECT_TRUE(is_present(y, doc));
    for (const auto& y : parts.absent.targets) EXPECT_FALSE(is_present(y, doc));
  }
}
