#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <thread>

#include "kgeval/error.hpp"
#include "kgeval/exact_metrics.hpp"
#include "kgeval/fg_instance.hpp"
#include "kgeval/reward_service.hpp"
#include "kgeval/subprocess_scorer.hpp"
#include "line_client.hpp"
#include "oracles.hpp"

using namespace kgeval;
using nlohmann::json;

namespace {

json request(const json& id, const std::vector<std::string>& targets, const std::vector<std::string>& predictions,
             const std::string& kind) {
  return json{{"id", id}, {"targets", targets}, {"predictions", predictions}, {"reward_kind", kind}};
}

json answer(const RewardService& service, const json& req) {
  return json::parse(encode_response(service.handle_line(req.dump())));
}

class DownScorer : public PairScorer {
 public:
  std::vector<double> score_pairs(std::span<const TextPair>) override { throw ScorerUnavailable("model offline"); }
};

}  // namespace

TEST(RewardService, ServeExamples) {
  const RewardService service;
  const auto a = answer(service, request("a", {"natural language processing"}, {"natural language generation"}, "fg"));
  EXPECT_EQ(a["id"], "a");
  EXPECT_NEAR(a["reward"].get<double>(), 2.0 / 3.0, 1e-12);
  ASSERT_EQ(a["per_phrase"].size(), 1u);
  EXPECT_EQ(a["per_phrase"][0]["target"], "natural language processing");
  EXPECT_FALSE(a.contains("error"));

  const auto b = answer(service, request("b", {"x"}, {"x"}, "f1m"));
  EXPECT_DOUBLE_EQ(b["reward"].get<double>(), 1.0);

  const auto c = answer(service, request("c", {}, {"x"}, "fg"));
  EXPECT_EQ(c["id"], "c");
  EXPECT_EQ(c["error"], "empty targets");
  EXPECT_FALSE(c.contains("reward"));
}

TEST(RewardService, RequestErrors) {
  const RewardService service;
  EXPECT_EQ(answer(service, request("k", {"x"}, {"x"}, "bleu"))["error"], "unknown reward_kind 'bleu'");
  EXPECT_EQ(answer(service, json{{"id", 1}, {"targets", {"x"}}, {"predictions", {"x"}}})["error"],
            "missing 'reward_kind'");
  EXPECT_EQ(answer(service, json{{"id", 2}, {"targets", "x"}, {"predictions", {"x"}}, {"reward_kind", "fg"}})["id"], 2);
  EXPECT_EQ(answer(service, json::array({1, 2}))["error"], "request must be a JSON object");
  const auto bad = json::parse(encode_response(service.handle_line("{nope")));
  EXPECT_TRUE(bad["id"].is_null());
  EXPECT_NE(bad["error"].get<std::string>().find("malformed JSON"), std::string::npos);
  EXPECT_EQ(answer(service, request("ws", {"  ", "!"}, {"x"}, "fg"))["error"], "empty targets");
}

TEST(RewardService, IdEchoedVerbatim) {
  const RewardService service;
  const json id = {{"batch", 3}, {"row", 9}};
  EXPECT_EQ(answer(service, request(id, {"x"}, {"x"}, "fg"))["id"], id);
  EXPECT_EQ(answer(service, request(12.5, {"x"}, {"x"}, "fg"))["id"], 12.5);
}

TEST(RewardService, F1KindsDedupAndPad) {
  const RewardService service;
  const auto r = answer(service, request("d", {"graph search", "tree", "model"}, {"Graph Search", "graph search", "tree"},
                                         "f15"));
  // dedup leaves two correct predictions: P = 2/5, R = 2/3
  EXPECT_NEAR(r["reward"].get<double>(), 0.5, 1e-12);
  EXPECT_EQ(r["per_phrase"].size(), 2u);
  const auto m = answer(service, request("e", {"graph search", "tree", "model"}, {"graph search", "tree"}, "f1m"));
  EXPECT_NEAR(m["reward"].get<double>(), 0.8, 1e-12);
}

TEST(RewardService, FbNeedsScorer) {
  const RewardService service;
  const auto r = answer(service, request("f", {"x"}, {"x"}, "fb"));
  EXPECT_NE(r["error"].get<std::string>().find("external scorer"), std::string::npos);

  DownScorer down;
  const RewardService broken({}, &down);
  const auto e = answer(broken, request("g", {"x"}, {"x"}, "fb"));
  EXPECT_NE(e["error"].get<std::string>().find("model offline"), std::string::npos);
}

TEST(RewardService, FbWithMirroredScorerEqualsFg) {
  CombinedPairScorer mirror;
  const RewardService service({}, &mirror);
  std::mt19937 rng(31);
  const auto vocab = oracle::fuzz_vocab(16);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> ys, ps;
    for (int k = 1 + i % 5; k > 0; --k) ys.push_back(oracle::random_phrase_text(rng, vocab, 3));
    for (int k = i % 7; k > 0; --k) ps.push_back(oracle::random_phrase_text(rng, vocab, 3));
    const auto fg = answer(service, request(i, ys, ps, "fg"));
    const auto fb = answer(service, request(i, ys, ps, "fb"));
    EXPECT_EQ(fg["reward"], fb["reward"]);
    EXPECT_EQ(fg["per_phrase"], fb["per_phrase"]);
  }
}

TEST(RewardService, MatchesLibraryCalls) {
  const RewardService service;
  std::mt19937 rng(13);
  const auto vocab = oracle::fuzz_vocab(16);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> ys, ps;
    for (int k = 1 + i % 6; k > 0; --k) ys.push_back(oracle::random_phrase_text(rng, vocab, 3));
    for (int k = i % 9; k > 0; --k) ps.push_back(oracle::random_phrase_text(rng, vocab, 3));
    std::vector<Phrase> Y, P;
    for (const auto& y : ys) Y.push_back(normalize_phrase(y));
    for (const auto& p : ps) P.push_back(normalize_phrase(p));
    const auto deduped = dedup(P);
    EXPECT_NEAR(answer(service, request(i, ys, ps, "fg"))["reward"].get<double>(),
                fg_score(P, Y, score_list(P, Y)).fg, 1e-9);
    EXPECT_NEAR(answer(service, request(i, ys, ps, "f1m"))["reward"].get<double>(), f1_at_m(deduped, Y).f1, 1e-9);
    EXPECT_NEAR(answer(service, request(i, ys, ps, "f15"))["reward"].get<double>(), f1_at_5(deduped, Y).f1, 1e-9);
  }
}

TEST(RewardService, BatchReward) {
  const RewardService service;
  EXPECT_TRUE(service.batch_reward({}).empty());
  std::vector<json> wire = {
      request("a", {"natural language processing"}, {"natural language generation"}, "fg"),
      request("b", {"x"}, {"x"}, "f1m"),
      request("c", {}, {"x"}, "fg"),
      request("d", {"graph search", "tree"}, {"graph search"}, "f15"),
  };
  std::vector<RewardRequest> reqs;
  for (const auto& w : wire) reqs.push_back(parse_request(w));
  const auto batch = service.batch_reward(reqs);
  ASSERT_EQ(batch.size(), wire.size());
  for (std::size_t i = 0; i < wire.size(); ++i) {
    EXPECT_EQ(batch[i].to_json(), answer(service, wire[i])) << i;
  }
}

TEST(RewardService, StreamKeepsOrderAndSurvivesGarbage) {
  const RewardService service;
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> byte(0, 255);
  std::string input;
  std::vector<int> valid_ids;
  std::size_t lines = 0;
  for (int i = 0; i < 300; ++i) {
    if (i % 3 == 0) {
      input += request(i, {"graph search"}, {"graph"}, "fg").dump() + "\n";
      valid_ids.push_back(i);
    } else {
      std::string junk;
      for (int k = 0; k < 40; ++k) {
        char c = static_cast<char>(byte(rng));
        junk.push_back(c == '\n' ? ' ' : c);
      }
      input += "x" + junk + "\n";
    }
    ++lines;
  }
  input += "\n   \n";  // blank lines get no answer
  std::istringstream in(input);
  std::ostringstream out;
  service.serve_stream(in, out);

  std::istringstream responses(out.str());
  std::string resp;
  std::size_t count = 0;
  std::size_t next_valid = 0;
  while (std::getline(responses, resp)) {
    const auto j = json::parse(resp);
    if (count % 3 == 0) {
      EXPECT_EQ(j["id"], valid_ids[next_valid++]);
      EXPECT_TRUE(j.contains("reward"));
    } else {
      EXPECT_TRUE(j.contains("error"));
    }
    ++count;
  }
  EXPECT_EQ(count, lines);
}

TEST(TcpRewardServer, ConcurrentConnectionsKeepOrder) {
  const RewardService service;
  TcpRewardServer server(service, "127.0.0.1", 0);
  ASSERT_NE(server.port(), 0);
  std::thread runner([&] { server.run(); });

  auto client_job = [&](int offset) {
    kgeval::testing::TcpLineClient client(server.port());
    for (int i = 0; i < 50; ++i) client.send_line(request(offset + i, {"graph search"}, {"graph"}, "fg").dump());
    client.send_line("not json");
    for (int i = 0; i < 50; ++i) {
      const auto line = client.read_line();
      ASSERT_TRUE(line);
      EXPECT_EQ(json::parse(*line)["id"], offset + i);
    }
    const auto err = client.read_line();
    ASSERT_TRUE(err);
    EXPECT_TRUE(json::parse(*err).contains("error"));
  };
  std::thread c1(client_job, 0), c2(client_job, 1000), c3(client_job, 2000);
  c1.join();
  c2.join();
  c3.join();

  // An unterminated final line is still answered once the client closes.
  {
    kgeval::testing::TcpLineClient client(server.port());
    client.send_raw(request("tail", {"x"}, {"x"}, "f1m").dump());
    client.finish_writing();
    const auto line = client.read_line();
    ASSERT_TRUE(line);
    EXPECT_EQ(json::parse(*line)["id"], "tail");
  }
  server.stop();
  runner.join();
}
