#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgeval/phrase_sim.hpp"
#include "kgeval/text_norm.hpp"

namespace kgeval {

enum class RewardKind { fg, fb, f1m, f15 };

std::optional<RewardKind> parse_reward_kind(const std::string& name);
std::string to_string(RewardKind kind);

struct RewardRequest {
  nlohmann::json id;  // echoed verbatim
  std::vector<std::string> targets;
  std::vector<std::string> predictions;
  RewardKind kind = RewardKind::fg;
};

struct PhraseReward {
  std::string prediction;
  std::optional<std::string> target;
  double score = 0.0;
  bool zeroed = false;
};

struct RewardResponse {
  nlohmann::json id;
  std::optional<double> reward;
  std::vector<PhraseReward> per_phrase;
  std::optional<std::string> error;

  nlohmann::json to_json() const;
};

// Computes rewards for the trainer-facing protocol. fg and fb run the
// repetition and quantity penalties over the internal or external score
// list; f1m and f15 deduplicate predictions first and f15 pads to five.
// Safe to share across threads; the external scorer serializes itself.
class RewardService {
 public:
  explicit RewardService(NormalizeOptions options = {}, PairScorer* scorer = nullptr)
      : options_(options), scorer_(scorer) {}

  RewardResponse compute(const RewardRequest& request) const;

  // Parses one wire line and answers it; malformed input yields an error
  // response, never an exception.
  RewardResponse handle_line(const std::string& line) const;

  std::vector<RewardResponse> batch_reward(const std::vector<RewardRequest>& requests) const;

  // Reads requests from in until EOF, answering each line in order.
  // Whitespace-only lines are skipped.
  void serve_stream(std::istream& in, std::ostream& out) const;

 private:
  NormalizeOptions options_;
  PairScorer* scorer_;
};

// Encodes a response as one wire line (no terminator).
std::string encode_response(const RewardResponse& response);

// Parses a wire request. Throws std::invalid_argument with the error text
// the service reports.
RewardRequest parse_request(const nlohmann::json& value);

// Line-protocol TCP server: one thread per connection, requests on a
// connection answered in order.
class TcpRewardServer {
 public:
  // Binds immediately; port 0 picks a free port.
  TcpRewardServer(const RewardService& service, const std::string& host, std::uint16_t port);
  ~TcpRewardServer();

  TcpRewardServer(const TcpRewardServer&) = delete;
  TcpRewardServer& operator=(const TcpRewardServer&) = delete;

  std::uint16_t port() const { return port_; }

  // Accepts connections until stop(). Waits for open connections to finish.
  void run();
  void stop();

 private:
  const RewardService& service_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
};

}  // namespace kgeval
