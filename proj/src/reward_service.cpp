#include "kgeval/reward_service.hpp"

#include <algorithm>
#include <arpa/inet.h>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <istream>
#include <mutex>
#include <netdb.h>
#include <netinet/in.h>
#include <ostream>
#include <stdexcept>
#include <sys/socket.h>
#include <thread>
#include <unistd.h>

#include "kgeval/error.hpp"
#include "kgeval/exact_metrics.hpp"
#include "kgeval/fg_instance.hpp"

namespace kgeval {

using nlohmann::json;

namespace {

std::vector<std::string> wire_strings(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw std::invalid_argument(std::string("missing '") + field + "'");
  if (!it->is_array()) throw std::invalid_argument(std::string("'") + field + "' must be an array of strings");
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_string()) throw std::invalid_argument(std::string("'") + field + "' must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<Phrase> normalize_texts(const std::vector<std::string>& texts, const NormalizeOptions& options) {
  std::vector<Phrase> out;
  for (const auto& t : texts) {
    auto tokens = tokenize(t, options);
    if (!tokens.empty()) out.emplace_back(std::move(tokens));
  }
  return out;
}

RewardResponse error_response(json id, std::string message) {
  RewardResponse r;
  r.id = std::move(id);
  r.error = std::move(message);
  return r;
}

}  // namespace

std::optional<RewardKind> parse_reward_kind(const std::string& name) {
  for (RewardKind k : {RewardKind::fg, RewardKind::fb, RewardKind::f1m, RewardKind::f15}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::fg: return "fg";
    case RewardKind::fb: return "fb";
    case RewardKind::f1m: return "f1m";
    case RewardKind::f15: return "f15";
  }
  return "?";
}

json RewardResponse::to_json() const {
  json out;
  out["id"] = id;
  if (error) {
    out["error"] = *error;
    return out;
  }
  out["reward"] = reward.value_or(0.0);
  json phrases = json::array();
  for (const auto& p : per_phrase) {
    phrases.push_back({{"prediction", p.prediction},
                       {"target", p.target ? json(*p.target) : json(nullptr)},
                       {"score", p.score},
                       {"zeroed", p.zeroed}});
  }
  out["per_phrase"] = std::move(phrases);
  return out;
}

std::string encode_response(const RewardResponse& response) {
  return response.to_json().dump(-1, ' ', false, json::error_handler_t::replace);
}

RewardRequest parse_request(const json& value) {
  if (!value.is_object()) throw std::invalid_argument("request must be a JSON object");
  RewardRequest req;
  if (auto id = value.find("id"); id != value.end()) req.id = *id;
  req.targets = wire_strings(value, "targets");
  req.predictions = wire_strings(value, "predictions");
  auto kind = value.find("reward_kind");
  if (kind == value.end()) throw std::invalid_argument("missing 'reward_kind'");
  if (!kind->is_string()) throw std::invalid_argument("'reward_kind' must be a string");
  const auto parsed = parse_reward_kind(kind->get<std::string>());
  if (!parsed) throw std::invalid_argument("unknown reward_kind '" + kind->get<std::string>() + "'");
  req.kind = *parsed;
  return req;
}

RewardResponse RewardService::compute(const RewardRequest& request) const {
  const auto targets = normalize_texts(request.targets, options_);
  if (targets.empty()) return error_response(request.id, "empty targets");
  const auto predictions = normalize_texts(request.predictions, options_);

  RewardResponse resp;
  resp.id = request.id;
  switch (request.kind) {
    case RewardKind::fg:
    case RewardKind::fb: {
      ScoreList scores;
      if (request.kind == RewardKind::fg) {
        scores = score_list(predictions, targets);
      } else {
        if (!scorer_) return error_response(request.id, "reward_kind 'fb' needs an external scorer (--scorer-cmd)");
        try {
          scores = score_list_external(predictions, targets, *scorer_);
        } catch (const ScorerUnavailable& e) {
          return error_response(request.id, std::string("scorer unavailable: ") + e.what());
        }
      }
      const auto inst = fg_score(predictions, targets, scores);
      resp.reward = inst.fg;
      for (const auto& e : scores) {
        const bool zeroed = std::binary_search(inst.zeroed.begin(), inst.zeroed.end(), e.prediction);
        resp.per_phrase.push_back({predictions[e.prediction].text(), targets[e.target].text(), e.score, zeroed});
      }
      break;
    }
    case RewardKind::f1m:
    case RewardKind::f15: {
      auto preds = dedup(predictions);
      if (request.kind == RewardKind::f15) {
        resp.reward = f1_at_5(preds, targets).f1;
        if (preds.size() > 5) preds.resize(5);
      } else {
        resp.reward = f1_at_m(preds, targets).f1;
      }
      const auto match = match_exact(preds, targets);
      for (std::size_t i = 0; i < preds.size(); ++i) {
        PhraseReward pr{preds[i].text(), std::nullopt, match.flags[i] ? 1.0 : 0.0, false};
        if (match.matched_targets[i]) pr.target = targets[*match.matched_targets[i]].text();
        resp.per_phrase.push_back(std::move(pr));
      }
      break;
    }
  }
  return resp;
}

RewardResponse RewardService::handle_line(const std::string& line) const {
  json value;
  try {
    value = json::parse(line);
  } catch (const json::exception& e) {
    return error_response(nullptr, std::string("malformed JSON: ") + e.what());
  }
  json id = value.is_object() && value.contains("id") ? value["id"] : json(nullptr);
  try {
    return compute(parse_request(value));
  } catch (const std::invalid_argument& e) {
    return error_response(std::move(id), e.what());
  } catch (const std::exception& e) {
    return error_response(std::move(id), std::string("internal error: ") + e.what());
  }
}

std::vector<RewardResponse> RewardService::batch_reward(const std::vector<RewardRequest>& requests) const {
  std::vector<RewardResponse> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    try {
      out.push_back(compute(r));
    } catch (const std::exception& e) {
      out.push_back(error_response(r.id, std::string("internal error: ") + e.what()));
    }
  }
  return out;
}

namespace {

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

void RewardService::serve_stream(std::istream& in, std::ostream& out) const {
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    out << encode_response(handle_line(line)) << '\n';
    out.flush();
  }
}

// --- TCP ---------------------------------------------------------------

namespace {

bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

void serve_connection(const RewardService& service, int fd) {
  std::string buffer;
  char chunk[8192];
  while (true) {
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (auto nl = buffer.find('\n', start); nl != std::string::npos; nl = buffer.find('\n', start)) {
      std::string line = buffer.substr(start, nl - start);
      start = nl + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (blank(line)) continue;
      if (!send_all(fd, encode_response(service.handle_line(line)) + "\n")) return;
    }
    buffer.erase(0, start);
  }
  // A final unterminated line still gets an answer.
  if (!blank(buffer)) send_all(fd, encode_response(service.handle_line(buffer)) + "\n");
}

}  // namespace

TcpRewardServer::TcpRewardServer(const RewardService& service, const std::string& host, std::uint16_t port)
    : service_(service) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* found = nullptr;
  const std::string service_name = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service_name.c_str(), &hints, &found);
      rc != 0) {
    throw Error("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  for (addrinfo* ai = found; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      listen_fd_ = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(found);
  if (listen_fd_ < 0) throw Error("cannot listen on " + host + ":" + service_name + ": " + last_error);

  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  if (addr.ss_family == AF_INET) {
    port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  } else {
    port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }
}

TcpRewardServer::~TcpRewardServer() {
  stop();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpRewardServer::run() {
  std::mutex mutex;
  std::vector<int> open_fds;
  std::vector<std::jthread> connections;
  while (!stopping_) {
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;
    }
    if (stopping_) {
      ::close(fd);
      break;
    }
    {
      std::lock_guard lock(mutex);
      open_fds.push_back(fd);
    }
    connections.emplace_back([this, fd, &mutex, &open_fds] {
      serve_connection(service_, fd);
      std::lock_guard lock(mutex);
      open_fds.erase(std::find(open_fds.begin(), open_fds.end(), fd));
      ::close(fd);
    });
  }
  {
    std::lock_guard lock(mutex);
    for (int fd : open_fds) ::shutdown(fd, SHUT_RDWR);
  }
  connections.clear();
}

void TcpRewardServer::stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
}

}  // namespace kgeval
