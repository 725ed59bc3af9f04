#include "kgeval/error.hpp"

namespace kgeval {
namespace {

std::string join_message(const std::vector<std::string>& orphans) {
  std::string msg = "ids present in only one file:";
  for (const auto& id : orphans) msg += " " + id;
  return msg;
}

}  // namespace

JoinError::JoinError(std::vector<std::string> orphans) : Error(join_message(orphans)), orphans_(std::move(orphans)) {}

}  // namespace kgeval
