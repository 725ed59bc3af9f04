#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kgeval {

// Base of every error raised by the toolkit. The CLI maps these to exit
// status 2 ("data error"); anything else escaping is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyPhrase : public Error {
 public:
  EmptyPhrase() : Error("phrase is empty after normalization") {}
};

class ParseError : public Error {
 public:
  ParseError(std::string path, std::size_t line, const std::string& reason)
      : Error(path + ":" + std::to_string(line) + ": " + reason),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class JoinError : public Error {
 public:
  explicit JoinError(std::vector<std::string> orphans);

  const std::vector<std::string>& orphan_ids() const { return orphans_; }

 private:
  std::vector<std::string> orphans_;
};

class MissingDocument : public Error {
 public:
  explicit MissingDocument(const std::string& id)
      : Error("instance '" + id + "' has no document; present/absent split needs one") {}
};

class ScorerUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace kgeval
