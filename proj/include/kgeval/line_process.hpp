#pragma once

#include <optional>
#include <string>
#include <sys/types.h>

namespace kgeval {

// A child process run through `/bin/sh -c`, spoken to one line at a time over
// its stdin/stdout. stderr is inherited. Not thread-safe.
class LineProcess {
 public:
  explicit LineProcess(const std::string& command);
  ~LineProcess();

  LineProcess(const LineProcess&) = delete;
  LineProcess& operator=(const LineProcess&) = delete;

  // Appends '\n'. Returns false if the child is gone.
  bool write_line(const std::string& line);

  // Next line without its terminator; nullopt on end of stream.
  std::optional<std::string> read_line();

  // Closes the child's stdin and waits for it. Returns its exit status, or
  // -1 if it did not exit normally. Idempotent.
  int close();

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  int status_ = -1;
};

}  // namespace kgeval
