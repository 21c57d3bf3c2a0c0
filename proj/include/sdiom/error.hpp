#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sdiom {

// All recoverable failures carry a short machine-readable code plus a
// human-readable message; the CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool ok, const std::string& code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace sdiom
