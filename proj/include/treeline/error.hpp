#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace treeline {

/// Library error carrying a stable machine-readable code next to the message.
/// Codes are kebab-case identifiers such as "invalid-tree-line" or
/// "no-variance"; the CLI forwards them verbatim in its error objects.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
  throw Error(std::move(code), message);
}

}  // namespace treeline
