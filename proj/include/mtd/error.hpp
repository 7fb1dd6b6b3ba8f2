#pragma once

#include <stdexcept>
#include <string>

namespace mtd {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kSolver = 1,
  kConfig = 2,
  kData = 3,
  kInternal = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& what) {
  throw Error(ErrorKind::kConfig, what);
}

[[noreturn]] inline void throw_data(const std::string& what) {
  throw Error(ErrorKind::kData, what);
}

[[noreturn]] inline void throw_internal(const std::string& what) {
  throw Error(ErrorKind::kInternal, what);
}

}  // namespace mtd
