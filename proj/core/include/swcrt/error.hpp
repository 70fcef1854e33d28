#pragma once

#include <stdexcept>
#include <string>

namespace swcrt {

// Every validation failure carries a stable machine-readable code and, when
// it can be pinned to one input, the offending field name.
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string message, std::string field = {})
      : std::runtime_error(std::move(message)),
        code_(std::move(code)),
        field_(std::move(field)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string code_;
  std::string field_;
};

}  // namespace swcrt
