#pragma once

#include <stdexcept>
#include <string>

namespace mmce {

// Exit-code mapping used by the CLI: ConfigError/ValidationError/UsageError -> 2,
// IoError -> 3, NumericError -> 4, EligibilityError -> 5.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EligibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mmce
