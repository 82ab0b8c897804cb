#pragma once

#include <stdexcept>
#include <string>

namespace ratgan {

// Error taxonomy shared by the whole library. The CLI maps these onto exit
// codes: UsageError -> 1, ConfigError/FormatError/VocabError -> 2,
// NumericError -> 3.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VocabError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ratgan
