#pragma once

#include <stdexcept>
#include <string>

namespace cowtopo {

/// Unreadable or unwritable files, malformed headers, unsupported datatypes.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that violate a contract: shape mismatches, invalid class ids, bad config.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cowtopo
