#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drivestyle {

/// Malformed or inconsistent file content. `row` is the 1-based data row
/// (0 when the problem is not tied to a row).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace drivestyle
