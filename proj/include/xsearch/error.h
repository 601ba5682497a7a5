#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xsearch {

// Base of every error the library throws. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed XML, NEXI or s-expression input.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t offset = kNoOffset)
      : Error(offset == kNoOffset
                  ? what
                  : what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  static constexpr std::size_t kNoOffset = static_cast<std::size_t>(-1);

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Structurally invalid query tree (arity, empty pattern, beta out of range).
class QueryError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure while reading or committing an index.
class IoError : public IndexError {
 public:
  using IndexError::IndexError;
};

// On-disk format version does not match this build.
class VersionError : public IndexError {
 public:
  using IndexError::IndexError;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace xsearch
