#pragma once

#include <stdexcept>
#include <string>

namespace vj {

/// Base class for every error raised by the engine and its services.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Malformed persisted data (snapshots, transcripts, lexicon files, scripts).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Unusable session or tool configuration, raised before any side effect.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operation on a session that has already ended.
class GoneError : public Error {
 public:
  using Error::Error;
};

/// Wizard selection that does not match the latest candidate list.
class ConflictError : public Error {
 public:
  using Error::Error;
};

class UnsupportedModeError : public Error {
 public:
  using Error::Error;
};

}  // namespace vj
