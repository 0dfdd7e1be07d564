#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vcot {

/// Base class for every error raised by the toolchain.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed proof trace (or other S-expression input).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class UnknownRule : public Error {
 public:
  explicit UnknownRule(const std::string& rule) : Error("unknown proof rule '" + rule + "'"), rule_(rule) {}
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

class NodeNotFound : public Error {
 public:
  explicit NodeNotFound(std::size_t id) : Error("proof node " + std::to_string(id) + " does not exist") {}
};

/// Unbalanced delimiters in Verus source.
class ScanError : public Error {
 public:
  ScanError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownBlock : public Error {
 public:
  explicit UnknownBlock(std::size_t id) : Error("semantic block " + std::to_string(id) + " does not exist") {}
};

class MissingHoleKey : public Error {
 public:
  explicit MissingHoleKey(const std::string& key) : Error("completion has no section for hole " + key), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Transport-level failure talking to a model backend (HTTP error, cassette miss, ...).
class BackendError : public Error {
 public:
  using Error::Error;
};

/// The agent answered, but not in the required structured form.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class VerusUnavailable : public Error {
 public:
  using Error::Error;
};

class VerusTimeout : public Error {
 public:
  using Error::Error;
};

class EmptyProgram : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class EmptySet : public Error {
 public:
  using Error::Error;
};

class UnknownTask : public Error {
 public:
  explicit UnknownTask(const std::string& id) : Error("unknown task '" + id + "'") {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace vcot
