#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace narrative_net {

// Exit-code classes used by the CLI: usage = 1, data/io = 2, internal = 3.
enum class ErrorKind { usage, config, data, io, internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(ErrorKind::io, path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A cleaning rule whose pattern does not compile.
class RuleCompileError : public DataError {
 public:
  RuleCompileError(std::size_t index, const std::string& detail)
      : DataError("cleaning rule " + std::to_string(index) + " does not compile: " + detail),
        index_(index) {}
  std::size_t rule_index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A label log line that cannot be parsed (1-based line number).
class LogCorruptError : public DataError {
 public:
  LogCorruptError(const std::string& path, std::size_t line, const std::string& detail)
      : DataError(path + ":" + std::to_string(line) + ": corrupted label log line: " + detail),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Fewer than two distinct positive degrees; no log-log line exists.
class FitUndefined : public DataError {
 public:
  explicit FitUndefined(const std::string& what) : DataError(what) {}
};

/// No evaluative word instance had a lexicon entry.
class NoScoreError : public DataError {
 public:
  explicit NoScoreError(const std::string& what) : DataError(what) {}
};

/// Transport, timeout or protocol failure talking to an external adapter.
class AdapterError : public Error {
 public:
  explicit AdapterError(const std::string& what) : Error(ErrorKind::data, what) {}
};

}  // namespace narrative_net
