#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace codedist {

// Every failure raised by the library derives from Error. The kind lets
// front ends map failures onto stable exit codes without string matching.
enum class ErrorKind {
  MalformedLine,
  DuplicateRecord,
  CycleDetected,
  DanglingEdge,
  SelfEdge,
  InvalidConceptId,
  UnknownConcept,
  OutOfFocus,
  NoCommonAncestor,
  InvalidThresholds,
  UnknownCoder,
  MissingRating,
  EmptyCodeSet,
  IoFailure,
  ConfigError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class MalformedLine : public Error {
 public:
  MalformedLine(std::string source, std::size_t line, std::string reason)
      : Error(ErrorKind::MalformedLine,
              source + ":" + std::to_string(line) + ": " + reason),
        source_(std::move(source)),
        line_(line),
        reason_(std::move(reason)) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string source_;
  std::size_t line_;
  std::string reason_;
};

class CycleDetected : public Error {
 public:
  // witness lists the concepts of one cycle in child->parent order; the
  // first element is repeated at the end.
  explicit CycleDetected(std::vector<unsigned long long> witness)
      : Error(ErrorKind::CycleDetected, describe(witness)),
        witness_(std::move(witness)) {}

  const std::vector<unsigned long long>& witness() const noexcept {
    return witness_;
  }

 private:
  static std::string describe(const std::vector<unsigned long long>& w) {
    std::string s = "is-a cycle detected: ";
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) s += " -> ";
      s += std::to_string(w[i]);
    }
    return s;
  }

  std::vector<unsigned long long> witness_;
};

class IoFailure : public Error {
 public:
  explicit IoFailure(std::string path)
      : Error(ErrorKind::IoFailure, "cannot read or write '" + path + "'"),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace codedist
