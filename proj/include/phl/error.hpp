#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phl {

class DistError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform or weighted choice over an empty list.
class EmptyChoice : public DistError {
 public:
  EmptyChoice() : DistError("choice over an empty list") {}
};

class NonPositiveWeight : public DistError {
 public:
  explicit NonPositiveWeight(const std::string& w)
      : DistError("choice weight must be strictly positive, got " + w) {}
};

/// Syntax error with a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class UnboundVariable : public ParseError {
 public:
  UnboundVariable(const std::string& name, std::size_t line, std::size_t column)
      : ParseError("unbound variable '" + name + "'", line, column), name_(name) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Resource guards (node count, support size). Mapped to exit code 3 by the CLI.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NodeLimitExceeded : public ResourceLimit {
 public:
  explicit NodeLimitExceeded(std::size_t limit)
      : ResourceLimit("configuration graph exceeds max_nodes = " + std::to_string(limit)),
        limit_(limit) {}

  std::size_t limit() const { return limit_; }

 private:
  std::size_t limit_;
};

class SupportLimitExceeded : public ResourceLimit {
 public:
  explicit SupportLimitExceeded(std::size_t limit)
      : ResourceLimit("distribution support exceeds max_support = " + std::to_string(limit)) {}
};

class MissingNodePotential : public std::invalid_argument {
 public:
  explicit MissingNodePotential(std::size_t node)
      : std::invalid_argument("certificate has no potential for node " + std::to_string(node)),
        node_(node) {}

  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

/// Bound-expression evaluation outside the domain (log of a non-positive value, x / 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace phl
