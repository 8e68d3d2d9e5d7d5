#pragma once

#include <stdexcept>
#include <string>

namespace gazekex {

// Base for every error this library throws. The CLI maps these to
// stage-tagged messages and a nonzero exit code.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape error: " + what) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error("contract error: " + what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error("parse error: " + file + ":" + std::to_string(line) + ": " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("i/o error: " + what) {}
};

class EmptyInputError : public Error {
 public:
  explicit EmptyInputError(const std::string& what) : Error("empty input: " + what) {}
};

// Non-finite losses, diverged training, undefined similarities.
class EvalError : public Error {
 public:
  explicit EvalError(const std::string& what) : Error("evaluation error: " + what) {}
};

}  // namespace gazekex
