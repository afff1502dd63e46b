#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace merkit {

// Bad input data: malformed files, violated record invariants. CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad invocation or configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A JSONL line that does not match its schema. line_no is 1-based.
class SchemaError : public DataError {
 public:
  SchemaError(std::size_t line_no, std::string field, const std::string& detail = {})
      : DataError("schema error at line " + std::to_string(line_no) + ", field '" + field + "'" +
                  (detail.empty() ? std::string{} : ": " + detail)),
        line_no_(line_no),
        field_(std::move(field)) {}

  std::size_t line_no() const noexcept { return line_no_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_no_;
  std::string field_;
};

}  // namespace merkit
