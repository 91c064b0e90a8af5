#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vada {

/// 1-based source location range. A default-constructed span means "unknown".
struct SourceSpan {
    uint32_t line = 0;
    uint32_t column = 0;
    uint32_t end_line = 0;
    uint32_t end_column = 0;

    bool known() const { return line != 0; }
    std::string to_string() const;
};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    Error(const std::string& message, SourceSpan span = {});
    const SourceSpan& span() const { return span_; }
    const std::string& message() const { return message_; }

private:
    SourceSpan span_;
    std::string message_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, SourceSpan span, std::vector<std::string> expected = {});
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::vector<std::string> expected_;
};

/// The same predicate is used with two different arities.
class ArityError : public Error {
public:
    ArityError(const std::string& predicate, size_t expected, size_t found, SourceSpan span,
               SourceSpan first_use);
    const std::string& predicate() const { return predicate_; }
    const SourceSpan& first_use() const { return first_use_; }

private:
    std::string predicate_;
    SourceSpan first_use_;
};

/// Negation (or another stratifying construct) forms a cycle.
class CycleError : public Error {
public:
    CycleError(std::vector<std::string> cycle);
    const std::vector<std::string>& cycle() const { return cycle_; }

private:
    std::vector<std::string> cycle_;
};

class PlanError : public Error {
    using Error::Error;
};

class EvalError : public Error {
    using Error::Error;
};

/// A configured hard limit (fact count, cache size) was exceeded.
class ResourceError : public Error {
    using Error::Error;
};

class IoError : public Error {
    using Error::Error;
};

class SchemaError : public Error {
public:
    SchemaError(const std::string& message, size_t row);
    size_t row() const { return row_; }

private:
    size_t row_;
};

class NotDerived : public Error {
    using Error::Error;
};

class CapExceeded : public Error {
    using Error::Error;
};

}  // namespace vada
