#include "vada/error.hpp"

namespace vada {

std::string SourceSpan::to_string() const {
    if (!known()) return "?:?";
    return std::to_string(line) + ":" + std::to_string(column);
}

namespace {

std::string with_span(const std::string& message, const SourceSpan& span) {
    if (!span.known()) return message;
    return span.to_string() + ": " + message;
}

}  // namespace

Error::Error(const std::string& message, SourceSpan span)
    : std::runtime_error(with_span(message, span)), span_(span), message_(message) {}

ParseError::ParseError(const std::string& message, SourceSpan span, std::vector<std::string> expected)
    : Error(message, span), expected_(std::move(expected)) {}

ArityError::ArityError(const std::string& predicate, size_t expected, size_t found, SourceSpan span,
                       SourceSpan first_use)
    : Error("predicate '" + predicate + "' used with arity " + std::to_string(found) +
                ", but it has arity " + std::to_string(expected) + " at " + first_use.to_string(),
            span),
      predicate_(predicate),
      first_use_(first_use) {}

namespace {

std::string cycle_text(const std::vector<std::string>& cycle) {
    std::string out = "negation cycle: ";
    for (size_t i = 0; i < cycle.size(); ++i) {
        if (i) out += " -> ";
        out += cycle[i];
    }
    return out;
}

}  // namespace

CycleError::CycleError(std::vector<std::string> cycle) : Error(cycle_text(cycle)), cycle_(std::move(cycle)) {}

SchemaError::SchemaError(const std::string& message, size_t row)
    : Error("row " + std::to_string(row) + ": " + message), row_(row) {}

}  // namespace vada
