#pragma once

#include <stdexcept>
#include <string>

namespace concap {

// Broad failure classes; the CLI maps them to exit codes.
enum class ErrorClass { usage, config, data, backend };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
    ErrorClass error_class() const noexcept { return class_; }

private:
    ErrorClass class_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorClass::config, what) {}
};

// Bad input data: malformed files, violated preconditions, unparseable text.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorClass::data, what) {}
};

class PreconditionError : public DataError {
public:
    explicit PreconditionError(const std::string& what) : DataError("precondition violated: " + what) {}
};

class SchemaError : public DataError {
public:
    SchemaError(const std::string& file, std::size_t line, const std::string& what)
        : DataError(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class DegenerateLabelsError : public DataError {
public:
    explicit DegenerateLabelsError(const std::string& what) : DataError("degenerate labels: " + what) {}
};

enum class BackendFailure {
    unreachable,       // transport-level; the only retryable kind
    unknown_key,       // scripted backend has no fixture entry
    invalid_response,  // schema or range violation in a response
    empty_completion,
    unparseable_verdict,
    rejected,          // non-2xx status from a remote backend
};

inline const char* to_string(BackendFailure f) {
    switch (f) {
        case BackendFailure::unreachable: return "backend-unreachable";
        case BackendFailure::unknown_key: return "unknown-key";
        case BackendFailure::invalid_response: return "invalid-response";
        case BackendFailure::empty_completion: return "empty-completion";
        case BackendFailure::unparseable_verdict: return "unparseable-verdict";
        case BackendFailure::rejected: return "rejected";
    }
    return "unknown";
}

class BackendError : public Error {
public:
    BackendError(BackendFailure kind, const std::string& endpoint, const std::string& what)
        : Error(ErrorClass::backend, std::string(to_string(kind)) + " [" + endpoint + "]: " + what),
          kind_(kind), endpoint_(endpoint) {}
    BackendFailure kind() const noexcept { return kind_; }
    const std::string& endpoint() const noexcept { return endpoint_; }

private:
    BackendFailure kind_;
    std::string endpoint_;
};

}  // namespace concap
