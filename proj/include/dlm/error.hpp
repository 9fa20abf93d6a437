#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dlm {

/// Base class for all toolkit errors. `kind()` is the machine-readable
/// class printed by the command-line tool.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "error"; }
};

class ArgumentError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "argument"; }
};

class SchemaError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "schema"; }
};

/// Malformed input at a specific (1-based) line of a file.
class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& msg)
        : Error(file + ":" + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const noexcept { return line_; }
    const char* kind() const noexcept override { return "parse"; }

private:
    std::size_t line_;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "empty-dataset"; }
};

class IoError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "io"; }
};

/// Failure inside one stage of an experiment pipeline.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause)
        : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }
    const char* kind() const noexcept override { return "stage"; }

private:
    std::string stage_;
};

} // namespace dlm
