#pragma once

/** \file errors.hpp
 *  \brief Exception hierarchy shared by every pipeline stage.
 *
 * Each error carries an ErrorKind so the CLI can map failures to distinct
 * exit codes without string matching.
 */

#include <stdexcept>
#include <string>

namespace fusegraph {

enum class ErrorKind {
    config = 2,
    parse = 3,
    duplicate = 4,
    format = 5,
    domain = 6,
    shape = 7,
    incomplete = 8,
    compatibility = 9,
    arity = 10,
    stratification = 11,
    degenerate_label = 12,
    io = 13,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

/// Malformed input row. `line` is 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& why)
        : Error(ErrorKind::parse, path + ":" + std::to_string(line) + ": " + why), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateError : public Error {
public:
    explicit DuplicateError(const std::string& what) : Error(ErrorKind::duplicate, what) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(ErrorKind::format, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};

/// A sample lacks a modality, or a store lacks a rank it should hold.
class IncompleteError : public Error {
public:
    explicit IncompleteError(const std::string& what) : Error(ErrorKind::incomplete, what) {}
};

class CompatibilityError : public Error {
public:
    explicit CompatibilityError(const std::string& what) : Error(ErrorKind::compatibility, what) {}
};

class ArityError : public Error {
public:
    explicit ArityError(const std::string& what) : Error(ErrorKind::arity, what) {}
};

class StratificationError : public Error {
public:
    explicit StratificationError(const std::string& what) : Error(ErrorKind::stratification, what) {}
};

class DegenerateLabelError : public Error {
public:
    explicit DegenerateLabelError(const std::string& what) : Error(ErrorKind::degenerate_label, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace fusegraph
