#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace disempower {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numeric argument lies outside the domain of an operation.
class DomainError : public Error {
public:
    DomainError(std::string argument, const std::string& what)
        : Error(what), argument_(std::move(argument)) {}
    const std::string& argument() const noexcept { return argument_; }

private:
    std::string argument_;
};

/// Invalid configuration: parameters, schedules, scenario files, intervention sets.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A parameter or config value is outside its declared range. field() names it.
class RangeError : public ConfigError {
public:
    RangeError(std::string field, const std::string& what)
        : ConfigError(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class UnknownKeyError : public ConfigError {
public:
    explicit UnknownKeyError(std::string key)
        : ConfigError("unknown key \"" + key + "\""), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Malformed JSON or CSV text. Line and column are 1-based.
class SyntaxError : public ConfigError {
public:
    SyntaxError(std::size_t line, std::size_t column, const std::string& detail)
        : ConfigError("syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + detail),
          line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace disempower
