#pragma once

#include <stdexcept>
#include <string>

namespace hycard {

// Error categories. The numeric values double as C API status codes and as
// CLI exit codes, so keep them stable.
enum class ErrorCode : int {
    Internal = 1,
    Config = 2,
    Data = 3,
    Numeric = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(ErrorCode::Config, msg) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(ErrorCode::Data, msg) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(ErrorCode::Numeric, msg) {}
};

}  // namespace hycard
