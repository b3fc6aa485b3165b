#pragma once

#include <stdexcept>
#include <string>

namespace shearlab {

/// Failure categories. The CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorKind { Config, Hypothesis, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error config_error(const std::string& m) { return {ErrorKind::Config, m}; }
inline Error hypothesis_error(const std::string& m) { return {ErrorKind::Hypothesis, m}; }
inline Error numerical_error(const std::string& m) { return {ErrorKind::Numerical, m}; }

}  // namespace shearlab
