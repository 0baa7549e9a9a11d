#pragma once

#include <stdexcept>
#include <string>

namespace lse {

// Error categories map 1:1 onto CLI exit codes and C-API status values:
// usage -> 1, data -> 2, runtime -> 3.
enum class ErrorKind { usage = 1, data = 2, runtime = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error usage_error(const std::string& message) { return Error(ErrorKind::usage, message); }
inline Error data_error(const std::string& message) { return Error(ErrorKind::data, message); }
inline Error runtime_error(const std::string& message) { return Error(ErrorKind::runtime, message); }

}  // namespace lse
