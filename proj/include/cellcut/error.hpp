#ifndef CELLCUT_ERROR_HPP
#define CELLCUT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cellcut {

// Error categories mirrored by the C API status codes.
enum class ErrorKind {
    InvalidArgument,
    Precondition,
    Io,
    Format,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct InvalidArgumentError : Error {
    explicit InvalidArgumentError(const std::string& msg) : Error(ErrorKind::InvalidArgument, msg) {}
};
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& msg) : Error(ErrorKind::Precondition, msg) {}
};
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(ErrorKind::Io, msg) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(ErrorKind::Format, msg) {}
};

} // namespace cellcut

#endif
