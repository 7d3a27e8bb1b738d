#ifndef SALKIT_ERROR_HPP_
#define SALKIT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace salkit {

enum class ErrorKind {
    AllZeroMap,
    EmptyFixations,
    EmptyNegatives,
    ShapeMismatch,
    WrongState,
    ConstantMap,
    GridTooLarge,
    SingularCovariance,
    LengthMismatch,
    MissingFixations,
    IncompatibleScenario,
    IoError,
    ParseError,
    SchemaError,
    InvalidArgument,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace salkit

#endif // SALKIT_ERROR_HPP_
