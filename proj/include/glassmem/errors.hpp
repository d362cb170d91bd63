#pragma once

#include <stdexcept>
#include <string>

namespace glassmem {

// Root of every error the library throws. Callers that only care about
// "something in glassmem failed" catch this one.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class IndexError : public Error { using Error::Error; };
class RankError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class DivergenceError : public Error { using Error::Error; };
class StiffnessError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class CodecError : public Error { using Error::Error; };
class CapacityError : public Error { using Error::Error; };
class RelaxationError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

// Fit errors carry the residual of the last iterate.
class FitError : public Error {
public:
    FitError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace glassmem
