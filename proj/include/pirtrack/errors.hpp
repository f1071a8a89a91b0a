#pragma once

#include <stdexcept>
#include <string>

namespace pirtrack {

// Exit codes used by the CLI. Every library error maps onto one of them.
enum class ExitCode : int { Ok = 0, Config = 2, Data = 3, Numerical = 4 };

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ExitCode::Config, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ExitCode::Data, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ExitCode::Numerical, what) {}
};

struct DegenerateLayout : ConfigError {
    using ConfigError::ConfigError;
};
struct UnstableParams : ConfigError {
    using ConfigError::ConfigError;
};
struct UnknownScenario : ConfigError {
    using ConfigError::ConfigError;
};
struct TraceTooShort : DataError {
    using DataError::DataError;
};
struct EmptyAfterBurnIn : DataError {
    using DataError::DataError;
};
struct NoConvergence : NumericalError {
    using NumericalError::NumericalError;
};
struct DegenerateGeometry : NumericalError {
    using NumericalError::NumericalError;
};
struct AllWeightsZero : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace pirtrack
