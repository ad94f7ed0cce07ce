#ifndef ZINB_ERROR_HPP
#define ZINB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace zinb {

enum class ErrorCode {
    DimensionMismatch,
    ConstantCovariate,
    AllZeroFeature,
    InvalidGroups,
    InvalidArgument,
    DomainError,
    InvariantViolation,
    EmptySample,
    NoSharedFeatures,
    InconsistentZeroIndicator,
    NumericalFailure,
    EmptyTrace,
    PoolTooSmall,
    SingleClassTruth,
    ParseError,
    UnalignedSampleIds,
    NonIntegerCount,
    UnknownFlag,
    InvalidValue,
    MissingInput,
    IoError,
};

const char* error_code_name(ErrorCode code);

/**
 * Exception type used throughout the library. The code identifies the failure
 * class; the message carries the offending feature, key or location.
 */
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace zinb

#endif
