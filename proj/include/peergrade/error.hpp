#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peergrade {

enum class ErrorCode {
    EmptySample,
    ZeroObservation,
    LengthMismatch,
    AllZeroWeights,
    InvalidGrade,
    InvalidWeight,
    InvalidRecord,
    InvalidRubric,
    InvalidConfig,
    EmptyGraders,
    ConstantVector,
    TooFewValues,
    InvalidK,
    MalformedHeader,
    ParseError,
    DuplicateKey,
    Io,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , code_(code)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace peergrade
