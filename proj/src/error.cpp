#include "peergrade/error.hpp"

namespace peergrade {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::EmptySample: return "EMPTY_SAMPLE";
    case ErrorCode::ZeroObservation: return "ZERO_OBSERVATION";
    case ErrorCode::LengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::AllZeroWeights: return "ALL_ZERO_WEIGHTS";
    case ErrorCode::InvalidGrade: return "INVALID_GRADE";
    case ErrorCode::InvalidWeight: return "INVALID_WEIGHT";
    case ErrorCode::InvalidRecord: return "INVALID_RECORD";
    case ErrorCode::InvalidRubric: return "INVALID_RUBRIC";
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::EmptyGraders: return "EMPTY_GRADERS";
    case ErrorCode::ConstantVector: return "CONSTANT_VECTOR";
    case ErrorCode::TooFewValues: return "TOO_FEW_VALUES";
    case ErrorCode::InvalidK: return "INVALID_K";
    case ErrorCode::MalformedHeader: return "MALFORMED_HEADER";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::DuplicateKey: return "DUPLICATE_KEY";
    case ErrorCode::Io: return "IO_ERROR";
    }
    return "UNKNOWN";
}

} // namespace peergrade
