#include "copcoal/error.hpp"

namespace copcoal {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NonPositiveDefinite: return "NonPositiveDefinite";
        case ErrorKind::InvalidCount: return "InvalidCount";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::SingularConditioningSet: return "SingularConditioningSet";
        case ErrorKind::SingularCovariance: return "SingularCovariance";
        case ErrorKind::DegenerateCorrelation: return "DegenerateCorrelation";
        case ErrorKind::SourceCollocation: return "SourceCollocation";
        case ErrorKind::EmptyCoalition: return "EmptyCoalition";
        case ErrorKind::InvalidTheta: return "InvalidTheta";
        case ErrorKind::StepTooSmall: return "StepTooSmall";
        case ErrorKind::PlayerSetMismatch: return "PlayerSetMismatch";
        case ErrorKind::InvalidPartition: return "InvalidPartition";
        case ErrorKind::IterationCapExceeded: return "IterationCapExceeded";
        case ErrorKind::CycleDetected: return "CycleDetected";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::SchemaViolation: return "SchemaViolation";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace copcoal
