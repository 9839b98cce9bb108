#include "rarinf/error.hpp"

namespace rarinf {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::HorizonExceeded: return "HorizonExceeded";
        case ErrorKind::ZeroProbabilityCondition: return "ZeroProbabilityCondition";
        case ErrorKind::DegenerateArm: return "DegenerateArm";
        case ErrorKind::BoundaryEstimate: return "BoundaryEstimate";
        case ErrorKind::AllMassDegenerate: return "AllMassDegenerate";
        case ErrorKind::NoInteriorSolution: return "NoInteriorSolution";
        case ErrorKind::TooFewAdmissible: return "TooFewAdmissible";
        case ErrorKind::InsufficientConditionalReplicates: return "InsufficientConditionalReplicates";
        case ErrorKind::Config: return "Config";
    }
    return "Unknown";
}

}  // namespace rarinf
