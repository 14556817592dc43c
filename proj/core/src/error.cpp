#include "curvevo/error.hpp"

namespace curvevo {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidConfiguration: return "invalid configuration";
    case ErrorKind::OutOfDomain: return "out of domain";
    case ErrorKind::InvalidOrder: return "invalid derivative order";
    case ErrorKind::Multiplicity: return "knot multiplicity";
    case ErrorKind::DegenerateData: return "degenerate data";
    case ErrorKind::FitFailure: return "fit failure";
    case ErrorKind::DegenerateTangent: return "degenerate tangent";
    case ErrorKind::InvalidDegree: return "invalid degree";
    case ErrorKind::NumericalBlowup: return "numerical blowup";
    case ErrorKind::OptimizationFailure: return "optimization failure";
    case ErrorKind::DegenerateParameters: return "degenerate parameters";
    case ErrorKind::DegenerateMesh: return "degenerate mesh";
    case ErrorKind::TimeStepTooLarge: return "time step too large";
    }
    return "unknown";
}

} // namespace curvevo
