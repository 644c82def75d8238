#pragma once

#include <stdexcept>
#include <string>

namespace airmatrix {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Geometry / input validation
struct PointOutOfBounds : Error { using Error::Error; };
struct MalformedPolygon : Error { using Error::Error; };
struct NotAdjacent : Error { using Error::Error; };

// Performance model
struct DegenerateSpeeds : Error { using Error::Error; };
struct InvalidScale : Error { using Error::Error; };

// Planning outcomes
struct NoPathFound : Error { using Error::Error; };
struct DepartureConflict : Error { using Error::Error; };
struct BlockedEndpoint : Error { using Error::Error; };

// Batch / reporting
struct InfeasibleScenario : Error { using Error::Error; };
struct IdMismatch : Error { using Error::Error; };

struct ConfigError : Error { using Error::Error; };

}  // namespace airmatrix
