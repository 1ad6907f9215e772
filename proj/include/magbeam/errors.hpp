#pragma once

#include <stdexcept>
#include <string>

namespace magbeam {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// model
struct InvalidParams : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// geometry
struct LoopsIntersect : Error { using Error::Error; };
struct QuadratureTooCoarse : Error { using Error::Error; };
struct DegenerateGeometry : Error { using Error::Error; };
struct InvalidGeometry : Error { using Error::Error; };

// solvers
struct ZeroCoupling : Error { using Error::Error; };
struct NotIdenticalResistances : Error { using Error::Error; };
struct NumericalFailure : Error { using Error::Error; };
struct RankDeficiencyUnexpected : Error { using Error::Error; };
struct Unbounded : Error { using Error::Error; };
struct NoFeasiblePointFound : Error { using Error::Error; };

// scenario I/O
struct ParseError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct UnitError : Error { using Error::Error; };

} // namespace magbeam
