#pragma once

#include <stdexcept>
#include <string>

namespace dwl {

// Base class for all library errors. Subclasses exist so callers and tests
// can discriminate failure modes by type.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// numerics
struct NotSpd : Error { using Error::Error; };
struct DimMismatch : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct NotOrthonormal : Error { using Error::Error; };

// bdr / nn / dnet
struct BadShape : Error { using Error::Error; };
struct BadConfig : Error { using Error::Error; };
struct NumericalFailure : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct BadLabel : Error { using Error::Error; };
struct BadTag : Error { using Error::Error; };
struct NanLoss : Error { using Error::Error; };
struct EmptySplit : Error { using Error::Error; };

// metrics
struct LengthMismatch : Error { using Error::Error; };
struct BadK : Error { using Error::Error; };

// datasets
struct CenterPlacementFailure : Error { using Error::Error; };
struct TooSmall : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct RaggedRow : Error { using Error::Error; };
struct EmptyFile : Error { using Error::Error; };

// cli
struct IoError : Error { using Error::Error; };

}  // namespace dwl
