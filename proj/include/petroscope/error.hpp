#pragma once

#include <stdexcept>

namespace petroscope {

// Base type for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Decoding and file handling.
struct UnsupportedFormat : Error { using Error::Error; };
struct CorruptStream : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// Raster geometry.
struct NonIntegralFactor : Error { using Error::Error; };
struct ImageTooSmall : Error { using Error::Error; };
struct GridTooFine : Error { using Error::Error; };
struct RegionOutOfBounds : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// Statistics.
struct EmptySample : Error { using Error::Error; };

// Rock classification.
struct PercentOutOfRange : Error { using Error::Error; };
struct EmptyVotes : Error { using Error::Error; };

// Metrics.
struct UndefinedPrecision : Error { using Error::Error; };
struct EmptyGroup : Error { using Error::Error; };
struct NoDefinedPrecision : Error { using Error::Error; };

// Sweeps and synthetic data.
struct CorpusEmpty : Error { using Error::Error; };
struct AmbiguousTruth : Error { using Error::Error; };

}  // namespace petroscope
