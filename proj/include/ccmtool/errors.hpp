#pragma once

#include <stdexcept>
#include <string>

namespace ccmtool {

/// Base class for all analysis errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroVariance : Error {
    using Error::Error;
};
struct InvalidBand : Error {
    using Error::Error;
};
struct OutOfRange : Error {
    using Error::Error;
};
struct SeriesTooShort : Error {
    using Error::Error;
};
struct NotEnoughPoints : Error {
    using Error::Error;
};
struct NonFiniteInput : Error {
    using Error::Error;
};
struct IndexOutOfRange : Error {
    using Error::Error;
};
struct NonSquare : Error {
    using Error::Error;
};
struct ChannelMismatch : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};
struct DegenerateNeighborhood : Error {
    using Error::Error;
};
struct DegenerateBaseline : Error {
    using Error::Error;
};
struct SingularDesign : Error {
    using Error::Error;
};
struct InvalidSpec : Error {
    using Error::Error;
};
struct Unstable : Error {
    using Error::Error;
};
struct MissingOnset : Error {
    using Error::Error;
};
struct MalformedReport : Error {
    using Error::Error;
};
struct MalformedInput : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

} // namespace ccmtool
