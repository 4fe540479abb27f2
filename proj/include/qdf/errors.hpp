#ifndef QDF_ERRORS_HPP
#define QDF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qdf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Domain / numerical errors
struct InvalidParams : Error {
    using Error::Error;
};
struct OutOfDomain : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct DegenerateAtom : Error {
    using Error::Error;
};
struct EmptyDictionary : Error {
    using Error::Error;
};
struct SingularSystem : Error {
    using Error::Error;
};
struct Unsupported : Error {
    using Error::Error;
};
struct LayoutOverlap : Error {
    using Error::Error;
};

// File I/O errors
struct IoError : Error {
    using Error::Error;
};
struct BadMagic : IoError {
    using IoError::IoError;
};
struct VersionMismatch : IoError {
    using IoError::IoError;
};
struct TruncatedFile : IoError {
    using IoError::IoError;
};
struct ChecksumMismatch : IoError {
    using IoError::IoError;
};

} // namespace qdf

#endif
