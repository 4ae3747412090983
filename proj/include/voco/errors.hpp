#pragma once

#include <stdexcept>
#include <string>

namespace voco {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration: bad schema, missing keys, infeasible settings.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed on-disk data: wrong magic, unparsable header, bad dimensions.
struct FormatError : Error {
    using Error::Error;
};

// Declared payload size exceeds what the file actually contains.
struct TruncationError : Error {
    using Error::Error;
};

// Checkpoint archive is unreadable or its manifest is inconsistent.
struct CheckpointError : Error {
    using Error::Error;
};

// Generic filesystem failure (open/write/rename).
struct IoError : Error {
    using Error::Error;
};

// An embedding collapsed to (near) zero norm; cosine similarity undefined.
struct DegenerateEmbeddingError : Error {
    using Error::Error;
};

} // namespace voco
