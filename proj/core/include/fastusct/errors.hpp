#pragma once
// Exception hierarchy. Every error carries a human-readable message naming
// the offending parameter, file, or step.

#include <stdexcept>
#include <string>

namespace fastusct {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input counts that must divide each other do not.
struct DivisibilityError : Error { using Error::Error; };
// A firing plan asks for more transmitters than the geometry has.
struct CapacityError : Error { using Error::Error; };
// An index or region falls outside the grid.
struct BoundsError : Error { using Error::Error; };
// Array dimensions disagree.
struct ShapeError : Error { using Error::Error; };
// Invalid configuration value or combination (includes CFL violations).
struct ConfigError : Error { using Error::Error; };
// The field blew up; message names the time-step index.
struct StabilityError : Error { using Error::Error; };
// Model descriptor violates an architecture rule.
struct ArchitectureError : Error { using Error::Error; };
// Training diverged; message names epoch and batch.
struct TrainingError : Error { using Error::Error; };
// A frame or dataset fails an input contract (e.g. missing tx identity).
struct InputError : Error { using Error::Error; };
// Receiver/transmitter count incompatible with the symmetry group.
struct SymmetryError : Error { using Error::Error; };
// log_compress on an all-zero image.
struct DegenerateImageError : Error { using Error::Error; };

// File I/O failures, split by cause so callers can distinguish them.
struct IoError : Error { using Error::Error; };
struct BadMagicError : IoError { using IoError::IoError; };
struct BadVersionError : IoError { using IoError::IoError; };
struct TruncationError : IoError { using IoError::IoError; };

}  // namespace fastusct
