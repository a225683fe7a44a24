#pragma once

#include <stdexcept>
#include <string>

namespace crobust {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or dimension disagreement between tensors.
struct DimensionError : Error {
  using Error::Error;
};

// Invalid user-supplied parameter (stride 0, negative radius, bad severity, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Out-of-range label or element index.
struct IndexError : Error {
  using Error::Error;
};

// Mathematically degenerate input, e.g. cosine similarity of a zero vector.
struct DegenerateInputError : Error {
  using Error::Error;
};

// API contract violation: backward on a non-scalar, wrong aggregation arity, reused tape.
struct ContractError : Error {
  using Error::Error;
};

// Contrastive batch with no negative pairs (batch size 1).
struct NoNegativesError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct CheckpointError : IoError {
  using IoError::IoError;
};

// Checkpoint file does not start with the expected magic bytes.
struct BadMagicError : CheckpointError {
  using CheckpointError::CheckpointError;
};

// Checkpoint format version is not supported by this build.
struct VersionError : CheckpointError {
  using CheckpointError::CheckpointError;
};

// Checkpoint file ends before the declared payload.
struct TruncatedError : CheckpointError {
  using CheckpointError::CheckpointError;
};

// Structurally inconsistent checkpoint contents (bad record header, absurd dims).
struct FormatError : CheckpointError {
  using CheckpointError::CheckpointError;
};

}  // namespace crobust
