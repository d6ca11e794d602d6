#pragma once

#include <stdexcept>
#include <string>

namespace ks {

// Base class for every library error so callers can catch ks::Error
// uniformly. Each subclass marks one failure mode named in the API contracts.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two rays (or a ray and a space) of different Hilbert-space dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Attempt to canonicalize a vector that is numerically zero.
class ZeroVectorError : public Error {
 public:
  using Error::Error;
};

// The n-1 input rays of a unique-completion step are linearly dependent,
// so no unique orthogonal completion exists.
class DegenerateSpanError : public Error {
 public:
  using Error::Error;
};

// Component-expression text violates the grammar; message carries the byte
// offset of the first offending character.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Component-expression evaluates into an invalid operation (division by
// zero, sqrt of a negative or non-real argument).
class EvalError : public Error {
 public:
  using Error::Error;
};

// Underlying file could not be opened or read.
class IoError : public Error {
 public:
  using Error::Error;
};

// Catalog file text is structurally malformed; message names the line.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Two rays of a catalog file coincide as projective points.
class DuplicateRayError : public Error {
 public:
  using Error::Error;
};

// DOT export label list does not match the vertex count.
class LabelError : public Error {
 public:
  using Error::Error;
};

// An operation precondition on caller-supplied structure failed
// (basis not a clique, colourable input to a criticality check, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// A dim-clique failed the projector-sum test; with distinct orthogonal rays
// this can only happen on corrupted input, never on a legitimate state.
class CliqueNotBasisError : public Error {
 public:
  using Error::Error;
};

// Newton correction failed to return to the constraint manifold while
// tracing a deformation path; message reports the last residual.
class ContinuationStallError : public Error {
 public:
  using Error::Error;
};

}  // namespace ks
