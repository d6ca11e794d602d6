#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ks/errors.hpp"
#include "ks/ray.hpp"

namespace ks {

// Expected per-set metadata carried in a catalog file header and checked
// against recomputed values by validate_metadata.
struct ExpectedMetadata {
  int vectors = 0;
  int orthogonalities = 0;
  int bases = 0;
  int parameters = 0;
  bool critical = false;
};

// A named KS candidate set: dimension, canonicalized rays, and the header's
// claimed metadata.
struct KSSetRecord {
  std::string name;
  int dim = 0;
  std::vector<Ray> rays;
  ExpectedMetadata expected;
};

// One expected-vs-actual row of a validation report.
struct ValidationItem {
  std::string column;
  long long expected = 0;
  long long actual = 0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool pass = false;  // all items pass
};

// Parses catalog text.  `source_name` labels errors (usually the filename).
//
// Format: UTF-8 text; header lines `name:`, `dim:`, `vectors:`,
// `orthogonalities:`, `bases:`, `parameters:`, `critical:` (yes/no); then one
// ray per line as comma-separated component expressions; `#` starts a
// comment.  Rays are canonicalized on load.
//
// Throws FormatError (naming the line) for structural problems,
// ParseError/EvalError for bad component expressions, DuplicateRayError if
// two rays satisfy |<u,v>| > 1 - 1e-9, DimensionError for rays of the wrong
// length.
KSSetRecord parse_set(const std::string& text, const std::string& source_name);

// Reads and parses a catalog file.  Throws IoError on I/O failure, then
// everything parse_set throws.
KSSetRecord load_set(const std::filesystem::path& path);

// Serializes a record in the catalog file format.  Components are printed
// from their origin expressions when present, otherwise as decimal literals
// with 17 significant digits.
std::string serialize_set(const KSSetRecord& record);

// Recomputes vectors / orthogonalities / bases and compares against the
// record's expected metadata.  Mismatches are report content, not errors.
ValidationReport validate_metadata(const KSSetRecord& record,
                                   const Tolerance& tol = {});

// Projective duplicate threshold: distinct catalog rays are well-separated,
// so |<u,v>| above this means the same ray was listed twice.
inline constexpr double kDuplicateTol = 1.0 - 1e-9;

}  // namespace ks
