#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "ks/catalog.hpp"
#include "ks/color.hpp"
#include "ks/graph.hpp"
#include "ks/rigidity.hpp"

namespace ks {

// Everything cmd_verify computes for one set: Table-style metadata columns,
// colourability, criticality, and the rigidity analysis.
struct VerifyReport {
  std::string set_name;
  int dim = 0;
  ExpectedMetadata expected;
  int vectors = 0;
  int orthogonalities = 0;
  int bases = 0;
  bool colourable = false;
  bool critical = false;
  SearchStats search;
  RigidityReport rigidity;
  bool vectors_pass = false;
  bool orthogonalities_pass = false;
  bool bases_pass = false;
  bool uncolourable_pass = false;
  bool critical_pass = false;
  bool parameters_pass = false;
  bool all_pass = false;
  Tolerance tol;
  std::uint64_t seed = 0;
};

// Reported free-parameter counts follow the source table's convention of
// including the residual diagonal-phase freedom for non-rigid sets: a count
// matches either directly (quotiented count == expected) or as the
// unquotiented null dimension when the difference is exactly the dim-1
// phase-gauge directions.  Both counts appear in every report.
bool parameters_match(const RigidityReport& r, int expected, int dim);

// Builds the full verification report for a loaded set.
VerifyReport build_verify_report(const KSSetRecord& set, const Tolerance& tol,
                                 std::uint64_t seed, int basis_index = 0);

std::string verify_report_text(const VerifyReport& r);
nlohmann::json verify_report_json(const VerifyReport& r);

// One table1 row is a VerifyReport; missing files become warnings.
struct TableDocument {
  std::vector<VerifyReport> rows;          // sorted by set name
  std::vector<std::string> missing_files;  // canonical names not found
  bool all_pass = false;
  Tolerance tol;
  std::uint64_t seed = 0;
};

std::string table_text(const TableDocument& doc);
nlohmann::json table_json(const TableDocument& doc);

// The nine canonical catalog file stems, in table order.
const std::vector<std::string>& canonical_set_names();

// Formats a double deterministically (shortest round-trip form via 17
// significant digits, trailing zeros trimmed).
std::string format_double(double value);

}  // namespace ks
