#include "ks/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <complex>
#include <fstream>
#include <sstream>

#include "ks/expr.hpp"
#include "ks/graph.hpp"

namespace ks {
namespace {

std::string trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

[[noreturn]] void format_fail(const std::string& source, int line,
                              const std::string& what) {
  throw FormatError(source + ": line " + std::to_string(line) + ": " + what);
}

long long parse_int_field(const std::string& source, int line,
                          const std::string& key, const std::string& value) {
  long long out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    format_fail(source, line, "header '" + key + "' needs an integer, got '" +
                                  value + "'");
  }
  return out;
}

}  // namespace

KSSetRecord parse_set(const std::string& text, const std::string& source_name) {
  KSSetRecord record;
  bool have[7] = {};
  constexpr const char* kKeys[7] = {"name",  "dim",        "vectors",
                                    "orthogonalities",     "bases",
                                    "parameters",          "critical"};
  std::vector<std::vector<ComplexScalar>> raw_rays;

  std::istringstream in(text);
  std::string raw_line;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    if (auto hash = raw_line.find('#'); hash != std::string::npos) {
      raw_line.erase(hash);
    }
    const std::string line = trim(raw_line);
    if (line.empty()) continue;

    // Header lines: `key: value` with a known key.  Anything else is a ray.
    const auto colon = line.find(':');
    int key_index = -1;
    if (colon != std::string::npos) {
      const std::string key = trim(line.substr(0, colon));
      for (int k = 0; k < 7; ++k) {
        if (key == kKeys[k]) key_index = k;
      }
      if (key_index < 0 && raw_rays.empty() &&
          line.find(',') == std::string::npos) {
        format_fail(source_name, line_no, "unknown header '" + key + "'");
      }
    }
    if (key_index >= 0) {
      if (!raw_rays.empty()) {
        format_fail(source_name, line_no, "header after first ray line");
      }
      if (have[key_index]) {
        format_fail(source_name, line_no,
                    std::string("duplicate header '") + kKeys[key_index] + "'");
      }
      have[key_index] = true;
      const std::string value = trim(line.substr(colon + 1));
      switch (key_index) {
        case 0:
          record.name = value;
          break;
        case 1:
          record.dim = static_cast<int>(
              parse_int_field(source_name, line_no, "dim", value));
          break;
        case 2:
          record.expected.vectors = static_cast<int>(
              parse_int_field(source_name, line_no, "vectors", value));
          break;
        case 3:
          record.expected.orthogonalities = static_cast<int>(parse_int_field(
              source_name, line_no, "orthogonalities", value));
          break;
        case 4:
          record.expected.bases = static_cast<int>(
              parse_int_field(source_name, line_no, "bases", value));
          break;
        case 5:
          record.expected.parameters = static_cast<int>(
              parse_int_field(source_name, line_no, "parameters", value));
          break;
        case 6:
          if (value == "yes") {
            record.expected.critical = true;
          } else if (value == "no") {
            record.expected.critical = false;
          } else {
            format_fail(source_name, line_no,
                        "header 'critical' needs yes or no, got '" + value +
                            "'");
          }
          break;
      }
      continue;
    }

    // Ray line: comma-separated component expressions.
    for (int k = 0; k < 7; ++k) {
      if (!have[k]) {
        format_fail(source_name, line_no,
                    std::string("ray line before required header '") +
                        kKeys[k] + "'");
      }
    }
    std::vector<ComplexScalar> components;
    size_t start = 0;
    while (true) {
      const size_t comma = line.find(',', start);
      const std::string piece = line.substr(
          start, comma == std::string::npos ? std::string::npos
                                            : comma - start);
      try {
        components.push_back(parse_component(piece));
      } catch (const Error& e) {
        format_fail(source_name, line_no,
                    "component " + std::to_string(components.size() + 1) +
                        ": " + e.what());
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (static_cast<int>(components.size()) != record.dim) {
      format_fail(source_name, line_no,
                  "ray has " + std::to_string(components.size()) +
                      " components, dim is " + std::to_string(record.dim));
    }
    raw_rays.push_back(std::move(components));
  }

  for (int k = 0; k < 7; ++k) {
    if (!have[k]) {
      throw FormatError(source_name + ": missing header '" +
                        std::string(kKeys[k]) + "'");
    }
  }
  if (record.dim < 2) {
    throw FormatError(source_name + ": dim must be at least 2");
  }
  if (static_cast<int>(raw_rays.size()) != record.expected.vectors) {
    throw FormatError(source_name + ": header claims " +
                      std::to_string(record.expected.vectors) +
                      " vectors but file lists " +
                      std::to_string(raw_rays.size()) + " rays");
  }

  record.rays.reserve(raw_rays.size());
  for (const auto& comps : raw_rays) {
    record.rays.push_back(canonicalize(comps));
  }
  for (size_t i = 0; i < record.rays.size(); ++i) {
    for (size_t j = i + 1; j < record.rays.size(); ++j) {
      if (std::abs(inner_product(record.rays[i], record.rays[j])) >
          kDuplicateTol) {
        throw DuplicateRayError(source_name + ": rays " + std::to_string(i) +
                                " and " + std::to_string(j) +
                                " are the same projective point");
      }
    }
  }
  return record;
}

KSSetRecord load_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw IoError("read failure on " + path.string());
  }
  return parse_set(buf.str(), path.filename().string());
}

std::string serialize_set(const KSSetRecord& record) {
  std::ostringstream out;
  out << "name: " << record.name << "\n";
  out << "dim: " << record.dim << "\n";
  out << "vectors: " << record.expected.vectors << "\n";
  out << "orthogonalities: " << record.expected.orthogonalities << "\n";
  out << "bases: " << record.expected.bases << "\n";
  out << "parameters: " << record.expected.parameters << "\n";
  out << "critical: " << (record.expected.critical ? "yes" : "no") << "\n";
  char buf[64];
  for (const Ray& ray : record.rays) {
    for (int k = 0; k < ray.dim(); ++k) {
      if (k > 0) out << ",";
      const bool has_origin =
          static_cast<size_t>(k) < ray.origins.size() && !ray.origins[k].empty();
      if (has_origin) {
        out << ray.origins[k];
        continue;
      }
      const double re = ray.v[k].real();
      const double im = ray.v[k].imag();
      std::snprintf(buf, sizeof buf, "%.17g", re);
      if (im == 0.0) {
        out << buf;
      } else if (re == 0.0) {
        std::snprintf(buf, sizeof buf, "%.17g", im);
        out << buf << "*i";
      } else {
        out << buf;
        std::snprintf(buf, sizeof buf, "%.17g", std::abs(im));
        out << (im < 0 ? "-" : "+") << buf << "*i";
      }
    }
    out << "\n";
  }
  return out.str();
}

ValidationReport validate_metadata(const KSSetRecord& record,
                                   const Tolerance& tol) {
  ValidationReport report;
  const OrthoGraph graph = build_graph(record, tol);
  const auto bases = enumerate_bases(graph);
  const auto add = [&report](const char* column, long long expected,
                             long long actual) {
    report.items.push_back(
        ValidationItem{column, expected, actual, expected == actual});
  };
  add("vectors", record.expected.vectors,
      static_cast<long long>(record.rays.size()));
  add("orthogonalities", record.expected.orthogonalities,
      static_cast<long long>(graph.edges.size()));
  add("bases", record.expected.bases, static_cast<long long>(bases.size()));
  report.pass = std::all_of(report.items.begin(), report.items.end(),
                            [](const ValidationItem& i) { return i.pass; });
  return report;
}

}  // namespace ks
