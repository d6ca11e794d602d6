// ks: Kochen-Specker set verification tool.
//
// Subcommands: verify, table1, color, rigidity, flex, dot.  All analyses are
// deterministic under a fixed --seed; timings are printed to standard error
// so machine-readable output stays byte-identical across runs.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "ks/catalog.hpp"
#include "ks/color.hpp"
#include "ks/errors.hpp"
#include "ks/graph.hpp"
#include "ks/report.hpp"
#include "ks/rigidity.hpp"

namespace {

struct CommonOpts {
  ks::Tolerance tol;
  std::uint64_t seed = 1;
  std::string format = "text";
  int basis_index = 0;
};

void add_common_flags(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--tolerance-ortho", opts->tol.ortho_tol,
                  "orthogonality tolerance on normalized inner products")
      ->capture_default_str();
  cmd->add_option("--rank-tol", opts->tol.rank_tol,
                  "relative singular-value threshold for rank decisions")
      ->capture_default_str();
  cmd->add_option("--gap-min", opts->tol.gap_min,
                  "minimum kept/discarded singular-value ratio for a "
                  "conclusive rank")
      ->capture_default_str();
  cmd->add_option("--seed", opts->seed, "random seed for stochastic analyses")
      ->capture_default_str();
  cmd->add_option("--format", opts->format, "output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  cmd->add_option("--basis-index", opts->basis_index,
                  "index (in lexicographic basis order) of the basis pinned "
                  "to the standard basis")
      ->capture_default_str();
}

class Timer {
 public:
  explicit Timer(std::string label) : label_(std::move(label)) {}
  ~Timer() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    std::cerr << label_ << ": " << ms << " ms\n";
  }

 private:
  std::string label_;
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

int cmd_verify(const std::string& path, const CommonOpts& opts) {
  Timer timer("verify " + path);
  const ks::KSSetRecord set = ks::load_set(path);
  const ks::VerifyReport report =
      ks::build_verify_report(set, opts.tol, opts.seed, opts.basis_index);
  if (opts.format == "json") {
    std::cout << ks::verify_report_json(report).dump(2) << "\n";
  } else {
    std::cout << ks::verify_report_text(report);
  }
  return report.all_pass ? 0 : 1;
}

int cmd_table1(const std::string& dir, const CommonOpts& opts) {
  Timer timer("table1 " + dir);
  ks::TableDocument doc;
  doc.tol = opts.tol;
  doc.seed = opts.seed;
  for (const auto& name : ks::canonical_set_names()) {
    const std::filesystem::path path =
        std::filesystem::path(dir) / (name + ".ks");
    if (!std::filesystem::exists(path)) {
      doc.missing_files.push_back(name);
      continue;
    }
    const ks::KSSetRecord set = ks::load_set(path);
    doc.rows.push_back(
        ks::build_verify_report(set, opts.tol, opts.seed, opts.basis_index));
  }
  std::sort(doc.rows.begin(), doc.rows.end(),
            [](const ks::VerifyReport& a, const ks::VerifyReport& b) {
              return a.set_name < b.set_name;
            });
  doc.all_pass = !doc.rows.empty() && doc.missing_files.empty();
  for (const auto& row : doc.rows) doc.all_pass = doc.all_pass && row.all_pass;
  if (opts.format == "json") {
    std::cout << ks::table_json(doc).dump(2) << "\n";
  } else {
    std::cout << ks::table_text(doc);
  }
  if (doc.rows.empty()) return 2;
  return doc.all_pass ? 0 : 1;
}

int cmd_color(const std::string& path, const CommonOpts& opts, bool critical) {
  Timer timer("color " + path);
  const ks::KSSetRecord set = ks::load_set(path);
  const ks::OrthoGraph graph = ks::build_graph(set, opts.tol);
  const auto bases = ks::enumerate_bases(graph);
  const auto [coloring, stats] = ks::find_ks_coloring(graph, bases);
  std::optional<ks::CriticalityReport> crit;
  if (critical && !coloring.has_value()) {
    crit = ks::check_critical(graph, bases);
  }
  if (opts.format == "json") {
    nlohmann::json j;
    j["set"] = set.name;
    j["colourable"] = coloring.has_value();
    if (coloring) {
      j["coloring"] = coloring->values;
    } else {
      j["coloring"] = nullptr;
    }
    j["search"] = {{"nodes_explored", stats.nodes_explored},
                   {"propagations", stats.propagations}};
    if (crit) {
      j["critical"] = crit->critical;
      auto arr = nlohmann::json::array();
      for (const auto& d : crit->deletions) {
        arr.push_back({{"vertex", d.vertex},
                       {"colourable",
                        d.result == ks::ColorResult::COLOURABLE}});
      }
      j["deletions"] = std::move(arr);
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "set: " << set.name << "\n";
    std::cout << "colourable: " << (coloring ? "yes" : "no") << "\n";
    if (coloring) {
      std::cout << "coloring:";
      for (int v : coloring->values) std::cout << " " << v;
      std::cout << "\n";
    }
    std::cout << "search: " << stats.nodes_explored << " nodes, "
              << stats.propagations << " propagations\n";
    if (crit) {
      std::cout << "critical: " << (crit->critical ? "yes" : "no") << "\n";
      if (!crit->critical) {
        for (const auto& d : crit->deletions) {
          if (d.result == ks::ColorResult::UNCOLOURABLE) {
            std::cout << "non-destroying deletion: vertex " << d.vertex
                      << "\n";
          }
        }
      }
    }
  }
  return coloring.has_value() ? 1 : 0;
}

int cmd_rigidity(const std::string& path, const CommonOpts& opts,
                 bool propagate) {
  Timer timer("rigidity " + path);
  const ks::KSSetRecord set = ks::load_set(path);
  const ks::RigidityReport report =
      ks::parameter_count(set, opts.tol, opts.basis_index);
  std::optional<ks::PropagateResult> prop;
  if (propagate) {
    const ks::OrthoGraph graph = ks::build_graph(set, opts.tol);
    prop = ks::propagate_reconstruct(graph, ks::enumerate_bases(graph),
                                     opts.seed, opts.tol);
  }
  if (opts.format == "json") {
    nlohmann::json j;
    j["set"] = set.name;
    j["n_residues"] = report.n_residues;
    j["n_coords"] = report.n_coords;
    j["rank"] = report.rank;
    j["null_dim"] = report.null_dim;
    j["residual_gauge_dim"] = report.residual_gauge_dim;
    j["parameter_count"] = report.parameter_count;
    j["gap_ratio"] = std::isinf(report.gap_ratio)
                         ? nlohmann::json("inf")
                         : nlohmann::json(report.gap_ratio);
    j["conclusive"] = report.conclusive;
    j["pinned_basis_index"] = report.pinned_basis_index;
    if (report.real_parameter_count) {
      j["real_parameter_count"] = *report.real_parameter_count;
    } else {
      j["real_parameter_count"] = nullptr;
    }
    j["singular_values"] = report.singular_values;
    if (prop) {
      j["propagate"] = {{"parameters_introduced", prop->parameters_introduced},
                        {"raw_parameters", prop->raw_parameters},
                        {"forced_completions", prop->forced_completions},
                        {"junctures", prop->junctures},
                        {"consistency", prop->consistency}};
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "set: " << set.name << "\n";
    std::cout << "parameter_count: " << report.parameter_count << "\n";
    std::cout << "null_dim: " << report.null_dim << "\n";
    std::cout << "residual_gauge_dim: " << report.residual_gauge_dim << "\n";
    std::cout << "rank: " << report.rank << " of " << report.n_coords
              << " coordinates, " << report.n_residues << " residues\n";
    std::cout << "gap_ratio: " << ks::format_double(report.gap_ratio) << " ("
              << (report.conclusive ? "conclusive" : "INCONCLUSIVE") << ")\n";
    if (report.real_parameter_count) {
      std::cout << "real_parameter_count: " << *report.real_parameter_count
                << " (informational)\n";
    }
    if (prop) {
      std::cout << "propagate: " << prop->parameters_introduced
                << " parameters (" << prop->raw_parameters << " raw, "
                << prop->junctures << " junctures, "
                << prop->forced_completions << " forced), consistency "
                << (prop->consistency ? "ok" : "FAILED") << "\n";
    }
  }
  return report.conclusive ? 0 : 1;
}

int cmd_flex(const std::string& path, const CommonOpts& opts, int direction,
             int steps, double step_size, const std::string& out_dir) {
  Timer timer("flex " + path);
  const ks::KSSetRecord set = ks::load_set(path);
  const ks::FlexResult result = ks::flex(set, direction, steps, step_size,
                                         opts.tol, opts.basis_index);
  std::filesystem::create_directories(out_dir);
  for (size_t s = 0; s < result.sets.size(); ++s) {
    ks::KSSetRecord deformed = result.sets[s];
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "-flex-%03zu", s + 1);
    deformed.name = set.name + suffix;
    const std::filesystem::path out_path =
        std::filesystem::path(out_dir) / (deformed.name + ".ks");
    std::ofstream out(out_path);
    if (!out) {
      throw ks::IoError("cannot write " + out_path.string());
    }
    out << ks::serialize_set(deformed);
    std::cout << "step " << (s + 1)
              << ": max residue " << ks::format_double(result.max_residues[s])
              << " -> " << out_path.string() << "\n";
  }
  return 0;
}

int cmd_dot(const std::string& path, const CommonOpts& opts) {
  Timer timer("dot " + path);
  const ks::KSSetRecord set = ks::load_set(path);
  const ks::OrthoGraph graph = ks::build_graph(set, opts.tol);
  std::vector<std::string> labels;
  for (size_t i = 0; i < set.rays.size(); ++i) {
    labels.push_back(std::to_string(i));
  }
  std::cout << ks::to_dot(graph, labels);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kochen-Specker set verifier: orthogonality graphs, "
               "colourability, criticality, and rigidity analysis"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string path;
  std::string dir;
  bool critical = false;
  bool propagate = false;
  int direction = 0;
  int steps = 10;
  double step_size = 0.01;
  std::string out_dir = "flex-out";

  CLI::App* verify = app.add_subcommand(
      "verify", "verify one catalog file against its expected metadata");
  verify->add_option("set", path, "catalog file")->required();
  add_common_flags(verify, &opts);

  CLI::App* table1 = app.add_subcommand(
      "table1", "verify the full catalog and print the summary table");
  table1->add_option("catalog_dir", dir, "directory of catalog files")
      ->required();
  add_common_flags(table1, &opts);

  CLI::App* color = app.add_subcommand(
      "color", "search for a KS colouring of one catalog file");
  color->add_option("set", path, "catalog file")->required();
  color->add_flag("--critical", critical,
                  "also check single-vertex-deletion criticality");
  add_common_flags(color, &opts);

  CLI::App* rigidity = app.add_subcommand(
      "rigidity", "first-order rigidity analysis of one catalog file");
  rigidity->add_option("set", path, "catalog file")->required();
  rigidity->add_flag("--propagate", propagate,
                     "cross-check with sequential reconstruction");
  add_common_flags(rigidity, &opts);

  CLI::App* flex = app.add_subcommand(
      "flex", "numerical continuation along an essential flex direction");
  flex->add_option("set", path, "catalog file")->required();
  flex->add_option("--direction", direction, "essential direction index")
      ->capture_default_str();
  flex->add_option("--steps", steps, "number of continuation steps")
      ->capture_default_str();
  flex->add_option("--step-size", step_size, "predictor step length")
      ->capture_default_str();
  flex->add_option("--out-dir", out_dir, "directory for deformed sets")
      ->capture_default_str();
  add_common_flags(flex, &opts);

  CLI::App* dot = app.add_subcommand(
      "dot", "export the orthogonality graph as DOT text");
  dot->add_option("set", path, "catalog file")->required();
  add_common_flags(dot, &opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is an input error
  }

  try {
    if (verify->parsed()) return cmd_verify(path, opts);
    if (table1->parsed()) return cmd_table1(dir, opts);
    if (color->parsed()) return cmd_color(path, opts, critical);
    if (rigidity->parsed()) return cmd_rigidity(path, opts, propagate);
    if (flex->parsed()) {
      return cmd_flex(path, opts, direction, steps, step_size, out_dir);
    }
    if (dot->parsed()) return cmd_dot(path, opts);
  } catch (const ks::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;  // analysis-level rejection (e.g. rigid set, bad index)
  } catch (const ks::ContinuationStallError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ks::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;  // load / parse / IO problems
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
