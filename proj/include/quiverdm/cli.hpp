#pragma once
/// @file cli.hpp
/// @brief In-process command-line front end: `run_cli` implements the
///        validate / apply / verify / gen commands over the interchange
///        format, printing a human summary plus a machine-readable JSON
///        report line, and mapping errors to the stable exit-code contract
///        (0 pass, 1 semantic failure, 2 parse/io/usage failure).

#include <quiverdm/functors.hpp>
#include <quiverdm/serialization.hpp>
#include <quiverdm/solutions.hpp>

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace quiverdm {

namespace detail {

inline constexpr const char* kUsage =
    "usage: quiverdm <command> [options]\n"
    "\n"
    "commands:\n"
    "  validate <file> [--category qui|c|sigma1] [--tol T]\n"
    "      check hypercube relations and category membership\n"
    "  apply <file> --functor Q|G|D [-o FILE] [--tol T]\n"
    "      apply the exponential (Q), logarithm (G) or transpose-dual (D)\n"
    "      functor and write the image (stdout without -o)\n"
    "  verify <file> --suite pde|canvar|main [--samples N] [--seed S] "
    "[--tol T]\n"
    "      certify the holonomic system (pde), the canonical/variation\n"
    "      identities (canvar) or the full equivalence (main)\n"
    "  gen --n N --dim D[,D...] [--category qui|c|sigma1] [--seed S]\n"
    "      [--nilpotent] [--no-base-change] [-o FILE]\n"
    "      generate a random representation reproducibly from the seed\n"
    "\n"
    "exit codes: 0 success, 1 semantic failure, 2 parse/io/usage error\n";

struct CliOptions {
  std::string command;
  std::string path;       // input file (validate/apply/verify)
  std::string out_path;   // -o
  std::string category = "qui";
  bool category_given = false;
  std::string functor;
  std::string suite;
  double tol = -1.0;      // <0 means "use the command default"
  int samples = 8;
  std::uint64_t seed = 0;
  int n = -1;
  std::string dim;
  bool nilpotent = false;
  bool base_change = true;
  bool help = false;
};

[[nodiscard]] inline CliOptions parse_cli_args(
    const std::vector<std::string>& args) {
  CliOptions o;
  if (args.empty()) throw ParseError("args: no command given");
  std::size_t k = 0;
  if (args[0] == "--help" || args[0] == "-h") {
    o.help = true;
    return o;
  }
  o.command = args[k++];
  if (o.command != "validate" && o.command != "apply" &&
      o.command != "verify" && o.command != "gen")
    throw ParseError("args: unknown command \"" + o.command + "\"");

  const auto value = [&](const std::string& flag) -> std::string {
    if (k >= args.size())
      throw ParseError("args: flag " + flag + " needs a value");
    return args[k++];
  };
  while (k < args.size()) {
    const std::string a = args[k++];
    try {
      if (a == "--help" || a == "-h") o.help = true;
      else if (a == "--category") { o.category = value(a); o.category_given = true; }
      else if (a == "--functor") o.functor = value(a);
      else if (a == "--suite") o.suite = value(a);
      else if (a == "--tol") o.tol = std::stod(value(a));
      else if (a == "--samples") o.samples = std::stoi(value(a));
      else if (a == "--seed") o.seed = std::stoull(value(a));
      else if (a == "--n") o.n = std::stoi(value(a));
      else if (a == "--dim") o.dim = value(a);
      else if (a == "--nilpotent") o.nilpotent = true;
      else if (a == "--no-base-change") o.base_change = false;
      else if (a == "-o" || a == "--output") o.out_path = value(a);
      else if (!a.empty() && a[0] == '-')
        throw ParseError("args: unknown flag \"" + a + "\"");
      else if (o.path.empty()) o.path = a;
      else throw ParseError("args: unexpected extra argument \"" + a + "\"");
    } catch (const std::invalid_argument&) {
      throw ParseError("args: flag " + a + " has a malformed numeric value");
    } catch (const std::out_of_range&) {
      throw ParseError("args: flag " + a + " has an out-of-range value");
    }
  }
  if (o.tol == 0.0 || (o.tol > 0 && !std::isfinite(o.tol)))
    throw ParseError("args: --tol must be a positive finite number");
  if (o.samples < 1) throw ParseError("args: --samples must be at least 1");
  return o;
}

[[nodiscard]] inline Category category_from_name(const std::string& name) {
  if (name == "qui") return Category::Qui;
  if (name == "c") return Category::C;
  if (name == "sigma1") return Category::Sigma1;
  throw ParseError("args: unknown category \"" + name +
                   "\" (expected qui, c or sigma1)");
}

/// Machine-readable single-line JSON report with canonical float encoding.
inline void write_report_json(std::ostream& os, const std::string& command,
                              const std::vector<std::pair<std::string,
                                                          std::string>>& extra,
                              const ValidationReport& report) {
  os << "{\"command\": \"" << json_escape(command) << '"';
  for (const auto& [key, val] : extra)
    os << ", \"" << json_escape(key) << "\": \"" << json_escape(val) << '"';
  os << ", \"passed\": " << (report.passed ? "true" : "false");
  os << ", \"tol\": " << format_double(report.tol);
  os << ", \"seed\": " << report.seed;
  os << ", \"samples\": " << report.samples;
  os << ", \"checks\": [";
  for (std::size_t i = 0; i < report.checks.size(); ++i) {
    const CheckEntry& e = report.checks[i];
    os << (i ? ", " : "") << "{\"tag\": \"" << json_escape(e.tag)
       << "\", \"where\": \"" << json_escape(e.where)
       << "\", \"residual\": " << format_double(e.residual)
       << ", \"passed\": " << (e.passed ? "true" : "false")
       << ", \"note\": \"" << json_escape(e.note) << "\"}";
  }
  os << "]}\n";
}

/// Human summary: violations in full, passes as a count, tol/seed echoed.
inline void print_report(std::ostream& os, const std::string& command,
                         const std::vector<std::pair<std::string,
                                                     std::string>>& extra,
                         const ValidationReport& report) {
  os << command;
  for (const auto& [key, val] : extra) os << " | " << key << " " << val;
  os << '\n';
  os << "tol " << report.tol << ", seed " << report.seed << ", samples "
     << report.samples << '\n';
  const auto bad = report.violations();
  for (const CheckEntry& e : bad) {
    os << "  [FAIL] " << e.tag;
    if (!e.where.empty()) os << " at " << e.where;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", e.residual);
    os << ": residual " << buf;
    if (!e.note.empty()) os << "  (" << e.note << ')';
    os << '\n';
  }
  os << "checks: " << report.checks.size() << ", violations: " << bad.size()
     << '\n';
  os << "result: " << (report.passed ? "PASS" : "FAIL") << '\n';
  write_report_json(os, command, extra, report);
}

[[nodiscard]] inline int cmd_validate(const CliOptions& o, std::ostream& out) {
  if (o.path.empty()) throw ParseError("args: validate needs an input file");
  const Category cat = category_from_name(o.category);
  const double tol = o.tol > 0 ? o.tol : 1e-9;
  const RepDocument doc = read_rep_file(o.path);
  const ValidationReport report = validate(doc.rep, cat, tol);
  print_report(out, "validate", {{"category", o.category}}, report);
  return report.passed ? 0 : 1;
}

[[nodiscard]] inline int cmd_apply(const CliOptions& o, std::ostream& out) {
  if (o.path.empty()) throw ParseError("args: apply needs an input file");
  if (o.functor.empty())
    throw ParseError("args: apply needs --functor Q|G|D");
  const double tol = o.tol > 0 ? o.tol : 1e-9;
  RepDocument doc = read_rep_file(o.path);
  if (o.functor == "Q") doc.rep = functor_Q(doc.rep, tol);
  else if (o.functor == "G") doc.rep = functor_G(doc.rep, tol);
  else if (o.functor == "D") {
    require_category(doc.rep, Category::Qui, "apply D", tol);
    doc.rep = dualize(doc.rep);
  } else {
    throw ParseError("args: unknown functor \"" + o.functor +
                     "\" (expected Q, G or D)");
  }
  if (o.out_path.empty()) {
    out << serialize_rep(doc);
  } else {
    write_rep_file(o.out_path, doc);
    out << "wrote " << o.out_path << '\n';
  }
  return 0;
}

[[nodiscard]] inline int cmd_verify(const CliOptions& o, std::ostream& out) {
  if (o.path.empty()) throw ParseError("args: verify needs an input file");
  if (o.suite != "pde" && o.suite != "canvar" && o.suite != "main")
    throw ParseError("args: verify needs --suite pde|canvar|main (got \"" +
                     o.suite + "\")");
  const double tol = o.tol > 0 ? o.tol : (o.suite == "main" ? 1e-7 : 1e-9);
  const RepDocument doc = read_rep_file(o.path);
  const QuiverRep& r = doc.rep;

  ValidationReport report;
  report.tol = tol;
  report.seed = o.seed;
  report.samples = o.samples;
  std::uint64_t subseed = o.seed;
  if (o.suite == "pde") {
    for (VertexId v = 0; v < r.vertex_count(); ++v)
      report.absorb(
          verify_pde(r, v, cid(r.dims[v]), o.samples, subseed++, tol));
  } else if (o.suite == "canvar") {
    for (VertexId v = 0; v < r.vertex_count(); ++v)
      for (int i = 1; i <= r.n; ++i) {
        if (subset_contains(v, i)) continue;
        const VertexId w = subset_with(v, i);
        report.absorb(
            verify_can(r, v, i, cid(r.dims[v]), tol, o.samples, subseed++));
        report.absorb(
            verify_var(r, v, i, cid(r.dims[w]), tol, o.samples, subseed++));
      }
  } else {
    report.absorb(verify_main_theorem(r, 1, o.seed, tol));
  }
  report.tol = tol;
  report.seed = o.seed;
  report.samples = o.samples;
  print_report(out, "verify", {{"suite", o.suite}}, report);
  return report.passed ? 0 : 1;
}

[[nodiscard]] inline int cmd_gen(const CliOptions& o, std::ostream& out) {
  if (o.n < 1)
    throw ParseError("args: gen needs --n with a positive cube dimension");
  if (o.n > kMaxCubeDim)
    throw ParseError("args: --n exceeds the supported maximum of " +
                     std::to_string(kMaxCubeDim));
  if (o.dim.empty()) throw ParseError("args: gen needs --dim");
  std::vector<Eigen::Index> dims;
  std::stringstream ss(o.dim);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    try {
      dims.push_back(static_cast<Eigen::Index>(std::stoll(piece)));
    } catch (const std::exception&) {
      throw ParseError("args: --dim entry \"" + piece +
                       "\" is not an integer");
    }
    if (dims.back() < 1)
      throw ParseError("args: --dim entries must be at least 1");
  }
  if (dims.size() == 1)
    dims.assign(static_cast<std::size_t>(o.n), dims[0]);
  if (dims.size() != static_cast<std::size_t>(o.n))
    throw ParseError("args: --dim needs one value or exactly n values");

  const Category cat = category_from_name(o.category_given ? o.category
                                                           : "sigma1");
  GenOptions gen_opts;
  gen_opts.nilpotent = o.nilpotent;
  gen_opts.base_change = o.base_change;

  RepDocument doc;
  doc.rep = generate(o.n, dims, cat, o.seed, gen_opts);
  doc.metadata["command"] = "gen";
  doc.metadata["category"] = o.category_given ? o.category : "sigma1";
  doc.metadata["seed"] = std::to_string(o.seed);
  doc.metadata["n"] = std::to_string(o.n);
  doc.metadata["dim"] = o.dim;
  if (o.nilpotent) doc.metadata["nilpotent"] = "true";
  if (!o.base_change) doc.metadata["base_change"] = "false";

  if (o.out_path.empty()) {
    out << serialize_rep(doc);
  } else {
    write_rep_file(o.out_path, doc);
    out << "wrote " << o.out_path << '\n';
  }
  return 0;
}

}  // namespace detail

/// @brief Run one CLI invocation in-process. `args` excludes the program
/// name. Human output and the machine report line go to `out`, error
/// messages to `err`. Returns the process exit code: 0 success, 1 semantic
/// failure (failed validation/verification, category mismatch), 2 malformed
/// arguments, unreadable or malformed files.
[[nodiscard]] inline int run_cli(const std::vector<std::string>& args,
                                 std::ostream& out, std::ostream& err) {
  try {
    const detail::CliOptions o = detail::parse_cli_args(args);
    if (o.help) {
      out << detail::kUsage;
      return 0;
    }
    if (o.command == "validate") return detail::cmd_validate(o, out);
    if (o.command == "apply") return detail::cmd_apply(o, out);
    if (o.command == "verify") return detail::cmd_verify(o, out);
    return detail::cmd_gen(o, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n' << detail::kUsage;
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: unexpected failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace quiverdm
