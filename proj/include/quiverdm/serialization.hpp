#pragma once
/// @file serialization.hpp
/// @brief Interchange format for hypercube representations: a single JSON
///        document with explicit [re, im] complex pairs, subsets as sorted
///        integer arrays, matrices row-major with redundant shape fields that
///        are cross-checked on load. The writer is canonical — fixed key
///        order, 17-significant-digit floats — so identical documents produce
///        identical bytes.

#include <quiverdm/quiver.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace quiverdm {

/// Format version written and accepted by this library.
inline constexpr int kFormatVersion = 1;

/// @brief A representation together with free-form metadata (seeds, command
/// provenance). This is the unit the CLI reads and writes.
struct RepDocument {
  QuiverRep rep;
  std::map<std::string, std::string> metadata;
};

namespace detail {

/// 17 significant digits: the shortest fixed precision that round-trips every
/// finite double exactly through decimal.
[[nodiscard]] inline std::string format_double(double v) {
  if (!std::isfinite(v))
    throw DomainError("serialize: non-finite entry cannot be encoded");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[nodiscard]] inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline void write_subset(std::ostream& os, VertexId v, int n) {
  os << '[';
  bool first = true;
  for (int i = 1; i <= n; ++i)
    if (subset_contains(v, i)) {
      if (!first) os << ", ";
      os << i;
      first = false;
    }
  os << ']';
}

inline void write_matrix(std::ostream& os, const CMat& m) {
  os << "{\"shape\": [" << m.rows() << ", " << m.cols() << "], \"data\": [";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r > 0) os << ", ";
    os << '[';
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ", ";
      os << '[' << format_double(m(r, c).real()) << ", "
         << format_double(m(r, c).imag()) << ']';
    }
    os << ']';
  }
  os << "]}";
}

/// Context-tagged strict accessors over the parsed tree.

[[nodiscard]] inline const nlohmann::json& need(const nlohmann::json& obj,
                                                const char* key,
                                                const std::string& ctx) {
  if (!obj.is_object())
    throw ParseError("document: " + ctx + " is not an object");
  const auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError("document: " + ctx + " is missing key \"" + key + "\"");
  return *it;
}

[[nodiscard]] inline long long need_int(const nlohmann::json& obj,
                                        const char* key,
                                        const std::string& ctx) {
  const nlohmann::json& v = need(obj, key, ctx);
  if (!v.is_number_integer())
    throw ParseError("document: " + ctx + "." + key + " is not an integer");
  return v.get<long long>();
}

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& ctx) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known)
      throw ParseError("document: " + ctx + " has unknown key \"" +
                       item.key() + "\"");
  }
}

[[nodiscard]] inline VertexId parse_subset(const nlohmann::json& arr, int n,
                                           const std::string& ctx) {
  if (!arr.is_array())
    throw ParseError("document: " + ctx + " is not an array");
  VertexId mask = 0;
  long long prev = 0;
  for (const auto& e : arr) {
    if (!e.is_number_integer())
      throw ParseError("document: " + ctx + " contains a non-integer");
    const long long i = e.get<long long>();
    if (i < 1 || i > n)
      throw ParseError("document: " + ctx + " element " + std::to_string(i) +
                       " is outside 1.." + std::to_string(n));
    if (i <= prev)
      throw ParseError("document: " + ctx +
                       " must be strictly increasing without repeats");
    prev = i;
    mask = subset_with(mask, static_cast<int>(i));
  }
  return mask;
}

[[nodiscard]] inline CMat parse_matrix(const nlohmann::json& obj,
                                       const std::string& ctx) {
  reject_unknown_keys(obj, {"shape", "data"}, ctx);
  const nlohmann::json& shape = need(obj, "shape", ctx);
  if (!shape.is_array() || shape.size() != 2 ||
      !shape[0].is_number_integer() || !shape[1].is_number_integer())
    throw ParseError("document: " + ctx +
                     ".shape must be a [rows, cols] integer pair");
  const long long rows = shape[0].get<long long>();
  const long long cols = shape[1].get<long long>();
  if (rows < 0 || cols < 0 || rows > 100000 || cols > 100000)
    throw ParseError("document: " + ctx + ".shape is out of range");
  const nlohmann::json& data = need(obj, "data", ctx);
  if (!data.is_array() || data.size() != static_cast<std::size_t>(rows))
    throw ParseError("document: " + ctx + ".data must hold " +
                     std::to_string(rows) + " rows");
  CMat m = czero(rows, cols);
  for (long long r = 0; r < rows; ++r) {
    const nlohmann::json& row = data[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(cols))
      throw ParseError("document: " + ctx + ".data row " + std::to_string(r) +
                       " must hold " + std::to_string(cols) + " entries");
    for (long long c = 0; c < cols; ++c) {
      const nlohmann::json& z = row[static_cast<std::size_t>(c)];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() ||
          !z[1].is_number())
        throw ParseError("document: " + ctx + ".data entry (" +
                         std::to_string(r) + ", " + std::to_string(c) +
                         ") must be a [re, im] number pair");
      m(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

}  // namespace detail

/// @brief Render a document as canonical bytes: fixed key order, sorted
/// vertices and edges, 17-significant-digit decimal floats (exact double
/// round-trip). Identical documents always serialize to identical bytes.
[[nodiscard]] inline std::string serialize_rep(const RepDocument& doc) {
  const QuiverRep& r = doc.rep;
  std::ostringstream os;
  os << "{\n";
  os << "  \"format\": " << kFormatVersion << ",\n";
  os << "  \"n\": " << r.n << ",\n";
  os << "  \"vertices\": [\n";
  for (VertexId v = 0; v < r.vertex_count(); ++v) {
    os << "    {\"subset\": ";
    detail::write_subset(os, v, r.n);
    os << ", \"dim\": " << r.dims[v] << '}'
       << (v + 1 < r.vertex_count() ? "," : "") << '\n';
  }
  os << "  ],\n";
  os << "  \"edges\": [";
  bool first_edge = true;
  for (VertexId v = 0; v < r.vertex_count(); ++v)
    for (int i = 1; i <= r.n; ++i) {
      if (subset_contains(v, i)) continue;
      os << (first_edge ? "\n" : ",\n");
      first_edge = false;
      os << "    {\"from\": ";
      detail::write_subset(os, v, r.n);
      os << ", \"i\": " << i << ",\n     \"u\": ";
      detail::write_matrix(os, r.u[v][static_cast<std::size_t>(i - 1)]);
      os << ",\n     \"y\": ";
      detail::write_matrix(os, r.y[v][static_cast<std::size_t>(i - 1)]);
      os << '}';
    }
  os << (first_edge ? "],\n" : "\n  ],\n");
  os << "  \"metadata\": {";
  bool first_meta = true;
  for (const auto& [key, value] : doc.metadata) {
    os << (first_meta ? "\n" : ",\n");
    first_meta = false;
    os << "    \"" << detail::json_escape(key) << "\": \""
       << detail::json_escape(value) << '"';
  }
  os << (first_meta ? "}\n" : "\n  }\n");
  os << "}\n";
  return os.str();
}

/// @brief Parse a document, enforcing the full format contract: version 1,
/// complete hypercube coverage with each vertex and edge listed exactly once,
/// sorted subsets, shape fields cross-checked against vertex dimensions, no
/// unknown keys.
/// @throws ParseError naming the offending location (byte position for
/// syntax errors, document path for structural ones).
[[nodiscard]] inline RepDocument parse_rep(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("parse: ") + e.what());
  }
  if (!root.is_object())
    throw ParseError("document: top level is not an object");
  detail::reject_unknown_keys(
      root, {"format", "n", "vertices", "edges", "metadata"}, "top level");

  const long long format = detail::need_int(root, "format", "top level");
  if (format != kFormatVersion)
    throw ParseError("document: format version " + std::to_string(format) +
                     " is not supported (expected " +
                     std::to_string(kFormatVersion) + ")");
  const long long n = detail::need_int(root, "n", "top level");
  if (n < 0 || n > kMaxCubeDim)
    throw ParseError("document: n = " + std::to_string(n) +
                     " is outside 0.." + std::to_string(kMaxCubeDim));

  RepDocument doc;
  QuiverRep& rep = doc.rep;
  rep.n = static_cast<int>(n);
  const std::size_t vertex_count = std::size_t{1} << rep.n;
  rep.dims.assign(vertex_count, -1);
  rep.u.assign(vertex_count, std::vector<CMat>(static_cast<std::size_t>(n)));
  rep.y.assign(vertex_count, std::vector<CMat>(static_cast<std::size_t>(n)));

  const nlohmann::json& vertices = detail::need(root, "vertices", "top level");
  if (!vertices.is_array() || vertices.size() != vertex_count)
    throw ParseError("document: vertices must list all " +
                     std::to_string(vertex_count) + " subsets");
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    const std::string ctx = "vertices[" + std::to_string(k) + "]";
    const nlohmann::json& entry = vertices[k];
    if (!entry.is_object())
      throw ParseError("document: " + ctx + " is not an object");
    detail::reject_unknown_keys(entry, {"subset", "dim"}, ctx);
    const VertexId v = detail::parse_subset(detail::need(entry, "subset", ctx),
                                            rep.n, ctx + ".subset");
    const long long dim = detail::need_int(entry, "dim", ctx);
    if (dim < 0)
      throw ParseError("document: " + ctx + ".dim is negative");
    if (rep.dims[v] >= 0)
      throw ParseError("document: subset " + subset_to_string(v, rep.n) +
                       " is listed twice in vertices");
    rep.dims[v] = static_cast<Eigen::Index>(dim);
  }

  const nlohmann::json& edges = detail::need(root, "edges", "top level");
  if (!edges.is_array())
    throw ParseError("document: edges is not an array");
  std::vector<std::vector<bool>> seen(
      vertex_count, std::vector<bool>(static_cast<std::size_t>(n), false));
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string ctx = "edges[" + std::to_string(k) + "]";
    const nlohmann::json& entry = edges[k];
    if (!entry.is_object())
      throw ParseError("document: " + ctx + " is not an object");
    detail::reject_unknown_keys(entry, {"from", "i", "u", "y"}, ctx);
    const VertexId v = detail::parse_subset(detail::need(entry, "from", ctx),
                                            rep.n, ctx + ".from");
    const long long i = detail::need_int(entry, "i", ctx);
    if (i < 1 || i > n)
      throw ParseError("document: " + ctx + ".i is outside 1.." +
                       std::to_string(n));
    if (subset_contains(v, static_cast<int>(i)))
      throw ParseError("document: " + ctx + " direction i = " +
                       std::to_string(i) + " is already in the from-subset");
    const auto slot = static_cast<std::size_t>(i - 1);
    if (seen[v][slot])
      throw ParseError("document: edge (" + subset_to_string(v, rep.n) +
                       ", i=" + std::to_string(i) + ") is listed twice");
    seen[v][slot] = true;
    const VertexId w = subset_with(v, static_cast<int>(i));
    const CMat u = detail::parse_matrix(detail::need(entry, "u", ctx),
                                        ctx + ".u");
    const CMat y = detail::parse_matrix(detail::need(entry, "y", ctx),
                                        ctx + ".y");
    if (u.rows() != rep.dims[w] || u.cols() != rep.dims[v])
      throw ParseError("document: " + ctx + ".u shape does not match vertex "
                       "dims (expected " + std::to_string(rep.dims[w]) + "x" +
                       std::to_string(rep.dims[v]) + ")");
    if (y.rows() != rep.dims[v] || y.cols() != rep.dims[w])
      throw ParseError("document: " + ctx + ".y shape does not match vertex "
                       "dims (expected " + std::to_string(rep.dims[v]) + "x" +
                       std::to_string(rep.dims[w]) + ")");
    rep.u[v][slot] = u;
    rep.y[v][slot] = y;
  }
  for (VertexId v = 0; v < vertex_count; ++v)
    for (int i = 1; i <= rep.n; ++i)
      if (!subset_contains(v, i) && !seen[v][static_cast<std::size_t>(i - 1)])
        throw ParseError("document: edge (" + subset_to_string(v, rep.n) +
                         ", i=" + std::to_string(i) + ") is missing");

  if (root.contains("metadata")) {
    const nlohmann::json& meta = root["metadata"];
    if (!meta.is_object())
      throw ParseError("document: metadata is not an object");
    for (const auto& item : meta.items()) {
      if (!item.value().is_string())
        throw ParseError("document: metadata value for \"" + item.key() +
                         "\" is not a string");
      doc.metadata[item.key()] = item.value().get<std::string>();
    }
  }
  return doc;
}

/// @brief Read and parse a document from disk.
/// @throws ParseError if the file cannot be read or fails to parse.
[[nodiscard]] inline RepDocument read_rep_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("io: cannot open \"" + path + "\" for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ParseError("io: failed while reading \"" + path + "\"");
  return parse_rep(buf.str());
}

/// @brief Serialize and write a document to disk (canonical bytes).
/// @throws ParseError if the file cannot be written.
inline void write_rep_file(const std::string& path, const RepDocument& doc) {
  const std::string bytes = serialize_rep(doc);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("io: cannot open \"" + path + "\" for writing");
  out << bytes;
  out.flush();
  if (!out) throw ParseError("io: failed while writing \"" + path + "\"");
}

}  // namespace quiverdm
