// SPDX-License-Identifier: MIT
//
// Report rendering: canonical JSON, CSV tables, and plain-text summaries.
//
// Canonical JSON is byte-deterministic for a given report: object keys are
// emitted in sorted order, floating-point numbers are printed with %.12g,
// and non-finite values become the strings "Infinity", "-Infinity", "NaN"
// (plain JSON has no spelling for them).  Two runs of the same scenario with
// the same seed produce byte-identical output, which the regression tests
// rely on.
#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "infergap/error.hpp"
#include "infergap/numerics.hpp"

namespace infergap {

inline constexpr const char* kToolName = "infergap";
inline constexpr const char* kToolVersion = "1.0.0";

inline std::string format_real(double x) {
  if (std::isnan(x)) return "\"NaN\"";
  if (std::isinf(x)) return x > 0 ? "\"Infinity\"" : "\"-Infinity\"";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

inline void emit_canonical(const nlohmann::json& j, std::string& out) {
  using value_t = nlohmann::json::value_t;
  switch (j.type()) {
    case value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& item : j.items()) {  // keys already sorted (std::map)
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(item.key()).dump();
        out += ':';
        emit_canonical(item.value(), out);
      }
      out += '}';
      break;
    }
    case value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : j) {
        if (!first) out += ',';
        first = false;
        emit_canonical(item, out);
      }
      out += ']';
      break;
    }
    case value_t::number_float:
      out += format_real(j.get<double>());
      break;
    case value_t::number_integer:
      out += std::to_string(j.get<long long>());
      break;
    case value_t::number_unsigned:
      out += std::to_string(j.get<unsigned long long>());
      break;
    case value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case value_t::string:
      out += j.dump();
      break;
    default:
      out += "null";
      break;
  }
}

inline std::string canonical_json(const nlohmann::json& j) {
  std::string out;
  emit_canonical(j, out);
  out += '\n';
  return out;
}

// ---------------------------------------------------------------------------
// CSV.

inline std::string csv_escape(const std::string& field) {
  bool needs_quoting = false;
  for (char c : field)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') needs_quoting = true;
  if (!needs_quoting) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string to_csv(const std::vector<std::string>& header,
                          const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(header[i]);
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      fail(errc::internal, "csv: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Text.

inline void emit_text(const nlohmann::json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (j.is_object()) {
    for (const auto& item : j.items()) {
      if (item.value().is_object() || (item.value().is_array() && !item.value().empty() &&
                                       (item.value().front().is_object() ||
                                        item.value().front().is_array()))) {
        out += pad + item.key() + ":\n";
        emit_text(item.value(), out, indent + 1);
      } else {
        out += pad + item.key() + ": ";
        std::string flat;
        emit_canonical(item.value(), flat);
        out += flat + "\n";
      }
    }
  } else if (j.is_array()) {
    for (const auto& item : j) {
      if (item.is_object() || item.is_array()) {
        out += pad + "-\n";
        emit_text(item, out, indent + 1);
      } else {
        std::string flat;
        emit_canonical(item, flat);
        out += pad + "- " + flat + "\n";
      }
    }
  } else {
    std::string flat;
    emit_canonical(j, flat);
    out += pad + flat + "\n";
  }
}

inline std::string to_text(const nlohmann::json& j) {
  std::string out;
  emit_text(j, out, 0);
  return out;
}

// ---------------------------------------------------------------------------
// JSON builders for common value shapes.

inline nlohmann::json json_vec(const Vec& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(x);
  return out;
}

inline nlohmann::json json_matrix(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows; ++i) out.push_back(json_vec(m.row(i)));
  return out;
}

}  // namespace infergap
