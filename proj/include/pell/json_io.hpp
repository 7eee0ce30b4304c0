#pragma once

// JSON schema (version 1) for tensors and fields.
//
//   tensor: {"schema": 1, "n": n, "m": m, "entries": E}
//   field:  {"schema": 1, "n": n, "m": m, "grid": [N_1..N_n], "periodic": b,
//            "samples": [E_0, E_1, ...]}
//
// E is nested as E[h][k][alpha][beta] = [re, im], 0-indexed. Field samples
// are row-major over the lattice, axis 0 slowest. Infinity is written as
// the string "inf".

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pell/error.hpp"
#include "pell/p_range.hpp"
#include "pell/tensor.hpp"

namespace pell::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

inline double read_number_or_inf(const json& j, const std::string& what) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  if (!j.is_number()) throw InputError(what + ": expected a number or \"inf\"");
  return j.get<double>();
}

/// Reads a file, or stdin for "-".
inline std::string read_source(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Parses JSON text; syntax errors become InputError "source:line:column: ...".
inline json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << source << ":" << line << ":" << column << ": JSON syntax error";
    throw InputError(msg.str());
  }
}

namespace detail {

inline const json& member(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline int read_int(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_number_integer()) throw InputError(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

inline void check_schema(const json& j) {
  const json& s = member(j, "schema");
  if (!s.is_number_integer() || s.get<int>() != kSchemaVersion)
    throw InputError("unsupported schema version (expected 1)");
}

inline void expect_array(const json& j, std::size_t size, const std::string& where) {
  if (!j.is_array() || j.size() != size)
    throw InputError(where + ": expected an array of length " + std::to_string(size));
}

inline CoefficientTensor entries_from_json(const json& e, int n, int m, const std::string& where) {
  std::vector<cplx> values;
  values.reserve(static_cast<std::size_t>(n * n * m * m));
  expect_array(e, static_cast<std::size_t>(n), where);
  for (int h = 0; h < n; ++h) {
    const std::string wh = where + "[" + std::to_string(h) + "]";
    expect_array(e[h], static_cast<std::size_t>(n), wh);
    for (int k = 0; k < n; ++k) {
      const std::string wk = wh + "[" + std::to_string(k) + "]";
      expect_array(e[h][k], static_cast<std::size_t>(m), wk);
      for (int a = 0; a < m; ++a) {
        const std::string wa = wk + "[" + std::to_string(a) + "]";
        expect_array(e[h][k][a], static_cast<std::size_t>(m), wa);
        for (int b = 0; b < m; ++b) {
          const json& z = e[h][k][a][b];
          const std::string wb = wa + "[" + std::to_string(b) + "]";
          expect_array(z, 2, wb);
          if (!z[0].is_number() || !z[1].is_number()) throw InputError(wb + ": entries must be [re, im] numbers");
          values.emplace_back(z[0].get<double>(), z[1].get<double>());
        }
      }
    }
  }
  return CoefficientTensor(n, m, std::move(values));
}

}  // namespace detail

inline json entries_to_json(const CoefficientTensor& a) {
  json e = json::array();
  for (int h = 0; h < a.n(); ++h) {
    json eh = json::array();
    for (int k = 0; k < a.n(); ++k) {
      json ek = json::array();
      for (int al = 0; al < a.m(); ++al) {
        json ea = json::array();
        for (int be = 0; be < a.m(); ++be) ea.push_back({a(h, k, al, be).real(), a(h, k, al, be).imag()});
        ek.push_back(std::move(ea));
      }
      eh.push_back(std::move(ek));
    }
    e.push_back(std::move(eh));
  }
  return e;
}

inline json tensor_to_json(const CoefficientTensor& a) {
  return json{{"schema", kSchemaVersion}, {"n", a.n()}, {"m", a.m()}, {"entries", entries_to_json(a)}};
}

inline CoefficientTensor tensor_from_json(const json& j) {
  detail::check_schema(j);
  const int n = detail::read_int(j, "n"), m = detail::read_int(j, "m");
  if (n < 1 || m < 1) throw InputError("n and m must be >= 1");
  return detail::entries_from_json(detail::member(j, "entries"), n, m, "entries");
}

inline json field_to_json(const TensorField& f) {
  if (f.is_constant()) return tensor_to_json(f.sample(0));
  json samples = json::array();
  for (std::size_t i = 0; i < f.sample_count(); ++i) samples.push_back(entries_to_json(f.sample(i)));
  return json{{"schema", kSchemaVersion}, {"n", f.n()},        {"m", f.m()},
              {"grid", f.grid()},         {"periodic", f.periodic()}, {"samples", std::move(samples)}};
}

/// A tensor document becomes a constant field; a document with "samples"
/// becomes a sampled field.
inline TensorField field_from_json(const json& j) {
  if (!j.is_object()) throw InputError("top-level JSON value must be an object");
  if (!j.contains("samples")) return TensorField(tensor_from_json(j));
  detail::check_schema(j);
  const int n = detail::read_int(j, "n"), m = detail::read_int(j, "m");
  if (n < 1 || m < 1) throw InputError("n and m must be >= 1");
  const json& grid = detail::member(j, "grid");
  if (!grid.is_array()) throw InputError("\"grid\" must be an array");
  TensorField::Sampled s;
  for (const auto& g : grid) {
    if (!g.is_number_integer()) throw InputError("\"grid\" entries must be integers");
    s.grid.push_back(g.get<int>());
  }
  const json& per = j.contains("periodic") ? j.at("periodic") : json(false);
  if (!per.is_boolean()) throw InputError("\"periodic\" must be a boolean");
  s.periodic = per.get<bool>();
  const json& samples = detail::member(j, "samples");
  if (!samples.is_array()) throw InputError("\"samples\" must be an array");
  for (std::size_t i = 0; i < samples.size(); ++i)
    s.samples.push_back(detail::entries_from_json(samples[i], n, m, "samples[" + std::to_string(i) + "]"));
  return TensorField(std::move(s));
}

inline json range_to_json(const PRange& r) {
  if (r.empty) return json{{"empty", true}};
  return json{{"empty", false},
              {"t_lo", r.t_lo},
              {"t_hi", r.t_hi},
              {"p_lo", number_or_inf(r.p_lo())},
              {"p_hi", number_or_inf(r.p_hi())}};
}

}  // namespace pell::io
