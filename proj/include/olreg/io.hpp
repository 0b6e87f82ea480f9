#pragma once

// File formats: class files, tree files, entropy and regime descriptors.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "olreg/bounds.hpp"
#include "olreg/complexity.hpp"
#include "olreg/core.hpp"
#include "olreg/function_class.hpp"
#include "olreg/tree.hpp"

namespace olreg {

namespace detail {

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

// Line of the first occurrence of "key" used as an object key, 0 if absent.
inline std::size_t line_of_key(std::string_view text, const std::string& key) {
  const std::string quoted = nlohmann::json(key).dump();
  for (std::size_t pos = text.find(quoted); pos != std::string_view::npos;
       pos = text.find(quoted, pos + 1)) {
    std::size_t after = pos + quoted.size();
    while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
    if (after < text.size() && text[after] == ':') return line_of_offset(text, pos);
  }
  return 0;
}

inline nlohmann::ordered_json parse_json(const std::string& text) {
  try {
    return nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(),
                     line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// {"domain_size": m, "functions": {"name": [v_0, ..., v_{m-1}], ...}} with
/// every value in [-1, 1]. Members keep file order.
inline FunctionClass parse_class(const std::string& text) {
  const auto doc = detail::parse_json(text);
  auto fail = [&](const std::string& msg, const std::string& key) -> ParseError {
    return ParseError("class file: " + msg, detail::line_of_key(text, key));
  };
  if (!doc.is_object()) throw ParseError("class file: top level must be an object", 1);
  if (!doc.contains("domain_size")) throw ParseError("class file: missing \"domain_size\"", 1);
  const auto& m = doc["domain_size"];
  if (!m.is_number_integer() || m.get<long long>() < 1)
    throw fail("\"domain_size\" must be a positive integer", "domain_size");
  const auto domain = static_cast<std::size_t>(m.get<long long>());
  if (!doc.contains("functions")) throw ParseError("class file: missing \"functions\"", 1);
  const auto& fns = doc["functions"];
  if (!fns.is_object()) throw fail("\"functions\" must be an object", "functions");

  FunctionClass cls(domain);
  for (const auto& [name, vals] : fns.items()) {
    if (!vals.is_array()) throw fail("function '" + name + "' must be an array", name);
    if (vals.size() != domain)
      throw fail("function '" + name + "' has " + std::to_string(vals.size()) +
                     " values, expected " + std::to_string(domain),
                 name);
    std::vector<double> table;
    for (const auto& v : vals) {
      if (!v.is_number()) throw fail("function '" + name + "' has a non-numeric value", name);
      const double d = v.get<double>();
      if (!(d >= -1.0 && d <= 1.0))
        throw fail("function '" + name + "' has value " + format_real(d) + " outside [-1,1]", name);
      table.push_back(d);
    }
    cls.add(name, std::move(table));
  }
  return cls;
}

inline FunctionClass load_class(const std::string& path) {
  return parse_class(detail::read_file(path));
}

inline std::string class_to_json(const FunctionClass& cls) {
  nlohmann::ordered_json doc;
  doc["domain_size"] = cls.domain_size();
  doc["functions"] = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < cls.size(); ++i)
    doc["functions"][cls.name(i)] =
        std::vector<double>(cls.values(i).begin(), cls.values(i).end());
  return doc.dump(2) + "\n";
}

/// {"depth": n, "labels": [...], "witness": [...]}: covariate labels and an
/// optional witness tree, both in level order. A missing witness is all zeros.
inline ShatteredTree parse_tree(const std::string& text) {
  const auto doc = detail::parse_json(text);
  auto fail = [&](const std::string& msg, const std::string& key) -> ParseError {
    return ParseError("tree file: " + msg, detail::line_of_key(text, key));
  };
  if (!doc.is_object()) throw ParseError("tree file: top level must be an object", 1);
  if (!doc.contains("depth") || !doc["depth"].is_number_integer())
    throw fail("\"depth\" must be an integer", "depth");
  const long long depth = doc["depth"].get<long long>();
  if (depth < 1 || depth > kMaxTreeDepth) throw fail("\"depth\" out of range", "depth");
  const std::size_t nodes = LabeledTree<double>::node_count(static_cast<int>(depth));
  if (!doc.contains("labels") || !doc["labels"].is_array())
    throw fail("\"labels\" must be an array", "labels");
  if (doc["labels"].size() != nodes)
    throw fail("\"labels\" needs " + std::to_string(nodes) + " entries", "labels");
  std::vector<Covariate> labels;
  for (const auto& v : doc["labels"]) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw fail("\"labels\" must hold nonnegative integers", "labels");
    labels.push_back(static_cast<Covariate>(v.get<long long>()));
  }
  std::vector<double> witness(nodes, 0.0);
  if (doc.contains("witness")) {
    const auto& w = doc["witness"];
    if (!w.is_array() || w.size() != nodes)
      throw fail("\"witness\" needs " + std::to_string(nodes) + " numbers", "witness");
    for (std::size_t i = 0; i < nodes; ++i) {
      if (!w[i].is_number()) throw fail("\"witness\" must hold numbers", "witness");
      witness[i] = w[i].get<double>();
    }
  }
  const int d = static_cast<int>(depth);
  return {LabeledTree<Covariate>(d, std::move(labels)), LabeledTree<double>(d, std::move(witness))};
}

inline ShatteredTree load_tree(const std::string& path) {
  return parse_tree(detail::read_file(path));
}

inline std::string tree_to_json(const ShatteredTree& tree) {
  nlohmann::ordered_json doc;
  doc["depth"] = tree.x_tree.depth();
  doc["labels"] = tree.x_tree.labels();
  doc["witness"] = tree.witness.labels();
  return doc.dump() + "\n";
}

// ---------------------------------------------------------------------------
// "kind:key=value,key=value" descriptors

struct Spec {
  std::string kind;
  std::map<std::string, std::string> params;

  double number(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw std::invalid_argument("spec '" + kind + "' needs " + key + "=");
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing text");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("spec '" + kind + "': " + key + " is not a number");
    }
  }
  double number(const std::string& key, double fallback) const {
    return params.count(key) ? number(key) : fallback;
  }
};

inline Spec parse_spec(std::string_view text) {
  Spec s;
  const auto colon = text.find(':');
  s.kind = std::string(text.substr(0, colon));
  if (s.kind.empty()) throw std::invalid_argument("empty descriptor");
  if (colon == std::string_view::npos) return s;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw std::invalid_argument("bad descriptor item '" + std::string(item) + "'");
    s.params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return s;
}

/// CSV of (beta, entropy) rows; a non-numeric first row is a header.
inline std::vector<std::pair<double, double>> parse_entropy_table(const std::string& text) {
  std::vector<std::pair<double, double>> pts;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("entropy table: expected 'beta,entropy'", lineno);
    try {
      std::size_t u1 = 0, u2 = 0;
      const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
      const double beta = std::stod(a, &u1), h = std::stod(b, &u2);
      if (a.find_first_not_of(" \t", u1) != std::string::npos ||
          b.find_first_not_of(" \t", u2) != std::string::npos)
        throw std::invalid_argument("trailing text");
      pts.emplace_back(beta, h);
    } catch (const std::exception&) {
      if (lineno == 1 && pts.empty()) continue;  // header
      throw ParseError("entropy table: non-numeric row", lineno);
    }
  }
  if (pts.empty()) throw ParseError("entropy table: no rows", lineno);
  return pts;
}

/// `power:p=<v>[,scale=<v>]`, `paramlog:d=<v>[,c=<v>]` or `table:path=<csv>`,
/// each with an optional `norm=l2|inf`.
inline EntropyFunction parse_entropy(std::string_view text) {
  const Spec s = parse_spec(text);
  EntropyNorm norm = EntropyNorm::L2;
  if (auto it = s.params.find("norm"); it != s.params.end()) {
    if (it->second == "inf" || it->second == "linf") norm = EntropyNorm::Linf;
    else if (it->second != "l2") throw std::invalid_argument("entropy norm must be l2 or inf");
  }
  if (s.kind == "power") return EntropyFunction::power(s.number("p"), s.number("scale", 1.0), norm);
  if (s.kind == "paramlog") return EntropyFunction::param_log(s.number("d"), s.number("c", 1.0), norm);
  if (s.kind == "table") {
    auto it = s.params.find("path");
    if (it == s.params.end()) throw std::invalid_argument("table entropy needs path=");
    return EntropyFunction::table(parse_entropy_table(detail::read_file(it->second)), norm);
  }
  throw std::invalid_argument("unknown entropy kind '" + s.kind + "'");
}

/// `power:p=<v>`, `paramlog:d=<v>` or `finite:size=<k>` for a horizon n and bound B.
inline RateSpec parse_regime(std::string_view text, std::size_t n, double B) {
  const Spec s = parse_spec(text);
  RateSpec r;
  if (s.kind == "power") r = RateSpec::nonparametric(s.number("p"), n, B);
  else if (s.kind == "paramlog") r = RateSpec::parametric(s.number("d"), n, B);
  else if (s.kind == "finite") {
    const double k = s.number("size");
    if (!(k >= 1.0) || k != std::floor(k)) throw std::invalid_argument("finite size must be a positive integer");
    r = RateSpec::finite(static_cast<std::size_t>(k), n, B);
  } else {
    throw std::invalid_argument("unknown regime '" + s.kind + "'");
  }
  r.validate();
  return r;
}

}  // namespace olreg
