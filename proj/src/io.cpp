#include "pqn/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

namespace pqn {

using nlohmann::json;

InputError::InputError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(line ? what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"
                              : what),
      line_(line),
      column_(column) {}

namespace {

struct Position {
  std::size_t line = 0;
  std::size_t column = 0;
};

Position position_of(const std::string& text, std::size_t offset) {
  Position p{1, 1};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

// Byte offset of the last of a sequence of quoted tokens found in order; npos if any is missing.
std::size_t locate(const std::string& text, const std::vector<std::string>& tokens) {
  std::size_t at = 0;
  std::size_t found = std::string::npos;
  for (const auto& t : tokens) {
    const std::string q = json(t).dump();
    found = text.find(q, at);
    if (found == std::string::npos) return found;
    at = found + q.size();
  }
  return found;
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& msg, const std::vector<std::string>& where,
                         std::size_t extra = 0) const {
    const std::size_t off = where.empty() ? std::string::npos : locate(text_, where);
    if (off == std::string::npos) throw InputError(msg);
    const Position p = position_of(text_, off + extra);
    throw InputError(msg, p.line, p.column);
  }

  Expr expression(const json& v, const Chart& chart, const std::vector<std::string>& where) const {
    if (v.is_number()) return Expr(v.get<double>());
    if (!v.is_string()) fail(join(where) + ": expected an expression string", where);
    const std::string s = v.get<std::string>();
    try {
      return parse(s, chart);
    } catch (const ParseError& e) {
      std::vector<std::string> at = where;
      at.push_back(s);
      fail(join(where) + ": " + e.what() + " at offset " + std::to_string(e.offset()), at, 1 + e.offset());
    }
  }

  std::vector<int> indices(const std::string& key, std::size_t count, std::size_t dim, bool increasing,
                           const std::vector<std::string>& where) const {
    std::vector<int> idx;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, ',')) {
      std::size_t used = 0;
      long v = 0;
      try {
        v = std::stol(part, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != part.size()) fail(join(where) + ": malformed index key '" + key + "'", where);
      if (v < 1 || static_cast<std::size_t>(v) > dim) {
        fail(join(where) + ": index out of range 1.." + std::to_string(dim) + " in '" + key + "'", where);
      }
      idx.push_back(static_cast<int>(v - 1));
    }
    if (idx.size() != count) {
      fail(join(where) + ": key '" + key + "' needs " + std::to_string(count) + " indices", where);
    }
    if (increasing) {
      for (std::size_t i = 1; i < idx.size(); ++i) {
        if (idx[i] <= idx[i - 1]) fail(join(where) + ": key '" + key + "' is not strictly increasing", where);
      }
    }
    return idx;
  }

  const json& components(const json& block, const std::vector<std::string>& where) const {
    if (!block.is_object()) fail(join(where) + ": expected an object", where);
    for (const auto& [k, v] : block.items()) {
      if (k != "components") fail(join(where) + ": unknown key '" + k + "'", with(where, k));
    }
    if (!block.contains("components") || !block.at("components").is_object()) {
      fail(join(where) + ": missing 'components' object", where);
    }
    return block.at("components");
  }

  template <class Tag>
  Alternating<Tag> alternating(const json& block, const Chart& chart, std::size_t degree,
                               const std::vector<std::string>& where) const {
    if (degree > chart.dim()) fail(join(where) + ": degree exceeds the chart dimension", where);
    const json& comps = components(block, where);
    Alternating<Tag> r(chart.dim(), degree);
    for (const auto& [k, v] : comps.items()) {
      const auto w = with(where, k);
      const auto idx = indices(k, degree, chart.dim(), true, w);
      r.set(MultiIndex(idx.begin(), idx.end()), expression(v, chart, w));
    }
    return r;
  }

  Endomorphism endomorphism(const json& block, const Chart& chart, const std::vector<std::string>& where) const {
    const json& comps = components(block, where);
    Endomorphism n(chart.dim());
    for (const auto& [k, v] : comps.items()) {
      const auto w = with(where, k);
      const auto idx = indices(k, 2, chart.dim(), false, w);
      n(idx[0], idx[1]) = expression(v, chart, w);
    }
    return n;
  }

  VectorField vector_field(const json& block, const Chart& chart, const std::vector<std::string>& where) const {
    const json& comps = components(block, where);
    VectorField z(chart.dim());
    for (const auto& [k, v] : comps.items()) {
      const auto w = with(where, k);
      const auto idx = indices(k, 1, chart.dim(), false, w);
      z[idx[0]] = expression(v, chart, w);
    }
    return z;
  }

  static std::string join(const std::vector<std::string>& where) {
    std::string s;
    for (const auto& w : where) s += (s.empty() ? "" : ".") + w;
    return s;
  }
  static std::vector<std::string> with(std::vector<std::string> where, const std::string& k) {
    where.push_back(k);
    return where;
  }

 private:
  const std::string& text_;
};

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{"name",  "chart", "volume", "bivector", "endomorphism", "threeform",
                                             "theta", "omega", "lambda", "Z",        "chain"};
  return keys;
}

std::string index_key(const std::vector<int>& idx) {
  std::string s;
  for (int i : idx) s += (s.empty() ? "" : ",") + std::to_string(i + 1);
  return s;
}

template <class Tag>
nlohmann::ordered_json alternating_json(const Alternating<Tag>& a, const Chart& chart) {
  nlohmann::ordered_json comps = nlohmann::ordered_json::object();
  for (const auto& [k, v] : a.components()) comps[index_key(std::vector<int>(k.begin(), k.end()))] = to_string(v, chart);
  return nlohmann::ordered_json{{"components", comps}};
}

nlohmann::ordered_json endomorphism_json(const Endomorphism& n, const Chart& chart) {
  nlohmann::ordered_json comps = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < n.dim(); ++i) {
    for (std::size_t j = 0; j < n.dim(); ++j) {
      if (n(i, j).is_zero()) continue;
      comps[index_key({static_cast<int>(i), static_cast<int>(j)})] = to_string(n(i, j), chart);
    }
  }
  return nlohmann::ordered_json{{"components", comps}};
}

std::string number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quoted(const std::string& s) { return json(s).dump(); }

}  // namespace

Structure parse_structure(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const Position p = position_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw InputError(std::string("malformed JSON: ") + e.what(), p.line, p.column);
  }
  Reader rd(text);
  if (!j.is_object()) throw InputError("structure file must be a JSON object", 1, 1);
  for (const auto& [k, v] : j.items()) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) rd.fail("unknown key '" + k + "'", {k});
  }

  Structure s;
  if (j.contains("name")) {
    if (!j["name"].is_string()) rd.fail("name: expected a string", {"name"});
    s.name = j["name"].get<std::string>();
  }
  if (!j.contains("chart")) throw InputError("missing 'chart'");
  {
    const json& c = j["chart"];
    if (!c.is_object() || !c.contains("coords") || !c["coords"].is_array()) {
      rd.fail("chart: expected {\"dim\": n, \"coords\": [...]}", {"chart"});
    }
    std::vector<std::string> names;
    for (const auto& n : c["coords"]) {
      if (!n.is_string()) rd.fail("chart.coords: expected strings", {"chart", "coords"});
      names.push_back(n.get<std::string>());
    }
    if (c.contains("dim")) {
      if (!c["dim"].is_number_unsigned() || c["dim"].get<std::size_t>() != names.size()) {
        rd.fail("chart.dim does not match the number of coordinates", {"chart", "dim"});
      }
    }
    for (const auto& [k, v] : c.items()) {
      if (k != "dim" && k != "coords") rd.fail("chart: unknown key '" + k + "'", {"chart", k});
    }
    try {
      s.chart = Chart(names);
    } catch (const std::invalid_argument& e) {
      rd.fail(std::string("chart: ") + e.what(), {"chart", "coords"});
    }
  }
  const Chart& chart = s.chart;
  const std::size_t dim = chart.dim();

  if (j.contains("volume")) {
    const json& v = j["volume"];
    if (!v.is_object() || !v.contains("coeff") || v.size() != 1) rd.fail("volume: expected {\"coeff\": expr}", {"volume"});
    s.volume = VolumeForm{dim, rd.expression(v["coeff"], chart, {"volume", "coeff"})};
  }
  if (j.contains("bivector")) s.pi = rd.alternating<detail::UpperTag>(j["bivector"], chart, 2, {"bivector"});
  if (j.contains("endomorphism")) s.N = rd.endomorphism(j["endomorphism"], chart, {"endomorphism"});
  if (j.contains("threeform")) s.phi = rd.alternating<detail::LowerTag>(j["threeform"], chart, 3, {"threeform"});
  if (j.contains("theta")) s.theta = rd.alternating<detail::LowerTag>(j["theta"], chart, 1, {"theta"});
  if (j.contains("omega")) s.Omega = rd.alternating<detail::LowerTag>(j["omega"], chart, 2, {"omega"});
  if (j.contains("lambda")) s.lambda = rd.expression(j["lambda"], chart, {"lambda"});
  if (j.contains("Z")) s.Z = rd.vector_field(j["Z"], chart, {"Z"});
  if (j.contains("chain")) {
    if (!j["chain"].is_array()) rd.fail("chain: expected an array of endomorphisms", {"chain"});
    for (std::size_t i = 0; i < j["chain"].size(); ++i) {
      s.chain.push_back(rd.endomorphism(j["chain"][i], chart, {"chain"}));
    }
  }
  return s;
}

std::string write_structure(const Structure& s) {
  nlohmann::ordered_json j;
  const Chart& c = s.chart;
  if (!s.name.empty()) j["name"] = s.name;
  j["chart"] = {{"dim", c.dim()}, {"coords", c.names()}};
  if (s.volume) j["volume"] = {{"coeff", to_string(s.volume->coeff, c)}};
  if (s.pi) j["bivector"] = alternating_json(*s.pi, c);
  if (s.N) j["endomorphism"] = endomorphism_json(*s.N, c);
  if (s.phi) j["threeform"] = alternating_json(*s.phi, c);
  if (s.theta) j["theta"] = alternating_json(*s.theta, c);
  if (s.Omega) j["omega"] = alternating_json(*s.Omega, c);
  if (s.lambda) j["lambda"] = to_string(*s.lambda, c);
  if (s.Z) {
    nlohmann::ordered_json comps = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < s.Z->dim(); ++i) {
      if (!(*s.Z)[i].is_zero()) comps[std::to_string(i + 1)] = to_string((*s.Z)[i], c);
    }
    j["Z"] = {{"components", comps}};
  }
  if (!s.chain.empty()) {
    j["chain"] = nlohmann::ordered_json::array();
    for (const auto& m : s.chain) j["chain"].push_back(endomorphism_json(m, c));
  }
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool verdict(const Reports& reports) {
  return std::none_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.failed() && !r.informational; });
}

std::string write_report(const RunMetadata& meta, const Reports& reports,
                         const std::optional<RecursionResult>& table) {
  std::vector<const CheckReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->name < b->name; });

  std::size_t pass = 0, fail = 0, skip = 0, info = 0;
  for (const auto* r : sorted) {
    if (r->informational && r->failed()) {
      ++info;
    } else if (r->passed()) {
      ++pass;
    } else if (r->failed()) {
      ++fail;
    } else {
      ++skip;
    }
  }

  std::ostringstream o;
  o << "{\n  \"schema_version\": 1,\n  \"metadata\": {\n";
  o << "    \"command\": " << quoted(meta.command) << ",\n";
  o << "    \"structure\": " << quoted(meta.structure) << ",\n";
  o << "    \"input_digest\": " << quoted(meta.input_digest) << ",\n";
  o << "    \"seed\": " << meta.seed << ",\n";
  o << "    \"samples\": " << meta.samples << ",\n";
  o << "    \"box\": [";
  for (std::size_t i = 0; i < meta.box.size(); ++i) {
    o << (i ? ", " : "") << "[" << number(meta.box[i].lo) << ", " << number(meta.box[i].hi) << "]";
  }
  o << "],\n";
  o << "    \"tol\": " << number(meta.tol) << ",\n";
  o << "    \"kmax\": " << meta.kmax << ",\n";
  o << "    \"suites\": [";
  for (std::size_t i = 0; i < meta.suites.size(); ++i) o << (i ? ", " : "") << quoted(meta.suites[i]);
  o << "]\n  },\n";
  o << "  \"summary\": {\"pass\": " << pass << ", \"fail\": " << fail << ", \"skipped\": " << skip
    << ", \"informational_fail\": " << info << ", \"verdict\": " << quoted(fail ? "fail" : "pass") << "},\n";
  o << "  \"checks\": [";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const CheckReport& r = *sorted[i];
    o << (i ? "," : "") << "\n    {\"name\": " << quoted(r.name) << ", \"status\": " << quoted(to_string(r.status))
      << ", \"max_scaled_residual\": " << number(r.max_scaled_residual) << ", \"worst_point\": [";
    for (std::size_t k = 0; k < r.worst_point.coords.size(); ++k) {
      o << (k ? ", " : "") << number(r.worst_point.coords[k]);
    }
    o << "], \"samples_used\": " << r.samples_used << ", \"tol\": " << number(r.tol)
      << ", \"informational\": " << (r.informational ? "true" : "false") << ", \"detail\": " << quoted(r.detail)
      << "}";
  }
  o << (sorted.empty() ? "]" : "\n  ]");
  if (table) {
    const std::size_t k = table->table.size();
    o << ",\n  \"table\": {\n    \"kmax\": " << k << ",\n    \"residuals\": [";
    for (std::size_t i = 0; i < k; ++i) {
      o << (i ? "," : "") << "\n      [";
      for (std::size_t j = 0; j < k; ++j) o << (j ? ", " : "") << number(table->table[i][j]);
      o << "]";
    }
    o << "\n    ],\n    \"pass\": [";
    for (std::size_t i = 0; i < k; ++i) {
      o << (i ? "," : "") << "\n      [";
      for (std::size_t j = 0; j < k; ++j) o << (j ? ", " : "") << (table->table_pass[i][j] ? "true" : "false");
      o << "]";
    }
    o << "\n    ]\n  }";
  }
  o << "\n}\n";
  return o.str();
}

std::vector<Interval> parse_box(const std::string& spec, std::size_t dim) {
  auto one = [&](const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw InputError("box entry '" + s + "' must be lo:hi");
    Interval iv;
    try {
      std::size_t a = 0, b = 0;
      const std::string lo = s.substr(0, colon), hi = s.substr(colon + 1);
      iv.lo = std::stod(lo, &a);
      iv.hi = std::stod(hi, &b);
      if (a != lo.size() || b != hi.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InputError("box entry '" + s + "' is not numeric");
    }
    if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
      throw InputError("box entry '" + s + "' must satisfy lo < hi");
    }
    return iv;
  };
  std::vector<Interval> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(one(item));
  if (parts.size() == 1) return std::vector<Interval>(dim, parts.front());
  if (parts.size() != dim) {
    throw InputError("box has " + std::to_string(parts.size()) + " intervals for " + std::to_string(dim) +
                     " coordinates");
  }
  return parts;
}

}  // namespace pqn
