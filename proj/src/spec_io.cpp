#include "mdilate/spec_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "mdilate/errors.hpp"

namespace mdilate {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// 1-based line of the first occurrence of "key" in the text, 0 when absent.
std::size_t line_of_key(std::string_view text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  const auto pos = text.find(quoted);
  if (pos == std::string_view::npos) return 0;
  std::size_t line = 1;
  for (std::size_t i = 0; i < pos; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

class Problems {
 public:
  explicit Problems(std::string_view text) : text_(text) {}

  void add(const std::string& where, const std::string& what, const std::string& key = {}) {
    std::ostringstream os;
    os << where << ": " << what;
    if (!key.empty())
      if (const auto line = line_of_key(text_, key); line > 0) os << " (line " << line << ")";
    items_.push_back(os.str());
  }
  bool empty() const { return items_.empty(); }
  [[noreturn]] void raise() const {
    std::ostringstream os;
    os << items_.size() << " problem(s) in spec";
    for (const auto& i : items_) os << "\n  " << i;
    throw Error(ErrorCode::validation_error, os.str());
  }

 private:
  std::string_view text_;
  std::vector<std::string> items_;
};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where,
                    Problems& problems) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) problems.add(where, "unknown field '" + key + "'", key);
}

std::optional<std::size_t> read_count(const json& obj, const std::string& key,
                                      const std::string& where, Problems& problems) {
  if (!obj.contains(key)) return std::nullopt;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0)) {
    problems.add(where + "/" + key, "must be a nonnegative integer", key);
    return std::nullopt;
  }
  return v.get<std::size_t>();
}

std::optional<double> read_real(const json& obj, const std::string& key, const std::string& where,
                                Problems& problems) {
  if (!obj.contains(key)) return std::nullopt;
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    problems.add(where + "/" + key, "must be a number", key);
    return std::nullopt;
  }
  return v.get<double>();
}

std::optional<WeightRule> read_rule(const json& rule, Problems& problems) {
  const std::string where = "/operator/rule";
  if (!rule.is_object()) {
    problems.add(where, "must be an object", "rule");
    return std::nullopt;
  }
  if (!rule.contains("name") || !rule.at("name").is_string()) {
    problems.add(where + "/name", "missing rule name", "rule");
    return std::nullopt;
  }
  const std::string name = rule.at("name").get<std::string>();
  std::optional<WeightRule> out;
  if (name == "constant") {
    reject_unknown(rule, {"name", "c"}, where, problems);
    const auto c = read_real(rule, "c", where, problems);
    if (!c) problems.add(where + "/c", "constant rule needs c", "rule");
    else out = WeightRule::constant(*c);
  } else if (name == "dirichlet") {
    reject_unknown(rule, {"name"}, where, problems);
    out = WeightRule::dirichlet();
  } else if (name == "geometric_concave") {
    reject_unknown(rule, {"name", "r"}, where, problems);
    const auto r = read_real(rule, "r", where, problems);
    if (!r) problems.add(where + "/r", "geometric_concave rule needs r", "rule");
    else out = WeightRule::geometric_concave(*r);
  } else if (name == "table") {
    reject_unknown(rule, {"name", "values", "tail"}, where, problems);
    std::vector<double> values;
    if (rule.contains("values")) {
      const auto& v = rule.at("values");
      if (!v.is_array()) problems.add(where + "/values", "must be an array", "values");
      else
        for (const auto& x : v) {
          if (!x.is_number()) {
            problems.add(where + "/values", "entries must be numbers", "values");
            break;
          }
          values.push_back(x.get<double>());
        }
    }
    const auto tail = read_real(rule, "tail", where, problems);
    out = WeightRule::table(std::move(values), tail.value_or(1.0));
  } else {
    problems.add(where + "/name",
                 "unknown rule '" + name +
                     "' (expected constant, dirichlet, geometric_concave or table)",
                 "name");
    return std::nullopt;
  }
  if (out) {
    try {
      out->validate();
    } catch (const Error& e) {
      problems.add(where, e.what(), "rule");
      return std::nullopt;
    }
  }
  return out;
}

std::optional<ComplexMatrix> read_dense(const json& entries, Problems& problems) {
  const std::string where = "/operator/entries";
  if (!entries.is_array() || entries.empty()) {
    problems.add(where, "must be a nonempty array of rows", "entries");
    return std::nullopt;
  }
  const std::size_t n = entries.size();
  std::vector<Complex> data;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = entries[i];
    if (!row.is_array() || row.size() != n) {
      problems.add(where + "/" + std::to_string(i), "rows must have length " + std::to_string(n),
                   "entries");
      return std::nullopt;
    }
    for (std::size_t j = 0; j < n; ++j) {
      const auto& z = row[j];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
        problems.add(where + "/" + std::to_string(i) + "/" + std::to_string(j),
                     "entries are [re, im] pairs", "entries");
        return std::nullopt;
      }
      const Complex v{z[0].get<double>(), z[1].get<double>()};
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        problems.add(where, "entries must be finite", "entries");
        return std::nullopt;
      }
      data.push_back(v);
    }
  }
  return ComplexMatrix(n, n, std::move(data));
}

ordered_json rule_json(const WeightRule& r) {
  ordered_json j;
  j["name"] = r.name();
  switch (r.kind) {
    case WeightRule::Kind::constant: j["c"] = r.c; break;
    case WeightRule::Kind::dirichlet: break;
    case WeightRule::Kind::geometric_concave: j["r"] = r.r; break;
    case WeightRule::Kind::table:
      j["values"] = r.values;
      j["tail"] = r.tail;
      break;
  }
  return j;
}

}  // namespace

std::optional<DilationPath> path_from_string(std::string_view name) {
  for (auto p : {DilationPath::general_m, DilationPath::three_concave, DilationPath::badea_2iso})
    if (to_string(p) == name) return p;
  return std::nullopt;
}

OperatorSpecFile parse_spec(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
        line_start = i + 1;
      } else {
        ++col;
      }
    }
    const auto line_end = text.find('\n', line_start);
    std::ostringstream os;
    os << "line " << line << ", column " << col << ": " << e.what() << "\n  "
       << text.substr(line_start, line_end == std::string_view::npos ? std::string_view::npos
                                                                      : line_end - line_start);
    throw Error(ErrorCode::parse_error, os.str());
  }

  Problems problems(text);
  if (!root.is_object()) {
    problems.add("/", "spec must be a JSON object");
    problems.raise();
  }
  reject_unknown(root,
                 {"schema_version", "operator", "m", "path", "truncation", "tolerances", "seed",
                  "trials", "q0"},
                 "/", problems);

  OperatorSpecFile spec;
  bool have_blocks = false;
  if (root.contains("schema_version")) {
    const auto& v = root.at("schema_version");
    if (!v.is_number_integer() || v.get<long long>() != kSchemaVersion)
      problems.add("/schema_version", "unsupported schema version (expected 1)", "schema_version");
  }

  if (const auto m = read_count(root, "m", "", problems)) spec.m = static_cast<int>(*m);
  else if (!root.contains("m")) problems.add("/m", "missing");
  if (root.contains("m") && spec.m < 2) problems.add("/m", "m must be at least 2", "m");

  if (root.contains("path")) {
    const auto& p = root.at("path");
    const auto parsed = p.is_string() ? path_from_string(p.get<std::string>()) : std::nullopt;
    if (!parsed)
      problems.add("/path", "expected general_m, three_concave or badea_2iso", "path");
    spec.path = parsed;
  }

  if (!root.contains("operator") || !root.at("operator").is_object()) {
    problems.add("/operator", "missing operator object", "operator");
  } else {
    const auto& op = root.at("operator");
    const std::string kind = op.contains("kind") && op.at("kind").is_string()
                                 ? op.at("kind").get<std::string>()
                                 : std::string{};
    if (kind == "dense") {
      spec.op.kind = OperatorSpec::Kind::dense;
      reject_unknown(op, {"kind", "entries"}, "/operator", problems);
      if (!op.contains("entries")) problems.add("/operator/entries", "missing", "operator");
      else if (auto e = read_dense(op.at("entries"), problems)) spec.op.entries = std::move(*e);
    } else if (kind == "shift") {
      spec.op.kind = OperatorSpec::Kind::shift;
      reject_unknown(op, {"kind", "rule"}, "/operator", problems);
      if (!op.contains("rule")) problems.add("/operator/rule", "missing", "operator");
      else spec.op.rule = read_rule(op.at("rule"), problems);
    } else {
      problems.add("/operator/kind", "expected \"dense\" or \"shift\"", "kind");
    }
  }

  if (!root.contains("truncation") || !root.at("truncation").is_object()) {
    problems.add("/truncation", "missing truncation object", "truncation");
  } else {
    const auto& tr = root.at("truncation");
    reject_unknown(tr, {"N", "n_blocks", "horizon"}, "/truncation", problems);
    if (auto n = read_count(tr, "N", "/truncation", problems)) spec.truncation.n = *n;
    if (auto b = read_count(tr, "n_blocks", "/truncation", problems)) {
      spec.truncation.n_blocks = *b;
      have_blocks = true;
    } else if (!tr.contains("n_blocks")) problems.add("/truncation/n_blocks", "missing", "truncation");
    if (auto h = read_count(tr, "horizon", "/truncation", problems)) spec.truncation.horizon = *h;
  }

  if (root.contains("tolerances")) {
    const auto& tol = root.at("tolerances");
    if (!tol.is_object()) {
      problems.add("/tolerances", "must be an object", "tolerances");
    } else {
      Tolerances probe;
      for (const auto& [name, value] : tol.items()) {
        if (!value.is_number() || !(value.get<double>() > 0.0))
          problems.add("/tolerances/" + name, "must be a positive number", name);
        else if (!probe.set(name, value.get<double>()))
          problems.add("/tolerances", "unknown tolerance '" + name + "'", name);
        else
          spec.tolerances[name] = value.get<double>();
      }
    }
  }

  if (root.contains("seed")) {
    const auto& s = root.at("seed");
    if (!s.is_number_unsigned()) problems.add("/seed", "must be a nonnegative integer", "seed");
    else spec.seed = s.get<std::uint64_t>();
  }
  if (auto t = read_count(root, "trials", "", problems)) {
    if (*t == 0) problems.add("/trials", "must be positive", "trials");
    spec.trials = *t;
  }
  if (auto q0 = read_real(root, "q0", "", problems)) {
    if (!(*q0 >= 0.0)) problems.add("/q0", "must be nonnegative", "q0");
    spec.q0 = *q0;
  }

  // cross-field rules
  if (spec.op.kind == OperatorSpec::Kind::dense && !spec.op.entries.empty()) {
    const std::size_t n = spec.op.entries.rows();
    if (spec.truncation.n != 0 && spec.truncation.n != n)
      problems.add("/truncation/N", "must equal the dense matrix size " + std::to_string(n), "N");
    spec.truncation.n = n;
    if (spec.q0) problems.add("/q0", "only applies to shift operators", "q0");
  }
  if (spec.op.kind == OperatorSpec::Kind::shift && spec.m >= 2) {
    const std::size_t need = 2 * static_cast<std::size_t>(spec.m) + 2;
    if (spec.truncation.n < need)
      problems.add("/truncation/N",
                   "N = " + std::to_string(spec.truncation.n) + " is too small; need N >= 2m+2 = " +
                       std::to_string(need),
                   "N");
    if (spec.truncation.horizon != 0 && spec.truncation.horizon + 1 < spec.truncation.n)
      problems.add("/truncation/horizon", "horizon must be at least N - 1", "horizon");
  }
  if (spec.m >= 2 && have_blocks &&
      spec.truncation.n_blocks < static_cast<std::size_t>(spec.m) + 2)
    problems.add("/truncation/n_blocks",
                 "n_blocks must be at least m + 2 = " + std::to_string(spec.m + 2), "n_blocks");
  if (spec.path == DilationPath::three_concave && spec.m != 3)
    problems.add("/path", "three_concave requires m = 3", "path");
  if (spec.path == DilationPath::badea_2iso && spec.m != 2)
    problems.add("/path", "badea_2iso requires m = 2", "path");

  if (!problems.empty()) problems.raise();
  return spec;
}

OperatorSpecFile load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot read spec file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

std::string emit_spec(const OperatorSpecFile& spec) {
  ordered_json j;
  j["schema_version"] = spec.schema_version;
  ordered_json op;
  if (spec.op.kind == OperatorSpec::Kind::dense) {
    op["kind"] = "dense";
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < spec.op.entries.rows(); ++i) {
      ordered_json row = ordered_json::array();
      for (std::size_t k = 0; k < spec.op.entries.cols(); ++k) {
        const Complex z = spec.op.entries(i, k);
        row.push_back({z.real(), z.imag()});
      }
      rows.push_back(std::move(row));
    }
    op["entries"] = std::move(rows);
  } else {
    op["kind"] = "shift";
    if (spec.op.rule) op["rule"] = rule_json(*spec.op.rule);
  }
  j["operator"] = std::move(op);
  j["m"] = spec.m;
  if (spec.path) j["path"] = to_string(*spec.path);
  ordered_json tr;
  tr["N"] = spec.truncation.n;
  tr["n_blocks"] = spec.truncation.n_blocks;
  if (spec.truncation.horizon != 0) tr["horizon"] = spec.truncation.horizon;
  j["truncation"] = std::move(tr);
  if (!spec.tolerances.empty()) {
    ordered_json t = ordered_json::object();
    for (const auto& [k, v] : spec.tolerances) t[k] = v;
    j["tolerances"] = std::move(t);
  }
  if (spec.seed) j["seed"] = *spec.seed;
  if (spec.trials) j["trials"] = *spec.trials;
  if (spec.q0) j["q0"] = *spec.q0;
  return j.dump(2) + "\n";
}

Tolerances resolve_tolerances(const OperatorSpecFile& spec) {
  Tolerances tol;
  for (const auto& [k, v] : spec.tolerances)
    if (!tol.set(k, v)) throw Error(ErrorCode::validation_error, "unknown tolerance '" + k + "'");
  return tol;
}

}  // namespace mdilate
