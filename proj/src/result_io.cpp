#include "ivinv/result_io.hpp"

#include <cmath>
#include <cstdio>

#include "ivinv/errors.hpp"

namespace ivinv {

nlohmann::json extended_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return x;
}

double extended_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw ConfigError("expected a number or an infinity literal in JSON, got " + j.dump());
}

nlohmann::json set_to_json(const IntervalUnion& set) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& iv : set.intervals()) arr.push_back({extended_to_json(iv.lo), extended_to_json(iv.hi)});
  return arr;
}

IntervalUnion set_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("intervals must be a JSON array");
  std::vector<Interval> parts;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("each interval must be a [lo, hi] pair");
    parts.push_back({extended_from_json(e[0]), extended_from_json(e[1])});
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!(parts[i].lo <= parts[i].hi)) throw ConfigError("interval with lo > hi");
    if (i > 0 && !(parts[i - 1].hi < parts[i].lo)) throw ConfigError("intervals are not disjoint and ascending");
  }
  IntervalUnion u(std::move(parts));
  if (!u.valid()) throw ConfigError("interval union invariants violated");
  return u;
}

nlohmann::json result_to_json(const InversionResult& r) {
  nlohmann::json j;
  j["method"] = method_name(r.method);
  j["alpha"] = r.alpha;
  j["exact"] = r.exact;
  j["reliable"] = r.reliable;
  j["intervals"] = set_to_json(r.set);
  j["empty"] = r.set.empty();
  j["unbounded"] = !r.set.bounded();
  nlohmann::json d = nlohmann::json::object();
  for (const auto& [k, v] : r.diagnostics) d[k] = extended_to_json(v);
  j["diagnostics"] = d;
  j["notes"] = r.notes;
  return j;
}

InversionResult result_from_json(const nlohmann::json& j) {
  InversionResult r;
  try {
    r.method = parse_method(j.at("method").get<std::string>());
    r.alpha = j.at("alpha").get<double>();
    r.exact = j.value("exact", true);
    r.reliable = j.value("reliable", true);
    r.set = set_from_json(j.at("intervals"));
    if (j.contains("diagnostics"))
      for (const auto& [k, v] : j["diagnostics"].items()) r.diagnostics[k] = extended_from_json(v);
    if (j.contains("notes")) r.notes = j["notes"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed result JSON: ") + e.what());
  }
  if (j.contains("empty") && j["empty"].get<bool>() != r.set.empty())
    throw ConfigError("result JSON: 'empty' flag disagrees with the intervals");
  return r;
}

std::string format_set(const IntervalUnion& set, int precision) {
  if (set.empty()) return "∅";
  auto num = [precision](double x) {
    if (std::isinf(x)) return std::string(x > 0 ? "+∞" : "−∞");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, x);
    return std::string(buf);
  };
  std::string out;
  for (std::size_t i = 0; i < set.intervals().size(); ++i) {
    const auto& iv = set.intervals()[i];
    if (i) out += " ∪ ";
    out += "[" + num(iv.lo) + ", " + num(iv.hi) + "]";
  }
  return out;
}

}  // namespace ivinv
