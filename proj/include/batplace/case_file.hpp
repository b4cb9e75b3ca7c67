#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "batplace/grid.hpp"

namespace batplace {

struct CaseData {
  Grid grid;
  Scenario scenario;
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void field_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, "field '" + path + "': " + what);
}

inline const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) field_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) field_error(path, "expected a number, got " + std::string(v.type_name()));
  return v.get<double>();
}

inline std::vector<double> number_array(const json& v, const std::string& path, std::size_t expected) {
  if (!v.is_array()) field_error(path, "expected an array, got " + std::string(v.type_name()));
  if (v.size() != expected)
    field_error(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

inline std::string label_of(const json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  field_error(path, "expected a string or integer bus label");
}

}  // namespace detail

// Parses a case document. Bus labels are arbitrary strings or integers and
// become ids 0..n-1 in the order the buses are listed.
inline CaseData parse_case(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  const std::string name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : "";
  const json& h = detail::member(doc, "horizon", "");
  if (!h.is_number_integer() || h.get<long long>() <= 0) detail::field_error("horizon", "expected a positive integer");
  const auto horizon = static_cast<std::size_t>(h.get<long long>());
  const auto cost = detail::number_array(detail::member(doc, "cost", ""), "cost", horizon);

  const json& buses = detail::member(doc, "buses", "");
  if (!buses.is_array() || buses.empty()) detail::field_error("buses", "expected a non-empty array");
  std::map<std::string, BusId> index;
  std::vector<std::string> labels;
  const auto n = static_cast<Eigen::Index>(buses.size());
  Eigen::MatrixXd demand(n, static_cast<Eigen::Index>(horizon)), gen_cap(n, static_cast<Eigen::Index>(horizon));
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const std::string path = "buses[" + std::to_string(i) + "]";
    const std::string label = detail::label_of(detail::member(buses[i], "id", path), path + ".id");
    if (!index.emplace(label, i).second) detail::field_error(path + ".id", "duplicate bus label '" + label + "'");
    labels.push_back(label);
    const auto d = detail::number_array(detail::member(buses[i], "demand", path), path + ".demand", horizon);
    const auto g = detail::number_array(detail::member(buses[i], "gen_cap", path), path + ".gen_cap", horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      demand(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = d[t];
      gen_cap(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = g[t];
    }
  }

  const json& lines = detail::member(doc, "lines", "");
  if (!lines.is_array()) detail::field_error("lines", "expected an array");
  std::vector<Line> parsed;
  for (std::size_t e = 0; e < lines.size(); ++e) {
    const std::string path = "lines[" + std::to_string(e) + "]";
    auto endpoint = [&](const char* key) {
      const std::string label = detail::label_of(detail::member(lines[e], key, path), path + "." + key);
      auto it = index.find(label);
      if (it == index.end()) detail::field_error(path + "." + key, "unknown bus label '" + label + "'");
      return it->second;
    };
    Line l;
    l.from = endpoint("from");
    l.to = endpoint("to");
    if (lines[e].contains("capacity")) l.capacity = detail::number(lines[e]["capacity"], path + ".capacity");
    if (lines[e].contains("susceptance")) l.susceptance = detail::number(lines[e]["susceptance"], path + ".susceptance");
    parsed.push_back(l);
  }

  Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(cost.data(), static_cast<Eigen::Index>(cost.size()));
  Grid grid(buses.size(), std::move(parsed), name, std::move(labels));
  Scenario sc(std::move(c), std::move(demand), std::move(gen_cap));
  return {std::move(grid), std::move(sc)};
}

inline CaseData load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_case(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
  }
}

inline std::string dump_case(const Grid& grid, const Scenario& sc, int indent = 2) {
  using detail::json;
  sc.check_compatible(grid);
  json doc;
  doc["name"] = grid.name();
  doc["horizon"] = sc.horizon();
  doc["cost"] = std::vector<double>(sc.costs().data(), sc.costs().data() + sc.costs().size());
  json buses = json::array();
  for (BusId i = 0; i < grid.bus_count(); ++i) {
    json bus;
    bus["id"] = grid.label(i);
    std::vector<double> d, g;
    for (std::size_t t = 0; t < sc.horizon(); ++t) {
      d.push_back(sc.demand(i, t));
      g.push_back(sc.gen_cap(i, t));
    }
    bus["demand"] = d;
    bus["gen_cap"] = g;
    buses.push_back(std::move(bus));
  }
  doc["buses"] = std::move(buses);
  json lines = json::array();
  for (const Line& l : grid.lines())
    lines.push_back({{"from", grid.label(l.from)}, {"to", grid.label(l.to)}, {"capacity", l.capacity},
                     {"susceptance", l.susceptance}});
  doc["lines"] = std::move(lines);
  return doc.dump(indent);
}

inline void save_case(const Grid& grid, const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << dump_case(grid, sc) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace batplace
