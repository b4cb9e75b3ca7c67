#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "batplace/grid.hpp"

namespace batplace {

enum class IeeeSystem { Ieee15, Ieee15M, Ieee33, Ieee33M, Ieee85, Ieee85M, Ieee123, Ieee123M };

inline std::string_view to_string(IeeeSystem s) {
  switch (s) {
    case IeeeSystem::Ieee15: return "ieee15";
    case IeeeSystem::Ieee15M: return "ieee15m";
    case IeeeSystem::Ieee33: return "ieee33";
    case IeeeSystem::Ieee33M: return "ieee33m";
    case IeeeSystem::Ieee85: return "ieee85";
    case IeeeSystem::Ieee85M: return "ieee85m";
    case IeeeSystem::Ieee123: return "ieee123";
    case IeeeSystem::Ieee123M: return "ieee123m";
  }
  return "unknown";
}

inline IeeeSystem parse_ieee_system(std::string id) {
  std::transform(id.begin(), id.end(), id.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto s : {IeeeSystem::Ieee15, IeeeSystem::Ieee15M, IeeeSystem::Ieee33, IeeeSystem::Ieee33M, IeeeSystem::Ieee85,
                 IeeeSystem::Ieee85M, IeeeSystem::Ieee123, IeeeSystem::Ieee123M})
    if (to_string(s) == id) return s;
  throw Error(ErrorCode::ParseError, "unknown system id '" + id + "'");
}

namespace detail {

using LabelPairs = std::vector<std::pair<int, int>>;

// Feeder branch lists in the usual 1-based bus numbering.
inline LabelPairs ieee15_branches() {
  return {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {2, 9}, {9, 10}, {2, 6}, {6, 7}, {6, 8}, {3, 11}, {11, 12}, {12, 13}, {4, 14}, {4, 15}};
}

inline LabelPairs ieee33_branches() {
  LabelPairs out;
  for (int i = 1; i < 18; ++i) out.emplace_back(i, i + 1);
  out.emplace_back(2, 19);
  for (int i = 19; i < 22; ++i) out.emplace_back(i, i + 1);
  out.emplace_back(3, 23);
  for (int i = 23; i < 25; ++i) out.emplace_back(i, i + 1);
  out.emplace_back(6, 26);
  for (int i = 26; i < 33; ++i) out.emplace_back(i, i + 1);
  return out;
}

inline LabelPairs ieee85_branches() {
  LabelPairs out;
  for (int i = 1; i < 15; ++i) out.emplace_back(i, i + 1);
  const LabelPairs rest = {
      {2, 16},  {3, 17},  {5, 18},  {18, 19}, {19, 20}, {20, 21}, {21, 22}, {19, 23}, {7, 24},  {8, 25},
      {25, 26}, {26, 27}, {27, 28}, {28, 29}, {29, 30}, {30, 31}, {31, 32}, {32, 33}, {33, 34}, {34, 35},
      {35, 36}, {26, 37}, {27, 38}, {29, 39}, {32, 40}, {40, 41}, {41, 42}, {41, 43}, {34, 44}, {44, 45},
      {45, 46}, {46, 47}, {35, 48}, {48, 49}, {49, 50}, {50, 51}, {48, 52}, {52, 53}, {53, 54}, {52, 55},
      {49, 56}, {9, 57},  {57, 58}, {58, 59}, {58, 60}, {60, 61}, {61, 62}, {60, 63}, {63, 64}, {64, 65},
      {65, 66}, {64, 67}, {67, 68}, {68, 69}, {69, 70}, {70, 71}, {67, 72}, {68, 73}, {73, 74}, {73, 75},
      {70, 76}, {65, 77}, {10, 78}, {67, 79}, {12, 80}, {80, 81}, {81, 82}, {81, 83}, {83, 84}, {13, 85}};
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

// Line segments plus every switch, open or closed. Switches: 13-152,
// 18-135, 60-160, 61-610, 97-197, 150-149 (normally closed) and 250-251,
// 450-451, 54-94, 151-300, 300-350 (normally open).
inline LabelPairs ieee123_branches() {
  return {
      {1, 2},     {1, 3},     {1, 7},     {3, 4},     {3, 5},     {5, 6},     {7, 8},     {8, 12},    {8, 9},
      {8, 13},    {9, 14},    {13, 34},   {13, 18},   {14, 11},   {14, 10},   {15, 16},   {15, 17},   {18, 19},
      {18, 21},   {19, 20},   {21, 22},   {21, 23},   {23, 24},   {23, 25},   {25, 26},   {25, 28},   {26, 27},
      {26, 31},   {27, 33},   {28, 29},   {29, 30},   {30, 250},  {31, 32},   {34, 15},   {35, 36},   {35, 40},
      {36, 37},   {36, 38},   {38, 39},   {40, 41},   {40, 42},   {42, 43},   {42, 44},   {44, 45},   {44, 47},
      {45, 46},   {47, 48},   {47, 49},   {49, 50},   {50, 51},   {51, 151},  {52, 53},   {53, 54},   {54, 55},
      {54, 57},   {55, 56},   {57, 58},   {57, 60},   {58, 59},   {60, 61},   {60, 62},   {62, 63},   {63, 64},
      {64, 65},   {65, 66},   {67, 68},   {67, 72},   {67, 97},   {68, 69},   {69, 70},   {70, 71},   {72, 73},
      {72, 76},   {73, 74},   {74, 75},   {76, 77},   {76, 86},   {77, 78},   {78, 79},   {78, 80},   {80, 81},
      {81, 82},   {81, 84},   {82, 83},   {84, 85},   {86, 87},   {87, 88},   {87, 89},   {89, 90},   {89, 91},
      {91, 92},   {91, 93},   {93, 94},   {93, 95},   {95, 96},   {97, 98},   {98, 99},   {99, 100},  {100, 450},
      {101, 102}, {101, 105}, {102, 103}, {103, 104}, {105, 106}, {105, 108}, {106, 107}, {108, 109}, {108, 300},
      {109, 110}, {110, 111}, {110, 112}, {112, 113}, {113, 114}, {135, 35},  {149, 1},   {152, 52},  {160, 67},
      {197, 101}, {13, 152},  {18, 135},  {60, 160},  {61, 610},  {97, 197},  {150, 149}, {250, 251}, {450, 451},
      {54, 94},   {151, 300}, {300, 350}};
}

// Labels sorted numerically become bus ids 0..n-1.
inline Grid grid_from_labels(const LabelPairs& pairs, std::string name) {
  std::vector<int> labels;
  for (const auto& [a, b] : pairs) {
    labels.push_back(a);
    labels.push_back(b);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::map<int, BusId> index;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    index[labels[i]] = i;
    names.push_back(std::to_string(labels[i]));
  }
  std::vector<Line> lines;
  for (const auto& [a, b] : pairs) lines.push_back({index.at(a), index.at(b), 1.0, 1.0});
  return Grid(labels.size(), std::move(lines), std::move(name), std::move(names));
}

inline LabelPairs with_changes(LabelPairs base, const LabelPairs& add, const LabelPairs& remove) {
  for (const auto& r : remove)
    base.erase(std::remove_if(base.begin(), base.end(),
                              [&r](const auto& p) {
                                return (p.first == r.first && p.second == r.second) ||
                                       (p.first == r.second && p.second == r.first);
                              }),
               base.end());
  base.insert(base.end(), add.begin(), add.end());
  return base;
}

}  // namespace detail

// Feeder topologies with unit capacity and susceptance. Bus labels keep the
// feeder numbering; bus ids follow ascending label order.
inline Grid build_ieee_case(IeeeSystem which) {
  using detail::with_changes;
  const std::string name(to_string(which));
  switch (which) {
    case IeeeSystem::Ieee15: return detail::grid_from_labels(detail::ieee15_branches(), name);
    case IeeeSystem::Ieee15M:
      return detail::grid_from_labels(with_changes(detail::ieee15_branches(), {{6, 10}, {11, 14}}, {}), name);
    case IeeeSystem::Ieee33: return detail::grid_from_labels(detail::ieee33_branches(), name);
    case IeeeSystem::Ieee33M:
      return detail::grid_from_labels(with_changes(detail::ieee33_branches(), {{1, 22}, {9, 15}, {25, 29}}, {}), name);
    case IeeeSystem::Ieee85: return detail::grid_from_labels(detail::ieee85_branches(), name);
    case IeeeSystem::Ieee85M:
      return detail::grid_from_labels(with_changes(detail::ieee85_branches(), {{16, 22}, {51, 71}}, {}), name);
    case IeeeSystem::Ieee123: return detail::grid_from_labels(detail::ieee123_branches(), name);
    case IeeeSystem::Ieee123M:
      return detail::grid_from_labels(with_changes(detail::ieee123_branches(), {}, {{60, 160}}), name);
  }
  throw Error(ErrorCode::ParseError, "unknown system");
}

// Chained triangles on {3k, 3k+1, 3k+2} joined by bridges (3k+2, 3k+3);
// leftover buses past the last full triangle continue as a path.
inline Grid gen_triangle_family(std::size_t n) {
  if (n < 3) throw Error(ErrorCode::InvalidGrid, "triangle family needs at least 3 buses");
  std::vector<Line> lines;
  const std::size_t full = n / 3;
  for (std::size_t k = 0; k < full; ++k) {
    const BusId a = 3 * k;
    lines.push_back({a, a + 1, 1.0, 1.0});
    lines.push_back({a + 1, a + 2, 1.0, 1.0});
    lines.push_back({a, a + 2, 1.0, 1.0});
    if (a + 3 < n) lines.push_back({a + 2, a + 3, 1.0, 1.0});
  }
  for (BusId j = 3 * full + 1; j < n; ++j) lines.push_back({j - 1, j, 1.0, 1.0});
  return Grid(n, std::move(lines), "triangle" + std::to_string(n));
}

}  // namespace batplace
