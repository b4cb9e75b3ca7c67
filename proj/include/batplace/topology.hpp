#pragma once

#include <algorithm>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "batplace/grid.hpp"

namespace batplace {

enum class Topology { Tree, WeaklyCyclic, General };

inline std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::Tree: return "tree";
    case Topology::WeaklyCyclic: return "weakly-cyclic";
    case Topology::General: return "general";
  }
  return "unknown";
}

inline constexpr LineId kNoLine = std::numeric_limits<LineId>::max();

// Edge sets of the biconnected components (blocks). Iterative Tarjan with an
// edge stack, so deep paths do not blow the call stack.
inline std::vector<std::vector<LineId>> biconnected_blocks(const Grid& grid) {
  const std::size_t n = grid.bus_count();
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> disc(n, kUnseen), low(n, 0);
  std::vector<std::vector<LineId>> blocks;
  std::vector<LineId> edge_stack;

  struct Frame {
    BusId bus;
    LineId via;
    std::size_t next;
  };
  std::size_t timer = 0;
  for (BusId root = 0; root < n; ++root) {
    if (disc[root] != kUnseen) continue;
    std::vector<Frame> stack{{root, kNoLine, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& top = stack.back();
      const auto inc = grid.incident(top.bus);
      if (top.next < inc.size()) {
        const Incidence step = inc[top.next++];
        if (step.line == top.via) continue;
        const BusId w = step.neighbor;
        if (disc[w] == kUnseen) {
          edge_stack.push_back(step.line);
          disc[w] = low[w] = timer++;
          stack.push_back({w, step.line, 0});
        } else if (disc[w] < disc[top.bus]) {
          edge_stack.push_back(step.line);
          low[top.bus] = std::min(low[top.bus], disc[w]);
        }
        continue;
      }
      const Frame done = top;
      stack.pop_back();
      if (stack.empty()) break;
      const BusId parent = stack.back().bus;
      low[parent] = std::min(low[parent], low[done.bus]);
      if (low[done.bus] >= disc[parent]) {
        std::vector<LineId> block;
        while (!edge_stack.empty()) {
          const LineId e = edge_stack.back();
          edge_stack.pop_back();
          block.push_back(e);
          if (e == done.via) break;
        }
        std::sort(block.begin(), block.end());
        blocks.push_back(std::move(block));
      }
    }
  }
  return blocks;
}

inline bool is_connected(const Grid& grid, BusId skip = std::numeric_limits<BusId>::max()) {
  const std::size_t n = grid.bus_count();
  std::vector<char> seen(n, 0);
  BusId start = 0;
  while (start < n && start == skip) ++start;
  if (start >= n) return true;
  std::queue<BusId> q;
  q.push(start);
  seen[start] = 1;
  std::size_t count = 1;
  while (!q.empty()) {
    BusId u = q.front();
    q.pop();
    for (const auto& inc : grid.incident(u)) {
      if (inc.neighbor == skip || seen[inc.neighbor]) continue;
      seen[inc.neighbor] = 1;
      ++count;
      q.push(inc.neighbor);
    }
  }
  return count == n - (skip < n ? 1 : 0);
}

// Tree if m = n-1; weakly-cyclic if every block is a single line or a simple
// cycle (no line lies on two cycles); general otherwise.
inline Topology classify_topology(const Grid& grid) {
  if (!is_connected(grid)) throw Error(ErrorCode::DisconnectedGrid, "topology needs a connected grid");
  if (grid.line_count() + 1 == grid.bus_count()) return Topology::Tree;
  for (const auto& block : biconnected_blocks(grid)) {
    if (block.size() == 1) continue;
    std::vector<BusId> buses;
    for (LineId e : block) {
      buses.push_back(grid.line(e).from);
      buses.push_back(grid.line(e).to);
    }
    std::sort(buses.begin(), buses.end());
    buses.erase(std::unique(buses.begin(), buses.end()), buses.end());
    if (buses.size() != block.size()) return Topology::General;
  }
  return Topology::WeaklyCyclic;
}

enum class LinkKind { TreeLike, RingLike, Other };

struct RemovalComponent {
  std::vector<BusId> buses;             // sorted
  std::vector<LineId> connecting_lines;  // lines joining the removed bus to this component
  LinkKind kind = LinkKind::Other;
};

struct ComponentDecomposition {
  BusId removed_bus = 0;
  std::vector<RemovalComponent> components;
  std::vector<int> component_of;  // bus -> component index, -1 for the removed bus
};

// Connected components of G - v, ordered by their smallest bus id, with the
// lines that attach each of them to v.
inline ComponentDecomposition components_after_removal(const Grid& grid, BusId v) {
  grid.check_bus(v);
  const std::size_t n = grid.bus_count();
  ComponentDecomposition out;
  out.removed_bus = v;
  out.component_of.assign(n, -1);
  for (BusId start = 0; start < n; ++start) {
    if (start == v || out.component_of[start] != -1) continue;
    const int id = static_cast<int>(out.components.size());
    RemovalComponent comp;
    std::queue<BusId> q;
    q.push(start);
    out.component_of[start] = id;
    while (!q.empty()) {
      BusId u = q.front();
      q.pop();
      comp.buses.push_back(u);
      for (const auto& inc : grid.incident(u)) {
        if (inc.neighbor == v || out.component_of[inc.neighbor] != -1) continue;
        out.component_of[inc.neighbor] = id;
        q.push(inc.neighbor);
      }
    }
    std::sort(comp.buses.begin(), comp.buses.end());
    out.components.push_back(std::move(comp));
  }
  for (const auto& inc : grid.incident(v)) {
    auto& comp = out.components[static_cast<std::size_t>(out.component_of[inc.neighbor])];
    comp.connecting_lines.push_back(inc.line);
  }
  for (auto& comp : out.components) {
    std::sort(comp.connecting_lines.begin(), comp.connecting_lines.end());
    comp.kind = comp.connecting_lines.size() == 1   ? LinkKind::TreeLike
                : comp.connecting_lines.size() == 2 ? LinkKind::RingLike
                                                    : LinkKind::Other;
  }
  return out;
}

struct SpanningTree {
  BusId root = 0;
  std::vector<BusId> parent;
  std::vector<LineId> parent_line;  // kNoLine at the root
  std::vector<std::size_t> depth;
  std::vector<BusId> order;  // BFS order, root first
  std::vector<char> in_tree;  // per line
};

inline SpanningTree bfs_spanning_tree(const Grid& grid, BusId root) {
  grid.check_bus(root);
  const std::size_t n = grid.bus_count();
  SpanningTree tree;
  tree.root = root;
  tree.parent.assign(n, root);
  tree.parent_line.assign(n, kNoLine);
  tree.depth.assign(n, 0);
  tree.in_tree.assign(grid.line_count(), 0);
  std::vector<char> seen(n, 0);
  std::queue<BusId> q;
  q.push(root);
  seen[root] = 1;
  while (!q.empty()) {
    BusId u = q.front();
    q.pop();
    tree.order.push_back(u);
    for (const auto& inc : grid.incident(u)) {
      if (seen[inc.neighbor]) continue;
      seen[inc.neighbor] = 1;
      tree.parent[inc.neighbor] = u;
      tree.parent_line[inc.neighbor] = inc.line;
      tree.depth[inc.neighbor] = tree.depth[u] + 1;
      tree.in_tree[inc.line] = 1;
      q.push(inc.neighbor);
    }
  }
  return tree;
}

// One term of a Kirchhoff voltage-law row: the line and the sign with which
// its from->to angle drop enters the loop sum.
struct CycleTerm {
  LineId line;
  double sign;
};

// Fundamental cycle of every non-tree line; the signed angle drops around
// each cycle sum to zero.
inline std::vector<std::vector<CycleTerm>> fundamental_cycles(const Grid& grid, const SpanningTree& tree) {
  std::vector<std::vector<CycleTerm>> cycles;
  for (LineId e = 0; e < grid.line_count(); ++e) {
    if (tree.in_tree[e]) continue;
    const Line& l = grid.line(e);
    std::vector<CycleTerm> cycle{{e, 1.0}};
    // loop: from -> to along e, then back from `to` to `from` through the tree
    BusId up = l.to, down = l.from;
    std::vector<CycleTerm> descending;
    while (up != down) {
      if (tree.depth[up] >= tree.depth[down]) {
        const LineId pl = tree.parent_line[up];
        cycle.push_back({pl, grid.line(pl).from == up ? 1.0 : -1.0});
        up = tree.parent[up];
      } else {
        const LineId pl = tree.parent_line[down];
        descending.push_back({pl, grid.line(pl).from == down ? -1.0 : 1.0});
        down = tree.parent[down];
      }
    }
    cycle.insert(cycle.end(), descending.rbegin(), descending.rend());
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

}  // namespace batplace
