// Boykov-Kolmogorov max-flow: two search trees grown from the terminals,
// augmentation along the path where they meet, then adoption of orphans.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "ffvos/core/error.hpp"
#include "ffvos/transfer/graph.hpp"

namespace ffvos::transfer {
namespace {

class BkMaxflow {
 public:
  explicit BkMaxflow(int nodes, std::size_t edges_hint = 0) : nodes_(nodes) {
    arcs_.reserve(2 * edges_hint);
  }

  void add_tweights(int i, double cap_source, double cap_sink) {
    const double delta = nodes_[i].tr_cap;
    if (delta > 0) {
      cap_source += delta;
    } else {
      cap_sink -= delta;
    }
    flow_ += std::min(cap_source, cap_sink);
    nodes_[i].tr_cap = cap_source - cap_sink;
  }

  void add_edge(int i, int j, double cap, double rev_cap) {
    const int a = static_cast<int>(arcs_.size());
    arcs_.push_back({j, nodes_[i].first, a + 1, cap});
    arcs_.push_back({i, nodes_[j].first, a, rev_cap});
    nodes_[i].first = a;
    nodes_[j].first = a + 1;
  }

  double maxflow();

  bool source_side(int i) const { return nodes_[i].parent != kNone && !nodes_[i].is_sink; }

 private:
  static constexpr int kNone = -1;
  static constexpr int kTerminal = -2;
  static constexpr int kOrphan = -3;
  static constexpr int kInfiniteDist = std::numeric_limits<int>::max();

  struct Node {
    int first = -1;       // first outgoing arc
    int parent = kNone;   // arc to the parent in the tree, or a sentinel
    long ts = 0;          // time stamp of the last distance update
    int dist = 0;         // distance to the terminal
    bool is_sink = false;
    bool queued = false;
    double tr_cap = 0.0;  // residual to source (>0) or sink (<0)
  };

  struct Arc {
    int head;
    int next;
    int sister;
    double r_cap;
  };

  void set_active(int i) {
    if (!nodes_[i].queued) {
      nodes_[i].queued = true;
      active_.push_back(i);
    }
  }

  int next_active() {
    while (!active_.empty()) {
      const int i = active_.front();
      active_.pop_front();
      nodes_[i].queued = false;
      if (nodes_[i].parent != kNone) return i;
    }
    return -1;
  }

  void set_orphan_front(int i) {
    nodes_[i].parent = kOrphan;
    orphans_.push_front(i);
  }
  void set_orphan_rear(int i) {
    nodes_[i].parent = kOrphan;
    orphans_.push_back(i);
  }

  void augment(int middle);
  void process_orphan(int i);

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::deque<int> active_;
  std::deque<int> orphans_;
  double flow_ = 0.0;
  long time_ = 0;
};

void BkMaxflow::augment(int middle) {
  const int tail = arcs_[arcs_[middle].sister].head;
  const int head = arcs_[middle].head;

  double bottleneck = arcs_[middle].r_cap;
  int i = tail;
  for (int a; (a = nodes_[i].parent) != kTerminal; i = arcs_[a].head) {
    bottleneck = std::min(bottleneck, arcs_[arcs_[a].sister].r_cap);
  }
  bottleneck = std::min(bottleneck, nodes_[i].tr_cap);
  i = head;
  for (int a; (a = nodes_[i].parent) != kTerminal; i = arcs_[a].head) {
    bottleneck = std::min(bottleneck, arcs_[a].r_cap);
  }
  bottleneck = std::min(bottleneck, -nodes_[i].tr_cap);

  arcs_[arcs_[middle].sister].r_cap += bottleneck;
  arcs_[middle].r_cap -= bottleneck;

  i = tail;
  for (;;) {
    const int a = nodes_[i].parent;
    if (a == kTerminal) break;
    arcs_[a].r_cap += bottleneck;
    arcs_[arcs_[a].sister].r_cap -= bottleneck;
    if (arcs_[arcs_[a].sister].r_cap == 0.0) set_orphan_front(i);
    i = arcs_[a].head;
  }
  nodes_[i].tr_cap -= bottleneck;
  if (nodes_[i].tr_cap == 0.0) set_orphan_front(i);

  i = head;
  for (;;) {
    const int a = nodes_[i].parent;
    if (a == kTerminal) break;
    arcs_[arcs_[a].sister].r_cap += bottleneck;
    arcs_[a].r_cap -= bottleneck;
    if (arcs_[a].r_cap == 0.0) set_orphan_front(i);
    i = arcs_[a].head;
  }
  nodes_[i].tr_cap += bottleneck;
  if (nodes_[i].tr_cap == 0.0) set_orphan_front(i);

  flow_ += bottleneck;
}

void BkMaxflow::process_orphan(int i) {
  const bool sink = nodes_[i].is_sink;
  // Residual capacity of the arc that would carry flow from neighbour to i
  // (source tree) or from i to neighbour (sink tree).
  auto feeds = [&](int a0) {
    return sink ? arcs_[a0].r_cap > 0.0 : arcs_[arcs_[a0].sister].r_cap > 0.0;
  };

  int a0_min = kNone;
  int d_min = kInfiniteDist;
  for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
    if (!feeds(a0)) continue;
    int j = arcs_[a0].head;
    if (nodes_[j].is_sink != sink || nodes_[j].parent == kNone) continue;

    // Walk to the root to check that j is still connected to the terminal.
    int d = 0;
    for (;;) {
      if (nodes_[j].ts == time_) {
        d += nodes_[j].dist;
        break;
      }
      const int a = nodes_[j].parent;
      ++d;
      if (a == kTerminal) {
        nodes_[j].ts = time_;
        nodes_[j].dist = 1;
        break;
      }
      if (a == kOrphan) {
        d = kInfiniteDist;
        break;
      }
      j = arcs_[a].head;
    }
    if (d == kInfiniteDist) continue;
    if (d < d_min) {
      a0_min = a0;
      d_min = d;
    }
    for (j = arcs_[a0].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
      nodes_[j].ts = time_;
      nodes_[j].dist = d--;
    }
  }

  nodes_[i].parent = a0_min;
  if (a0_min != kNone) {
    nodes_[i].ts = time_;
    nodes_[i].dist = d_min + 1;
    return;
  }

  // No valid parent: i becomes free and its tree neighbours are revisited.
  for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
    const int j = arcs_[a0].head;
    const int a = nodes_[j].parent;
    if (nodes_[j].is_sink != sink || a == kNone) continue;
    if (feeds(a0)) set_active(j);
    if (a != kTerminal && a != kOrphan && arcs_[a].head == i) set_orphan_rear(j);
  }
}

double BkMaxflow::maxflow() {
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    Node& n = nodes_[i];
    if (n.tr_cap > 0.0) {
      n.is_sink = false;
      n.parent = kTerminal;
      n.ts = 0;
      n.dist = 1;
      set_active(i);
    } else if (n.tr_cap < 0.0) {
      n.is_sink = true;
      n.parent = kTerminal;
      n.ts = 0;
      n.dist = 1;
      set_active(i);
    } else {
      n.parent = kNone;
    }
  }

  int current = -1;
  for (;;) {
    int i = current;
    current = -1;
    if (i >= 0 && nodes_[i].parent == kNone) i = -1;
    if (i < 0 && (i = next_active()) < 0) break;

    // Grow the tree containing i until it touches the other tree.
    int middle = -1;
    Node& ni = nodes_[i];
    for (int a = ni.first; a >= 0; a = arcs_[a].next) {
      const bool open = ni.is_sink ? arcs_[arcs_[a].sister].r_cap > 0.0 : arcs_[a].r_cap > 0.0;
      if (!open) continue;
      const int j = arcs_[a].head;
      Node& nj = nodes_[j];
      if (nj.parent == kNone) {
        nj.is_sink = ni.is_sink;
        nj.parent = arcs_[a].sister;
        nj.ts = ni.ts;
        nj.dist = ni.dist + 1;
        set_active(j);
      } else if (nj.is_sink != ni.is_sink) {
        middle = ni.is_sink ? arcs_[a].sister : a;
        break;
      } else if (nj.ts <= ni.ts && nj.dist > ni.dist) {
        // Shorter path to the terminal through i.
        nj.parent = arcs_[a].sister;
        nj.ts = ni.ts;
        nj.dist = ni.dist + 1;
      }
    }

    ++time_;
    if (middle < 0) continue;

    current = i;
    augment(middle);
    while (!orphans_.empty()) {
      const int o = orphans_.front();
      orphans_.pop_front();
      process_orphan(o);
    }
  }
  return flow_;
}

}  // namespace

void CapacityGraph::validate() const {
  if (source_cap.size() != sink_cap.size()) throw InvalidInput("CapacityGraph: terminal arrays differ");
  if (width * height != pixel_count()) throw InvalidInput("CapacityGraph: grid shape mismatch");
  auto ok = [](double c) { return std::isfinite(c) && c >= 0.0; };
  for (std::size_t i = 0; i < source_cap.size(); ++i) {
    if (!ok(source_cap[i]) || !ok(sink_cap[i])) {
      throw InvalidInput("CapacityGraph: terminal capacity of node " + std::to_string(i) +
                         " is negative or non-finite");
    }
  }
  for (const auto& a : arcs) {
    if (a.from < 0 || a.to < 0 || a.from >= pixel_count() || a.to >= pixel_count() || a.from == a.to) {
      throw InvalidInput("CapacityGraph: arc endpoint out of range");
    }
    if (!ok(a.cap) || !ok(a.rev_cap)) throw InvalidInput("CapacityGraph: arc capacity negative or non-finite");
  }
}

double cut_cost(const CapacityGraph& g, const LabelField& labels) {
  if (static_cast<int>(labels.pixel_count()) != g.pixel_count()) {
    throw InvalidInput("cut_cost: label count differs from node count");
  }
  double cost = 0.0;
  for (int i = 0; i < g.pixel_count(); ++i) cost += labels[i] ? g.sink_cap[i] : g.source_cap[i];
  for (const auto& a : g.arcs) {
    if (labels[a.from] && !labels[a.to]) cost += a.cap;
    if (labels[a.to] && !labels[a.from]) cost += a.rev_cap;
  }
  return cost;
}

MinCutResult min_cut(const CapacityGraph& g) {
  g.validate();
  const int n = g.pixel_count();
  BkMaxflow bk(n, g.arcs.size());
  for (int i = 0; i < n; ++i) bk.add_tweights(i, g.source_cap[i], g.sink_cap[i]);
  for (const auto& a : g.arcs) bk.add_edge(a.from, a.to, a.cap, a.rev_cap);

  MinCutResult out;
  out.cut_value = bk.maxflow();
  out.labels = n > 0 ? LabelField(g.width, g.height) : LabelField();
  for (int i = 0; i < n; ++i) out.labels.set(static_cast<std::size_t>(i), bk.source_side(i));
  return out;
}

}  // namespace ffvos::transfer
