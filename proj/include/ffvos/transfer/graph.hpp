#pragma once

// s-t capacity graphs over pixel grids and their exact minimum cut.

#include <vector>

#include "ffvos/core/raster.hpp"

namespace ffvos::transfer {

/// Per-pixel labels, 1 = foreground (source side).
using LabelField = BinaryMask;

struct CapacityGraph {
  /// Grid shape of the pixel nodes; width * height == node count.
  int width = 0;
  int height = 0;
  /// Cost paid when the node ends on the sink (background) side.
  std::vector<double> source_cap;
  /// Cost paid when the node ends on the source (foreground) side.
  std::vector<double> sink_cap;

  struct Arc {
    int from = 0;
    int to = 0;
    /// Paid when `from` is foreground and `to` is background.
    double cap = 0.0;
    /// Paid when `to` is foreground and `from` is background.
    double rev_cap = 0.0;
  };
  std::vector<Arc> arcs;

  /// Labeling-independent constant removed while building the terminal
  /// capacities; energy = cut cost + offset.
  double offset = 0.0;

  int pixel_count() const noexcept { return static_cast<int>(source_cap.size()); }
  /// Pixels plus the two terminals.
  int node_count() const noexcept { return pixel_count() + 2; }

  /// Throws InvalidInput on negative/non-finite capacities or bad indices.
  void validate() const;
};

/// Sum of capacities severed by `labels` (excluding offset).
double cut_cost(const CapacityGraph& g, const LabelField& labels);

struct MinCutResult {
  LabelField labels;
  /// Value of the minimum cut (== max flow), excluding offset.
  double cut_value = 0.0;
};

/// Exact minimum s-t cut by Boykov-Kolmogorov augmenting paths. Nodes not
/// reachable from the source in the final residual graph are background.
MinCutResult min_cut(const CapacityGraph& g);

}  // namespace ffvos::transfer
