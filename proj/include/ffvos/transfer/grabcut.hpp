#pragma once

// Soft-mask-initialised GrabCut on a window of a frame.
//
// Energy over the window labelling C:
//   E(C) = sum_i phi_i(c_i) + sum_{(i,j) in 8-nbhd} psi_ij [c_i != c_j]
//   phi_i(c) = -log P_c(x_i) - log Q_i(c),   Q_i(1) = clip(M(i)), Q_i(0) = 1 - Q_i(1)
//   psi_ij   = gamma / d(i,j) * exp(-beta |x_i - x_j|^2)

#include <cstdint>
#include <vector>

#include "ffvos/core/raster.hpp"
#include "ffvos/transfer/gmm.hpp"
#include "ffvos/transfer/graph.hpp"

namespace ffvos::transfer {

struct GrabCutParams {
  int K = 5;
  double gamma = 50.0;
  /// Donor frames averaged into the soft mask.
  int p = 10;
  double prob_clamp = 1e-6;
  int max_rounds = 5;
  double convergence_frac = 0.001;
  /// Added to every GMM covariance diagonal.
  double gmm_reg = 1e-4;
  /// Width of the ring around the window whose pixels train the background model.
  int background_band = 10;
  /// Training pixels per GMM are subsampled (seeded) above this count; 0 = all.
  int gmm_max_samples = 10000;

  /// Throws ConfigError.
  void validate() const;
};

struct UnaryField {
  int width = 0;
  int height = 0;
  std::vector<double> phi_bg;
  std::vector<double> phi_fg;
};

struct PairwiseTerms {
  struct Edge {
    int a;
    int b;
    double weight;
  };
  int width = 0;
  int height = 0;
  std::vector<Edge> edges;
};

UnaryField unary_potentials(const ColorPlanes& region, const SoftMask& M, const GaussianMixture& fg,
                            const GaussianMixture& bg, double clamp);

/// 1 / (2 * mean |x_i - x_j|^2) over 8-neighbour pairs; 0 for a constant region.
double estimate_beta(const ColorPlanes& region);

/// gamma / dij * exp(-beta * |xi - xj|^2)
double pairwise_weight(const Rgb& xi, const Rgb& xj, double dij, double beta, double gamma);

/// One edge per unordered 8-neighbour pair (right, down, down-right, down-left).
PairwiseTerms contrast_pairwise(const ColorPlanes& region, double beta, double gamma);

/// Source arc carries phi_bg, sink arc phi_fg (shifted so the smaller is 0),
/// neighbour arcs carry the pairwise weight in both directions.
CapacityGraph build_capacity_graph(const UnaryField& unary, const PairwiseTerms& pairwise);

double labeling_energy(const UnaryField& unary, const PairwiseTerms& pairwise,
                       const LabelField& labels);

struct GrabCutResult {
  /// Full-frame mask; background outside the window.
  BinaryMask mask;
  LabelField initial;
  LabelField final_labels;
  /// Models of the last round.
  GaussianMixture fg_model;
  GaussianMixture bg_model;
  double beta = 0.0;
  int rounds = 0;
  /// The cut came out empty and the initial labelling was kept.
  bool fell_back = false;
};

/// Labels start at (M >= 0.5). Each round refits both GMMs on the current
/// labels (background also sees the band around the window), builds the
/// graph and takes the exact min cut, stopping when fewer than
/// convergence_frac of the pixels change or after max_rounds. Throws
/// PipelineError("unfillable_frame") when the initial foreground is empty.
GrabCutResult grabcut_fill(const Frame& frame, const BoundingBox& box, const SoftMask& M,
                           const GrabCutParams& params, std::uint64_t seed);

}  // namespace ffvos::transfer
