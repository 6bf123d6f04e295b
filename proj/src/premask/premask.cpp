#include "ffvos/premask.hpp"

#include <algorithm>
#include <string>

#include "ffvos/core/error.hpp"

namespace ffvos::premask {

BinaryMask binarize(const SoftMask& m, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("binarize: tau must be in (0,1)");
  BinaryMask out(m.width(), m.height());
  for (std::size_t i = 0; i < m.pixel_count(); ++i) out.set(i, m[i] >= tau);
  return out;
}

PreliminaryMask preliminary_mask(const ingest::ProposalSet& ps,
                                 std::span<const ingest::Descriptor> descriptors, int k, double tau,
                                 int frame_width, int frame_height) {
  if (k < 1) throw InvalidInput("preliminary_mask: k must be >= 1");
  PreliminaryMask out{BinaryMask(frame_width, frame_height), {}};

  const int keep = std::min<int>(k, static_cast<int>(ps.proposals.size()));
  for (int rank = 0; rank < keep; ++rank) {
    const auto& p = ps.proposals[rank];
    if (p.score_map.width() != frame_width || p.score_map.height() != frame_height) {
      throw InvalidInput("preliminary_mask: score map size differs from frame " +
                         std::to_string(ps.frame_index));
    }
    BinaryMask bin = binarize(p.score_map, tau);
    if (bin.empty()) continue;
    if (p.manifest_index < 0 || static_cast<std::size_t>(p.manifest_index) >= descriptors.size()) {
      throw InvalidInput("preliminary_mask: no descriptor for proposal " +
                         std::to_string(p.manifest_index) + " of frame " +
                         std::to_string(ps.frame_index));
    }
    out.mask = mask_union(out.mask, bin);
    out.records.push_back(
        {ps.frame_index, rank, std::move(bin), descriptors[p.manifest_index], std::nullopt});
  }
  return out;
}

}  // namespace ffvos::premask
