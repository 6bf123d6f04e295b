#include "ffvos/transfer/grabcut.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include <spdlog/spdlog.h>

#include "ffvos/core/error.hpp"
#include "ffvos/simd/kernels.hpp"

namespace ffvos::transfer {
namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

struct NeighbourOffset {
  int dx;
  int dy;
  double dist;
};
constexpr NeighbourOffset kOffsets[] = {{1, 0, 1.0}, {0, 1, 1.0}, {1, 1, kSqrt2}, {-1, 1, kSqrt2}};

// Calls fn(a, b, sqdiff, dist) for every unordered 8-neighbour pair, grouped
// by offset then row-major.
template <class Fn>
void for_each_neighbour_pair(const ColorPlanes& px, Fn&& fn) {
  const auto& k = simd::kernels();
  const int w = px.width, h = px.height;
  std::vector<double> sq(static_cast<std::size_t>(w));
  for (const auto& off : kOffsets) {
    const int x0 = std::max(0, -off.dx);
    const int x1 = std::min(w, w - off.dx);  // exclusive
    const int n = x1 - x0;
    if (n <= 0) continue;
    for (int y = 0; y + off.dy < h; ++y) {
      const std::size_t a = static_cast<std::size_t>(y) * w + x0;
      const std::size_t b = static_cast<std::size_t>(y + off.dy) * w + x0 + off.dx;
      k.color_sqdiff(px.r.data() + a, px.g.data() + a, px.b.data() + a, px.r.data() + b,
                     px.g.data() + b, px.b.data() + b, static_cast<std::size_t>(n), sq.data());
      for (int i = 0; i < n; ++i) {
        fn(static_cast<int>(a + i), static_cast<int>(b + i), sq[i], off.dist);
      }
    }
  }
}

ColorPlanes gather(const ColorPlanes& src, const std::vector<std::size_t>& idx) {
  ColorPlanes out;
  out.width = static_cast<int>(idx.size());
  out.height = 1;
  out.r.reserve(idx.size());
  out.g.reserve(idx.size());
  out.b.reserve(idx.size());
  for (std::size_t i : idx) {
    out.r.push_back(src.r[i]);
    out.g.push_back(src.g[i]);
    out.b.push_back(src.b[i]);
  }
  return out;
}

void append(ColorPlanes& dst, const ColorPlanes& src) {
  dst.r.insert(dst.r.end(), src.r.begin(), src.r.end());
  dst.g.insert(dst.g.end(), src.g.begin(), src.g.end());
  dst.b.insert(dst.b.end(), src.b.begin(), src.b.end());
  dst.width = static_cast<int>(dst.r.size());
  dst.height = 1;
}

ColorPlanes subsample(const ColorPlanes& s, int max_samples, std::uint64_t seed) {
  if (max_samples <= 0 || s.size() <= static_cast<std::size_t>(max_samples)) return s;
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < static_cast<std::size_t>(max_samples); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(max_samples));
  std::sort(idx.begin(), idx.end());
  return gather(s, idx);
}

// Pixels of the frame within `band` of the box but outside it. band <= 0
// selects every pixel outside the box.
ColorPlanes background_ring(const Frame& frame, const BoundingBox& box, int band) {
  const int x0 = band > 0 ? std::max(0, box.x - band) : 0;
  const int y0 = band > 0 ? std::max(0, box.y - band) : 0;
  const int x1 = band > 0 ? std::min(frame.width(), box.right() + band) : frame.width();
  const int y1 = band > 0 ? std::min(frame.height(), box.bottom() + band) : frame.height();
  ColorPlanes out;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      if (box.contains(x, y)) continue;
      const Rgb c = frame.at(x, y);
      out.r.push_back(c.r);
      out.g.push_back(c.g);
      out.b.push_back(c.b);
    }
  }
  out.width = static_cast<int>(out.r.size());
  out.height = 1;
  return out;
}

std::vector<std::size_t> indices_with(const LabelField& labels, bool value) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < labels.pixel_count(); ++i) {
    if (labels[i] == value) idx.push_back(i);
  }
  return idx;
}

}  // namespace

void GrabCutParams::validate() const {
  if (K < 1) throw ConfigError("grabcut: K must be >= 1");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("grabcut: gamma must be >= 0");
  if (p < 1) throw ConfigError("grabcut: p must be >= 1");
  if (!(prob_clamp > 0.0 && prob_clamp < 0.5)) throw ConfigError("grabcut: prob_clamp must be in (0, 0.5)");
  if (max_rounds < 1) throw ConfigError("grabcut: max_rounds must be >= 1");
  if (!(convergence_frac >= 0.0)) throw ConfigError("grabcut: convergence_frac must be >= 0");
  if (!(gmm_reg > 0.0)) throw ConfigError("grabcut: gmm_reg must be > 0");
  if (gmm_max_samples < 0) throw ConfigError("grabcut: gmm_max_samples must be >= 0");
}

UnaryField unary_potentials(const ColorPlanes& region, const SoftMask& M, const GaussianMixture& fg,
                            const GaussianMixture& bg, double clamp) {
  if (M.width() != region.width || M.height() != region.height) {
    throw InvalidInput("unary_potentials: soft mask does not match region");
  }
  if (!(clamp > 0.0 && clamp < 0.5)) throw InvalidInput("unary_potentials: clamp must be in (0, 0.5)");
  const std::size_t n = region.size();
  UnaryField u{region.width, region.height, std::vector<double>(n), std::vector<double>(n)};
  std::vector<double> log_fg(n), log_bg(n);
  fg.log_density(region, log_fg);
  bg.log_density(region, log_bg);
  for (std::size_t i = 0; i < n; ++i) {
    const double q_fg = std::clamp(M[i], clamp, 1.0 - clamp);
    u.phi_fg[i] = -log_fg[i] - std::log(q_fg);
    u.phi_bg[i] = -log_bg[i] - std::log(1.0 - q_fg);
  }
  return u;
}

double estimate_beta(const ColorPlanes& region) {
  if (region.size() < 2) throw InvalidInput("estimate_beta: region needs at least 2 pixels");
  double total = 0.0;
  std::size_t pairs = 0;
  for_each_neighbour_pair(region, [&](int, int, double sq, double) {
    total += sq;
    ++pairs;
  });
  if (pairs == 0 || total <= 0.0) return 0.0;
  return 1.0 / (2.0 * (total / static_cast<double>(pairs)));
}

double pairwise_weight(const Rgb& xi, const Rgb& xj, double dij, double beta, double gamma) {
  if (!(dij > 0.0)) throw InvalidInput("pairwise_weight: distance must be > 0");
  const double dr = xi.r - xj.r, dg = xi.g - xj.g, db = xi.b - xj.b;
  return gamma / dij * std::exp(-beta * (dr * dr + dg * dg + db * db));
}

PairwiseTerms contrast_pairwise(const ColorPlanes& region, double beta, double gamma) {
  PairwiseTerms t{region.width, region.height, {}};
  t.edges.reserve(4 * region.size());
  for_each_neighbour_pair(region, [&](int a, int b, double sq, double dist) {
    t.edges.push_back({a, b, gamma / dist * std::exp(-beta * sq)});
  });
  return t;
}

CapacityGraph build_capacity_graph(const UnaryField& unary, const PairwiseTerms& pairwise) {
  if (unary.width != pairwise.width || unary.height != pairwise.height) {
    throw InvalidInput("build_capacity_graph: unary and pairwise grids differ");
  }
  CapacityGraph g;
  g.width = unary.width;
  g.height = unary.height;
  const std::size_t n = unary.phi_fg.size();
  g.source_cap.resize(n);
  g.sink_cap.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::min(unary.phi_bg[i], unary.phi_fg[i]);
    g.source_cap[i] = unary.phi_bg[i] - m;
    g.sink_cap[i] = unary.phi_fg[i] - m;
    g.offset += m;
  }
  g.arcs.reserve(pairwise.edges.size());
  for (const auto& e : pairwise.edges) g.arcs.push_back({e.a, e.b, e.weight, e.weight});
  return g;
}

double labeling_energy(const UnaryField& unary, const PairwiseTerms& pairwise,
                       const LabelField& labels) {
  if (labels.pixel_count() != unary.phi_fg.size()) {
    throw InvalidInput("labeling_energy: label field size mismatch");
  }
  double e = 0.0;
  for (std::size_t i = 0; i < labels.pixel_count(); ++i) e += labels[i] ? unary.phi_fg[i] : unary.phi_bg[i];
  for (const auto& edge : pairwise.edges) {
    if (labels[edge.a] != labels[edge.b]) e += edge.weight;
  }
  return e;
}

GrabCutResult grabcut_fill(const Frame& frame, const BoundingBox& box, const SoftMask& M,
                           const GrabCutParams& params, std::uint64_t seed) {
  params.validate();
  if (!box.fits(frame.width(), frame.height())) throw InvalidInput("grabcut_fill: box outside frame");
  if (M.width() != box.w || M.height() != box.h) {
    throw InvalidInput("grabcut_fill: soft mask size differs from box");
  }

  const ColorPlanes region = extract_region(frame, box);
  LabelField initial(box.w, box.h);
  for (std::size_t i = 0; i < M.pixel_count(); ++i) initial.set(i, M[i] >= 0.5);
  if (initial.empty()) {
    throw PipelineError("unfillable_frame", -1, "grabcut_fill: soft mask has no pixel >= 0.5");
  }

  ColorPlanes ring = background_ring(frame, box, params.background_band);
  if (ring.size() == 0 && params.background_band > 0) ring = background_ring(frame, box, 0);

  const double beta = region.size() >= 2 ? estimate_beta(region) : 0.0;
  const PairwiseTerms pairwise = contrast_pairwise(region, beta, params.gamma);

  LabelField labels = initial;
  std::optional<GaussianMixture> fg_model, bg_model;
  bool fell_back = false;
  int rounds = 0;
  const std::size_t n = region.size();
  for (int round = 0; round < params.max_rounds; ++round) {
    ++rounds;
    const std::uint64_t round_seed = seed + 2ull * static_cast<std::uint64_t>(round);
    const ColorPlanes fg_px =
        subsample(gather(region, indices_with(labels, true)), params.gmm_max_samples, round_seed);
    ColorPlanes bg_px = gather(region, indices_with(labels, false));
    append(bg_px, ring);
    if (bg_px.size() == 0) {
      spdlog::warn("grabcut_fill: no background samples; using the whole window");
      bg_px = region;
    }
    bg_px = subsample(bg_px, params.gmm_max_samples, round_seed + 1);

    fg_model.emplace(fit_gmm(fg_px, params.K, round_seed, params.gmm_reg));
    bg_model.emplace(fit_gmm(bg_px, params.K, round_seed + 1, params.gmm_reg));

    const UnaryField unary = unary_potentials(region, M, *fg_model, *bg_model, params.prob_clamp);
    const MinCutResult cut = min_cut(build_capacity_graph(unary, pairwise));
    if (cut.labels.empty()) {
      spdlog::warn("grabcut_fill: min cut produced an empty foreground; keeping the soft-mask labels");
      labels = initial;
      fell_back = true;
      break;
    }
    std::size_t changed = 0;
    for (std::size_t i = 0; i < n; ++i) changed += labels[i] != cut.labels[i] ? 1 : 0;
    labels = cut.labels;
    if (static_cast<double>(changed) < params.convergence_frac * static_cast<double>(n)) break;
  }

  return GrabCutResult{embed(labels, box, frame.width(), frame.height()),
                       initial,
                       labels,
                       std::move(*fg_model),
                       std::move(*bg_model),
                       beta,
                       rounds,
                       fell_back};
}

}  // namespace ffvos::transfer
