#include "ffvos/ingest/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "ffvos/core/error.hpp"

namespace ffvos::ingest {
namespace {

using Rng = std::mt19937_64;

constexpr double kPi = 3.14159265358979323846;

float quantize(double v) {
  const long q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<float>(q) / 255.0f;
}

double quantize_score(double v) { return std::lround(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

// Triangle wave keeping a coordinate inside [0, span].
double reflect(double p, double span) {
  if (span <= 0.0) return 0.0;
  double m = std::fmod(p, 2.0 * span);
  if (m < 0.0) m += 2.0 * span;
  return m <= span ? m : 2.0 * span - m;
}

double box_iou(const BinaryMask& a, const BinaryMask& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask rect_mask(int w, int h, const BoundingBox& r) {
  BinaryMask m(w, h);
  for (int y = std::max(r.y, 0); y < std::min(r.bottom(), h); ++y) {
    for (int x = std::max(r.x, 0); x < std::min(r.right(), w); ++x) m.set(x, y, true);
  }
  return m;
}

// Score map: `inside` on the mask, a faint halo (below the usual 0.2
// binarization threshold) within two pixels of it, zero elsewhere.
SoftMask score_map_for(const BinaryMask& m, double inside) {
  SoftMask s(m.width(), m.height());
  const double halo = quantize_score(0.1);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.at(x, y)) {
        s.set(x, y, quantize_score(inside));
        continue;
      }
      bool near = false;
      for (int dy = -2; dy <= 2 && !near; ++dy) {
        for (int dx = -2; dx <= 2 && !near; ++dx) {
          const int xx = x + dx, yy = y + dy;
          near = xx >= 0 && yy >= 0 && xx < m.width() && yy < m.height() && m.at(xx, yy);
        }
      }
      if (near) s.set(x, y, halo);
    }
  }
  return s;
}

std::vector<double> gaussian_vector(Rng& rng, int dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  for (auto& x : v) x /= s;
}

// Orthonormal centers via Gram-Schmidt; all pairwise distances are sqrt(2).
std::vector<std::vector<double>> orthonormal_centers(Rng& rng, int count, int dim) {
  std::vector<std::vector<double>> centers;
  while (static_cast<int>(centers.size()) < count) {
    auto v = gaussian_vector(rng, dim);
    for (const auto& c : centers) {
      const double proj = std::inner_product(v.begin(), v.end(), c.begin(), 0.0);
      for (int i = 0; i < dim; ++i) v[i] -= proj * c[i];
    }
    double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm < 1e-6) continue;
    for (auto& x : v) x /= norm;
    centers.push_back(std::move(v));
  }
  return centers;
}

Descriptor sample_descriptor(Rng& rng, const std::vector<double>& center, double sigma) {
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<double> v(center);
  for (auto& x : v) x += n(rng);
  normalize(v);
  // Store float32-representable values so the FEAT round trip is exact.
  for (auto& x : v) x = static_cast<float>(x);
  return {std::move(v)};
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("synthetic config: " + what); };
  if (frames < 4) fail("frames must be >= 4");
  if (width < 32 || height < 32) fail("frame size must be at least 32x32");
  if (!(drop_fraction >= 0.0 && drop_fraction <= 0.5)) fail("drop fraction must be in [0, 0.5]");
  if (dropped) {
    for (int f : *dropped) {
      if (f < 0 || f >= frames) fail("dropped frame index out of range");
    }
    if (dropped->size() * 2 > static_cast<std::size_t>(frames)) fail("more than half the frames dropped");
  }
  if (!(object_width_frac > 0.0 && object_width_frac <= 0.8 && object_height_frac > 0.0 &&
        object_height_frac <= 0.8)) {
    fail("object size fractions must be in (0, 0.8]");
  }
  if (jitter_px < 0) fail("jitter must be >= 0");
  if (distractors < 0) fail("distractor count must be >= 0");
  if (distractors > 0 && distractor_clusters * (frames / 2) < distractors * frames) {
    fail("too few distractor clusters to keep each below half the frames");
  }
  if (descriptor_dim < distractor_clusters + 1) fail("descriptor_dim must exceed distractor_clusters");
  if (!(descriptor_sigma >= 0.0)) fail("descriptor sigma must be >= 0");
}

bool operator==(const Proposal& a, const Proposal& b) {
  return a.score_map == b.score_map && a.objectness == b.objectness &&
         a.manifest_index == b.manifest_index;
}

bool operator==(const ProposalSet& a, const ProposalSet& b) {
  return a.frame_index == b.frame_index && a.proposals == b.proposals;
}

bool operator==(const SynthCase& a, const SynthCase& b) {
  return a.sequence.name == b.sequence.name && a.sequence.frames == b.sequence.frames &&
         a.ground_truth == b.ground_truth && a.object_boxes == b.object_boxes &&
         a.proposals == b.proposals && a.descriptors == b.descriptors &&
         a.dropped_frames == b.dropped_frames;
}

SynthCase generate_synthetic_case(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int W = cfg.width, H = cfg.height, N = cfg.frames;
  const int ow = std::max(4, static_cast<int>(std::lround(cfg.object_width_frac * W)));
  const int oh = std::max(4, static_cast<int>(std::lround(cfg.object_height_frac * H)));

  SynthCase out;
  out.sequence.name = cfg.name;

  // Dropped frames.
  if (cfg.dropped) {
    out.dropped_frames = *cfg.dropped;
  } else {
    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const int count = static_cast<int>(std::floor(N * cfg.drop_fraction + 1e-9));
    out.dropped_frames.assign(order.begin(), order.begin() + count);
  }
  std::sort(out.dropped_frames.begin(), out.dropped_frames.end());
  out.dropped_frames.erase(std::unique(out.dropped_frames.begin(), out.dropped_frames.end()),
                           out.dropped_frames.end());

  // Static background texture parameters.
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::array<std::array<Wave, 2>, 3> waves{};
  for (auto& channel : waves) {
    for (auto& w : channel) {
      w = {0.05 + 0.25 * unit(rng), 0.05 + 0.25 * unit(rng), 2.0 * kPi * unit(rng),
           0.04 + 0.04 * unit(rng)};
    }
  }
  const std::array<double, 3> bg_base{0.25, 0.45, 0.55};
  const std::array<double, 3> fg_base{0.82, 0.22, 0.18};

  // Trajectory.
  const double span_x = W - ow, span_y = H - oh;
  const double x0 = unit(rng) * span_x, y0 = unit(rng) * span_y;
  const double sx = unit(rng) < 0.5 ? -1.0 : 1.0, sy = unit(rng) < 0.5 ? -1.0 : 1.0;

  // Descriptor cluster centers: index 0 is the object.
  const auto centers = orthonormal_centers(rng, cfg.distractor_clusters + 1, cfg.descriptor_dim);
  std::vector<int> cluster_frames(cfg.distractor_clusters, 0);
  const int cluster_cap = N / 2;

  std::normal_distribution<double> pixel_noise(0.0, 0.01);
  for (int t = 0; t < N; ++t) {
    const int ox = static_cast<int>(std::lround(reflect(x0 + sx * cfg.velocity_x * t, span_x)));
    const int oy = static_cast<int>(std::lround(reflect(y0 + sy * cfg.velocity_y * t, span_y)));
    const BoundingBox obj{ox, oy, ow, oh};
    out.object_boxes.push_back(obj);

    Frame frame(W, H);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        std::array<double, 3> c{};
        if (obj.contains(x, y)) {
          const int u = x - ox, v = y - oy;
          const double checker = ((u / 5 + v / 5) % 2 == 0) ? 0.07 : -0.07;
          const double stripe = 0.04 * std::sin(0.9 * u);
          for (int k = 0; k < 3; ++k) c[k] = fg_base[k] + checker + stripe;
        } else {
          for (int k = 0; k < 3; ++k) {
            c[k] = bg_base[k];
            for (const auto& w : waves[k]) c[k] += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
          }
        }
        for (int k = 0; k < 3; ++k) c[k] += pixel_noise(rng);
        frame.set(x, y, {quantize(c[0]), quantize(c[1]), quantize(c[2])});
      }
    }
    out.sequence.frames.push_back(std::move(frame));
    const BinaryMask gt = rect_mask(W, H, obj);
    out.ground_truth.push_back(gt);

    // Proposals, generated in ranking-independent order.
    struct Raw {
      SoftMask map;
      double score;
      Descriptor desc;
    };
    std::vector<Raw> raw;
    const bool dropped = std::binary_search(out.dropped_frames.begin(), out.dropped_frames.end(), t);
    if (!dropped) {
      std::uniform_int_distribution<int> jitter(-cfg.jitter_px, cfg.jitter_px);
      BinaryMask jm;
      for (;;) {
        const int l = ox + jitter(rng), r = ox + ow + jitter(rng);
        const int top = oy + jitter(rng), bot = oy + oh + jitter(rng);
        jm = rect_mask(W, H, {l, top, std::max(1, r - l), std::max(1, bot - top)});
        if (!jm.empty() && box_iou(jm, gt) >= 0.7) break;
      }
      const double score = 0.75 + 0.23 * unit(rng);
      raw.push_back({score_map_for(jm, 0.9), score, sample_descriptor(rng, centers[0], cfg.descriptor_sigma)});
    }
    for (int d = 0; d < cfg.distractors; ++d) {
      BinaryMask blob;
      for (int attempt = 0;; ++attempt) {
        const double rx = 4.0 + 5.0 * unit(rng), ry = 4.0 + 5.0 * unit(rng);
        const double cx = unit(rng) * (W - 1), cy = unit(rng) * (H - 1);
        blob = BinaryMask(W, H);
        for (int y = 0; y < H; ++y) {
          for (int x = 0; x < W; ++x) {
            const double ex = (x - cx) / rx, ey = (y - cy) / ry;
            if (ex * ex + ey * ey <= 1.0) blob.set(x, y, true);
          }
        }
        if (blob.area() >= 4 && box_iou(blob, gt) <= 0.1) break;
        if (attempt > 1000) throw ConfigError("synthetic config: cannot place distractor blobs");
      }
      std::uniform_int_distribution<int> pick(0, cfg.distractor_clusters - 1);
      int cluster = pick(rng);
      while (cluster_frames[cluster] >= cluster_cap) cluster = pick(rng);
      ++cluster_frames[cluster];
      const double score = 0.3 + 0.6 * unit(rng);
      raw.push_back({score_map_for(blob, 0.78), score,
                     sample_descriptor(rng, centers[cluster + 1], cfg.descriptor_sigma)});
    }

    // Manifest order is a random permutation of generation order.
    std::vector<int> perm(raw.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ProposalSet ps;
    ps.frame_index = t;
    std::vector<Descriptor> descs;
    for (std::size_t m = 0; m < perm.size(); ++m) {
      Raw& r = raw[perm[m]];
      // Round-trips through the JSON manifest exactly.
      ps.proposals.push_back({std::move(r.map), r.score, static_cast<int>(m)});
      descs.push_back(std::move(r.desc));
    }
    std::stable_sort(ps.proposals.begin(), ps.proposals.end(),
                     [](const Proposal& a, const Proposal& b) { return a.objectness > b.objectness; });
    out.proposals.push_back(std::move(ps));
    out.descriptors.push_back(std::move(descs));
  }
  return out;
}

fs::path write_synthetic_case(const SynthCase& c, const fs::path& root) {
  const SequenceLayout layout{root / c.sequence.name};
  fs::create_directories(layout.frames_dir());
  fs::create_directories(layout.proposals_dir());
  fs::create_directories(layout.root / "features");
  fs::create_directories(layout.gt_dir());
  for (int t = 0; t < c.sequence.size(); ++t) {
    const std::string stem = frame_stem(t);
    write_frame(c.sequence.frames[t], layout.frames_dir() / (stem + ".png"));
    write_binary_mask(c.ground_truth[t], layout.gt_dir() / (stem + ".png"));
    write_proposal_set(c.proposals[t], layout.proposals_dir());
    write_descriptor_file(c.descriptors[t], layout.features_file(t));
  }
  nlohmann::json meta;
  meta["name"] = c.sequence.name;
  meta["frames"] = c.sequence.size();
  meta["width"] = c.sequence.width();
  meta["height"] = c.sequence.height();
  meta["dropped_frames"] = c.dropped_frames;
  std::ofstream out(layout.root / "synth.json");
  out << meta.dump(2) << '\n';
  if (!out) throw WriteError("cannot write synth.json in " + layout.root.string());
  return layout.root;
}

}  // namespace ffvos::ingest
