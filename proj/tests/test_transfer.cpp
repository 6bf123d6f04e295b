#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "ffvos/core/error.hpp"
#include "ffvos/ingest/synth.hpp"
#include "ffvos/metrics.hpp"
#include "ffvos/transfer/fill.hpp"
#include "ffvos/transfer/gmm.hpp"
#include "ffvos/transfer/grabcut.hpp"
#include "ffvos/transfer/graph.hpp"
#include "oracles.hpp"

using namespace ffvos;
using namespace ffvos::transfer;

namespace {

constexpr double kPi = 3.14159265358979323846;

GaussianMixture single(Rgb mean, double var) {
  GaussianComponent c;
  c.mean = {mean.r, mean.g, mean.b};
  c.cov = {var, 0, 0, 0, var, 0, 0, 0, var};
  return GaussianMixture({c});
}

ColorPlanes planes(const std::vector<Rgb>& px, int w, int h) {
  ColorPlanes p;
  p.width = w;
  p.height = h;
  for (const Rgb& c : px) {
    p.r.push_back(c.r);
    p.g.push_back(c.g);
    p.b.push_back(c.b);
  }
  return p;
}

std::optional<BinaryMask> present(int w, int h, const BoundingBox& r) {
  return oracle::rect_mask(w, h, r);
}

}  // namespace

// ---- donor selection -------------------------------------------------------

TEST(FindUndetected, Examples) {
  std::vector<std::optional<BinaryMask>> masks(10, BinaryMask(2, 2, true));
  EXPECT_TRUE(find_undetected(masks).empty());
  masks[3].reset();
  masks[7].reset();
  EXPECT_EQ(find_undetected(masks), (std::vector<int>{3, 7}));
  masks[5] = BinaryMask(2, 2);
  EXPECT_EQ(find_undetected(masks), (std::vector<int>{3, 5, 7}));
}

TEST(FindUndetected, AllMissingIsUnfillable) {
  std::vector<std::optional<BinaryMask>> masks(4);
  try {
    find_undetected(masks);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.code(), "unfillable_sequence");
  }
}

TEST(NearestDetected, Examples) {
  const std::vector<int> d{4, 6, 9};
  EXPECT_EQ(nearest_detected(5, d, 2), (std::vector<int>{4, 6}));
  std::vector<int> many;
  for (int i = 1; i <= 12; ++i) many.push_back(i);
  EXPECT_EQ(nearest_detected(0, many, 10), (std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
  EXPECT_EQ(nearest_detected(5, d, 10), (std::vector<int>{4, 6, 9}));
  EXPECT_EQ(nearest_detected(7, std::vector<int>{9, 5, 8, 6}, 4), (std::vector<int>{6, 8, 5, 9}));
}

// ---- soft mask -------------------------------------------------------------

TEST(BuildSoftMask, IdenticalDonors) {
  BinaryMask m(6, 6);
  m.set(1, 1, true);
  m.set(2, 2, true);
  m.set(2, 1, true);
  const BoundingBox b = bbox_of(m);
  std::vector<Donor> donors(4, Donor{m, b});
  const SoftMask s = build_soft_mask(donors, {0, 0, 2, 2});
  EXPECT_EQ(s.values(), (std::vector<double>{1, 1, 0, 1}));
}

TEST(BuildSoftMask, Averages) {
  // Tight boxes of a full rectangle and of an L-shape whose window is mostly zero.
  const BinaryMask ones = oracle::rect_mask(8, 8, {1, 1, 3, 3});
  BinaryMask corner(8, 8);
  corner.set(0, 0, true);
  corner.set(3, 3, true);
  const std::vector<Donor> donors{{ones, {1, 1, 3, 3}}, {corner, {0, 0, 4, 4}}};
  const SoftMask s = build_soft_mask(donors, {2, 2, 4, 4});
  EXPECT_DOUBLE_EQ(s.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.at(1, 1), 0.5);

  // A donor whose window misses its only set pixel contributes zeros.
  BinaryMask one_px(4, 4);
  one_px.set(3, 3, true);
  const std::vector<Donor> mixed{{BinaryMask(4, 4, true), {0, 0, 2, 2}},
                                 {BinaryMask(4, 4, true), {1, 1, 2, 2}},
                                 {one_px, {0, 0, 2, 2}}};
  const SoftMask thirds = build_soft_mask(mixed, {0, 0, 3, 3});
  for (double v : thirds.values()) EXPECT_DOUBLE_EQ(v, 2.0 / 3.0);
  const std::vector<Donor> half{{BinaryMask(4, 4, true), {0, 0, 2, 2}}, {one_px, {0, 0, 2, 2}}};
  const SoftMask halves = build_soft_mask(half, {1, 1, 2, 3});
  for (double v : halves.values()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(BuildSoftMask, EmptyDonorsSkippedOrFatal) {
  const std::vector<Donor> donors{{BinaryMask(4, 4), {0, 0, 2, 2}},
                                  {BinaryMask(4, 4, true), {0, 0, 4, 4}}};
  const SoftMask full = build_soft_mask(donors, {0, 0, 3, 3});
  for (double v : full.values()) EXPECT_DOUBLE_EQ(v, 1.0);
  const std::vector<Donor> none{{BinaryMask(4, 4), {0, 0, 2, 2}}};
  try {
    build_soft_mask(none, {0, 0, 3, 3});
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.code(), "unfillable_frame");
  }
}

TEST(BuildSoftMask, PermutationInvariant) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.5);
  std::vector<Donor> donors;
  for (int i = 0; i < 5; ++i) {
    BinaryMask m(9, 7);
    for (std::size_t p = 0; p < m.pixel_count(); ++p) m.set(p, coin(rng));
    if (m.empty()) m.set(0, true);
    donors.push_back({m, bbox_of(m)});
  }
  const SoftMask ref = build_soft_mask(donors, {1, 1, 6, 5});
  for (int t = 0; t < 10; ++t) {
    std::shuffle(donors.begin(), donors.end(), rng);
    const SoftMask s = build_soft_mask(donors, {1, 1, 6, 5});
    for (std::size_t i = 0; i < s.pixel_count(); ++i) EXPECT_NEAR(s[i], ref[i], 1e-15);
  }
}

// ---- Gaussian mixtures -----------------------------------------------------

TEST(GaussianMixture, PeakDensityFormula) {
  const GaussianMixture g = single({0.2, 0.4, 0.6}, 0.01);
  const double expect = std::pow(2 * kPi, -1.5) * std::pow(1e-6, -0.5);
  EXPECT_NEAR(gmm_density(g, {0.2, 0.4, 0.6}), expect, 1e-9 * expect);
}

TEST(GaussianMixture, DirectFormulaOffMean) {
  const GaussianMixture g = single({0.5, 0.5, 0.5}, 0.01);
  const double x[] = {0.6, 0.5, 0.5}, mu[] = {0.5, 0.5, 0.5};
  const double cov[] = {0.01, 0, 0, 0, 0.01, 0, 0, 0, 0.01};
  const double expect = oracle::normal3(x, mu, cov);
  EXPECT_NEAR(gmm_density(g, {0.6, 0.5, 0.5}), expect, 1e-12 * expect);
}

TEST(GaussianMixture, FullCovarianceAgainstOracle) {
  GaussianComponent a{0.3, {0.1, 0.2, 0.3}, {0.04, 0.01, 0.0, 0.01, 0.05, 0.02, 0.0, 0.02, 0.03}};
  GaussianComponent b{0.7, {0.7, 0.6, 0.5}, {0.02, -0.005, 0.003, -0.005, 0.01, 0.0, 0.003, 0.0, 0.02}};
  const GaussianMixture g({a, b});
  const GaussianMixture swapped({b, a});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 50; ++t) {
    const double x[] = {u(rng), u(rng), u(rng)};
    const double expect = a.weight * oracle::normal3(x, a.mean.data(), a.cov.data()) +
                          b.weight * oracle::normal3(x, b.mean.data(), b.cov.data());
    const Rgb c{x[0], x[1], x[2]};
    EXPECT_NEAR(gmm_density(g, c), expect, 1e-10 * expect);
    EXPECT_NEAR(gmm_density(swapped, c), gmm_density(g, c), 1e-12 * expect);
  }
  ColorPlanes px = planes({{0.1, 0.1, 0.1}, {0.9, 0.2, 0.4}}, 2, 1);
  std::vector<double> out(2);
  g.log_density(px, out);
  EXPECT_NEAR(out[1], g.log_density(Rgb{0.9, 0.2, 0.4}), 1e-9);
}

TEST(GaussianMixture, RejectsInvalidComponents) {
  GaussianComponent c{1.0, {0, 0, 0}, {1, 0, 0, 0, 1, 0, 0, 0, 1}};
  EXPECT_NO_THROW(GaussianMixture({c}));
  GaussianComponent half = c;
  half.weight = 0.5;
  EXPECT_THROW(GaussianMixture({half}), InvalidInput);
  GaussianComponent bad = c;
  bad.cov = {1, 2, 0, 2, 1, 0, 0, 0, 1};  // indefinite
  EXPECT_THROW(GaussianMixture({bad}), InvalidInput);
  bad.cov = {1, 0.5, 0, 0, 1, 0, 0, 0, 1};  // asymmetric
  EXPECT_THROW(GaussianMixture({bad}), InvalidInput);
  EXPECT_THROW(GaussianMixture({}), InvalidInput);
}

TEST(FitGmm, IdenticalSamples) {
  const std::vector<Rgb> s(50, Rgb{0.3, 0.5, 0.7});
  const GaussianMixture g = fit_gmm(std::span<const Rgb>(s), 1, 1, 1e-4);
  ASSERT_EQ(g.size(), 1);
  const auto& c = g.components()[0];
  EXPECT_NEAR(c.mean[0], 0.3, 1e-12);
  EXPECT_NEAR(c.mean[1], 0.5, 1e-12);
  EXPECT_NEAR(c.mean[2], 0.7, 1e-12);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(c.cov[3 * i + j], i == j ? 1e-4 : 0.0, 1e-15);
  }
}

TEST(FitGmm, SeparatedBlobs) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 0.01);
  std::vector<Rgb> s;
  for (int i = 0; i < 400; ++i) {
    const Rgb c = i % 2 ? Rgb{0.8, 0.2, 0.2} : Rgb{0.1, 0.3, 0.9};
    s.push_back({c.r + n(rng), c.g + n(rng), c.b + n(rng)});
  }
  const GaussianMixture g = fit_gmm(std::span<const Rgb>(s), 2, 7, 1e-4);
  std::vector<std::array<double, 3>> means;
  for (const auto& c : g.components()) means.push_back(c.mean);
  std::sort(means.begin(), means.end());
  EXPECT_NEAR(means[0][0], 0.1, 0.01);
  EXPECT_NEAR(means[0][2], 0.9, 0.01);
  EXPECT_NEAR(means[1][0], 0.8, 0.01);
  EXPECT_NEAR(means[1][1], 0.2, 0.01);
}

TEST(FitGmm, InvariantsAndDeterminism) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    std::vector<Rgb> s(10 + t * 13);
    for (auto& c : s) c = {u(rng), u(rng) * u(rng), 0.5};
    const int K = 1 + t % 5;
    const GaussianMixture g = fit_gmm(std::span<const Rgb>(s), K, 100 + t, 1e-4);
    const GaussianMixture h = fit_gmm(std::span<const Rgb>(s), K, 100 + t, 1e-4);
    double w = 0;
    for (int k = 0; k < g.size(); ++k) {
      w += g.components()[k].weight;
      EXPECT_GT(g.components()[k].weight, 0.0);
      EXPECT_GE(g.min_eigenvalue(k), 1e-4 * (1 - 1e-9));
      EXPECT_EQ(g.components()[k].mean, h.components()[k].mean);
      EXPECT_EQ(g.components()[k].cov, h.components()[k].cov);
    }
    EXPECT_NEAR(w, 1.0, 1e-9);
  }
}

TEST(FitGmm, FewerSamplesThanK) {
  const std::vector<Rgb> s{{0.1, 0.1, 0.1}, {0.9, 0.9, 0.9}};
  EXPECT_EQ(fit_gmm(std::span<const Rgb>(s), 5, 1, 1e-4).size(), 2);
  EXPECT_THROW(fit_gmm(std::span<const Rgb>(), 1, 1, 1e-4), InvalidInput);
}

// ---- energy terms ----------------------------------------------------------

TEST(UnaryPotentials, CertainForegroundHasNoLocationCost) {
  const auto fg = single({0.9, 0.1, 0.1}, 0.01), bg = single({0.1, 0.1, 0.9}, 0.01);
  const ColorPlanes px = planes({{0.8, 0.2, 0.1}}, 1, 1);
  const UnaryField u = unary_potentials(px, SoftMask(1, 1, 1.0), fg, bg, 1e-6);
  EXPECT_NEAR(u.phi_fg[0], -fg.log_density(Rgb{0.8, 0.2, 0.1}), 2e-6);
  EXPECT_NEAR(u.phi_bg[0], -bg.log_density(Rgb{0.8, 0.2, 0.1}) - std::log(1e-6), 1e-9);
}

TEST(UnaryPotentials, HalfMaskLeavesAppearance) {
  const auto fg = single({0.9, 0.1, 0.1}, 0.02), bg = single({0.1, 0.1, 0.9}, 0.05);
  const ColorPlanes px = planes({{0.3, 0.2, 0.6}, {0.7, 0.7, 0.7}}, 2, 1);
  const UnaryField u = unary_potentials(px, SoftMask(2, 1, 0.5), fg, bg, 1e-6);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(u.phi_fg[i] - u.phi_bg[i], bg.log_density(px.at(i)) - fg.log_density(px.at(i)), 1e-9);
  }
}

TEST(UnaryPotentials, HandCase) {
  const auto fg = single({0.6, 0.5, 0.4}, 0.02), bg = single({0.2, 0.3, 0.4}, 0.03);
  const double x[] = {0.5, 0.5, 0.5};
  const double mf[] = {0.6, 0.5, 0.4}, mb[] = {0.2, 0.3, 0.4};
  const double cf[] = {0.02, 0, 0, 0, 0.02, 0, 0, 0, 0.02};
  const double cb[] = {0.03, 0, 0, 0, 0.03, 0, 0, 0, 0.03};
  const UnaryField u = unary_potentials(planes({{0.5, 0.5, 0.5}}, 1, 1), SoftMask(1, 1, 0.25), fg, bg, 1e-6);
  EXPECT_NEAR(u.phi_fg[0], -std::log(oracle::normal3(x, mf, cf)) - std::log(0.25), 1e-9);
  EXPECT_NEAR(u.phi_bg[0], -std::log(oracle::normal3(x, mb, cb)) - std::log(0.75), 1e-9);
}

TEST(UnaryPotentials, AlwaysFinite) {
  const auto fg = single({0, 0, 0}, 1e-4), bg = single({0, 0, 0}, 1e-4);
  const ColorPlanes px = planes({{1, 1, 1}, {0, 0, 0}}, 2, 1);
  const UnaryField u = unary_potentials(px, SoftMask(2, 1, std::vector<double>{0.0, 1.0}), fg, bg, 1e-6);
  for (int i = 0; i < 2; ++i) {
    EXPECT_TRUE(std::isfinite(u.phi_fg[i]));
    EXPECT_TRUE(std::isfinite(u.phi_bg[i]));
  }
  EXPECT_THROW(unary_potentials(px, SoftMask(1, 1), fg, bg, 1e-6), InvalidInput);
}

TEST(EstimateBeta, Examples) {
  EXPECT_EQ(estimate_beta(planes(std::vector<Rgb>(12, Rgb{0.4, 0.4, 0.4}), 4, 3)), 0.0);
  // A single row alternating between two colours 0.1 apart in r and g:
  // every neighbour pair has |d|^2 = 0.02.
  const Rgb a{0.2, 0.3, 0.5}, b{0.3, 0.4, 0.5};
  const ColorPlanes row = planes({a, b, a, b, a}, 5, 1);
  EXPECT_NEAR(estimate_beta(row), 25.0, 1e-9);
  const ColorPlanes shifted = planes({{0.3, 0.4, 0.6}, {0.4, 0.5, 0.6}, {0.3, 0.4, 0.6}, {0.4, 0.5, 0.6}, {0.3, 0.4, 0.6}}, 5, 1);
  EXPECT_NEAR(estimate_beta(shifted), estimate_beta(row), 1e-9);
}

TEST(PairwiseWeight, Examples) {
  const Rgb c{0.3, 0.3, 0.3};
  EXPECT_DOUBLE_EQ(pairwise_weight(c, c, 1.0, 7.0, 50.0), 50.0);
  EXPECT_DOUBLE_EQ(pairwise_weight(c, c, std::sqrt(2.0), 7.0, 50.0), 50.0 / std::sqrt(2.0));
  // |d|^2 = 0.04 and beta = 25 -> exponent -1.
  EXPECT_NEAR(pairwise_weight(c, {0.5, 0.3, 0.3}, 1.0, 25.0, 50.0), 50.0 / std::exp(1.0), 1e-12);
  EXPECT_EQ(pairwise_weight(c, {1, 0, 0}, 1.0, 100.0, 0.0), 0.0);
  EXPECT_GT(pairwise_weight(c, {1, 0, 1}, 1.0, 100.0, 1.0), 0.0);
  EXPECT_THROW(pairwise_weight(c, c, 0.0, 1.0, 1.0), InvalidInput);
}

TEST(ContrastPairwise, EightNeighbourhood) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto [w, h] : {std::pair{1, 1}, {3, 1}, {1, 4}, {3, 4}, {5, 5}}) {
    std::vector<Rgb> px(w * h);
    for (auto& c : px) c = {u(rng), u(rng), u(rng)};
    const ColorPlanes p = planes(px, w, h);
    const double beta = w * h >= 2 ? estimate_beta(p) : 0.0;
    const PairwiseTerms t = contrast_pairwise(p, beta, 50.0);
    EXPECT_EQ(t.edges.size(), static_cast<std::size_t>(h * (w - 1) + w * (h - 1) + 2 * (w - 1) * (h - 1)));
    std::set<std::pair<int, int>> seen;
    for (const auto& e : t.edges) {
      const int ax = e.a % w, ay = e.a / w, bx = e.b % w, by = e.b / w;
      const int dx = std::abs(ax - bx), dy = std::abs(ay - by);
      ASSERT_TRUE(dx <= 1 && dy <= 1 && dx + dy > 0);
      EXPECT_TRUE(seen.insert({std::min(e.a, e.b), std::max(e.a, e.b)}).second);
      EXPECT_NEAR(e.weight, pairwise_weight(px[e.a], px[e.b], std::hypot(dx, dy), beta, 50.0), 1e-12);
    }
  }
}

// ---- min cut ---------------------------------------------------------------

TEST(MinCut, TwoPixelExample) {
  CapacityGraph g;
  g.width = 2;
  g.height = 1;
  g.source_cap = {10, 0};
  g.sink_cap = {0, 10};
  g.arcs = {{0, 1, 1.0, 1.0}};
  const MinCutResult r = min_cut(g);
  EXPECT_TRUE(r.labels[0]);
  EXPECT_FALSE(r.labels[1]);
  EXPECT_DOUBLE_EQ(r.cut_value, 1.0);
  // All four labellings: (bg,bg)=10 (fg,bg)=1 (bg,fg)=21 (fg,fg)=10.
  const double costs[] = {10, 1, 21, 10};
  for (std::uint32_t l = 0; l < 4; ++l) {
    BinaryMask m(2, 1);
    m.set(0, (l & 1) != 0);
    m.set(1, (l & 2) != 0);
    EXPECT_DOUBLE_EQ(cut_cost(g, m), costs[l]);
  }
}

TEST(MinCut, DominantUnariesGiveAllForeground) {
  std::mt19937_64 rng(1);
  oracle::Energy e = oracle::random_grid_energy(4, 3, rng, false);
  double budget = 0;
  for (const auto& p : e.pairs) budget += p.w;
  for (std::size_t i = 0; i < e.cost_bg.size(); ++i) {
    e.cost_fg[i] = 0;
    e.cost_bg[i] = budget + 1;
  }
  const MinCutResult r = min_cut(build_capacity_graph(oracle::to_unary(e), oracle::to_pairwise(e)));
  EXPECT_EQ(r.labels, BinaryMask(4, 3, true));
}

TEST(MinCut, MatchesBruteForceOnRandomGrids) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 60; ++t) {
    const int w = 1 + t % 3, h = 1 + (t / 3) % 4;
    const bool integer = t % 2 == 0;
    const oracle::Energy e = oracle::random_grid_energy(w, h, rng, integer);
    const UnaryField u = oracle::to_unary(e);
    const PairwiseTerms p = oracle::to_pairwise(e);
    const CapacityGraph g = build_capacity_graph(u, p);
    const MinCutResult r = min_cut(g);
    const oracle::BruteForce bf = oracle::brute_force(e);
    const double tol = integer ? 0.0 : 1e-9;
    EXPECT_NEAR(r.cut_value + g.offset, bf.energy, tol) << t;
    EXPECT_NEAR(e.eval(oracle::pack(r.labels)), bf.energy, tol) << t;
    EXPECT_NEAR(labeling_energy(u, p, r.labels), bf.energy, 1e-9) << t;
    EXPECT_NEAR(cut_cost(g, r.labels), r.cut_value, 1e-9) << t;
  }
}

TEST(MinCut, AsymmetricArcsMatchBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 5);
  for (int t = 0; t < 40; ++t) {
    CapacityGraph g;
    g.width = 3;
    g.height = 3;
    for (int i = 0; i < 9; ++i) {
      g.source_cap.push_back(u(rng));
      g.sink_cap.push_back(u(rng));
    }
    for (int i = 0; i < 12; ++i) {
      const int a = static_cast<int>(u(rng) * 9 / 5), b = (a + 1 + static_cast<int>(u(rng) * 8 / 5)) % 9;
      g.arcs.push_back({a, b, u(rng), u(rng) * (t % 2)});
    }
    double best = 1e300;
    for (std::uint32_t l = 0; l < 512; ++l) {
      BinaryMask m(3, 3);
      for (int i = 0; i < 9; ++i) m.set(i, ((l >> i) & 1) != 0);
      double c = 0;
      for (int i = 0; i < 9; ++i) c += m[i] ? g.sink_cap[i] : g.source_cap[i];
      for (const auto& a : g.arcs) {
        if (m[a.from] && !m[a.to]) c += a.cap;
        if (!m[a.from] && m[a.to]) c += a.rev_cap;
      }
      best = std::min(best, c);
    }
    const MinCutResult r = min_cut(g);
    EXPECT_NEAR(r.cut_value, best, 1e-9) << t;
    EXPECT_NEAR(cut_cost(g, r.labels), best, 1e-9) << t;
  }
}

TEST(MinCut, ValidatesGraph) {
  CapacityGraph g;
  g.width = 2;
  g.height = 1;
  g.source_cap = {1, -1};
  g.sink_cap = {0, 0};
  EXPECT_THROW(min_cut(g), InvalidInput);
  g.source_cap = {1, 1};
  g.arcs = {{0, 2, 1, 1}};
  EXPECT_THROW(min_cut(g), InvalidInput);
  g.arcs = {{0, 1, std::numeric_limits<double>::infinity(), 1}};
  EXPECT_THROW(min_cut(g), InvalidInput);
}

// ---- GrabCut ---------------------------------------------------------------

TEST(GrabCutParams, Validation) {
  EXPECT_NO_THROW(GrabCutParams{}.validate());
  GrabCutParams p;
  p.K = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.gamma = -1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.p = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.prob_clamp = 0.5;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(GrabCut, ExactRectangleRecovered) {
  const BoundingBox rect{12, 10, 9, 7}, box{8, 6, 17, 15};
  const Frame f = oracle::two_tone(40, 30, rect, {0.85, 0.2, 0.15}, {0.15, 0.35, 0.8});
  const BinaryMask truth = oracle::rect_mask(40, 30, rect);
  const BinaryMask window = crop(truth, box);
  std::vector<double> m(window.pixel_count());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = window[i] ? 1.0 : 0.0;
  const GrabCutResult r = grabcut_fill(f, box, SoftMask(box.w, box.h, m), {}, 3);
  EXPECT_EQ(r.mask, truth);
  EXPECT_FALSE(r.fell_back);
}

TEST(GrabCut, TinyBoxLabelingIsGlobalMinimum) {
  const BoundingBox rect{5, 5, 2, 2}, box{4, 4, 4, 3};
  const Frame f = oracle::two_tone(16, 16, rect, {0.9, 0.9, 0.1}, {0.1, 0.2, 0.6});
  const GrabCutResult r = grabcut_fill(f, box, SoftMask(4, 3, 0.5), {}, 11);
  // Cutting the strong smoothness edges around the object costs more than the
  // small likelihood gain, so the whole box may stay foreground; the object must.
  for (int y = rect.y; y < rect.bottom(); ++y) {
    for (int x = rect.x; x < rect.right(); ++x) EXPECT_TRUE(r.mask.at(x, y));
  }
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      if (!box.contains(x, y)) EXPECT_FALSE(r.mask.at(x, y));
    }
  }

  // Final labels are the global minimum under the final models.
  const ColorPlanes region = extract_region(f, box);
  const UnaryField u = unary_potentials(region, SoftMask(4, 3, 0.5), r.fg_model, r.bg_model, 1e-6);
  const PairwiseTerms p = contrast_pairwise(region, r.beta, 50.0);
  oracle::Energy e{4, 3, u.phi_bg, u.phi_fg, {}};
  for (const auto& edge : p.edges) e.pairs.push_back({edge.a, edge.b, edge.weight});
  EXPECT_NEAR(labeling_energy(u, p, r.final_labels), oracle::brute_force(e).energy, 1e-9);
}

TEST(GrabCut, EnergyDoesNotIncrease) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> pos(4, 20);
  std::uniform_real_distribution<double> u01(0, 1);
  for (int t = 0; t < 8; ++t) {
    const BoundingBox rect{pos(rng), pos(rng), 6, 5};
    const Frame f = oracle::two_tone(32, 32, rect, {u01(rng), 0.2, 0.3}, {0.3, u01(rng), 0.6});
    const BoundingBox box{rect.x - 3, rect.y - 3, 12, 11};
    std::vector<double> m(box.w * box.h);
    for (double& v : m) v = u01(rng);
    const SoftMask M(box.w, box.h, m);
    const GrabCutResult r = grabcut_fill(f, box, M, {}, t);
    const ColorPlanes region = extract_region(f, box);
    const UnaryField un = unary_potentials(region, M, r.fg_model, r.bg_model, 1e-6);
    const PairwiseTerms p = contrast_pairwise(region, r.beta, 50.0);
    EXPECT_LE(labeling_energy(un, p, r.final_labels), labeling_energy(un, p, r.initial) + 1e-9) << t;
  }
}

TEST(GrabCut, EmptyInitialForegroundIsUnfillable) {
  const Frame f(10, 10);
  try {
    grabcut_fill(f, {2, 2, 4, 4}, SoftMask(4, 4, 0.49), {}, 1);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.code(), "unfillable_frame");
  }
  EXPECT_THROW(grabcut_fill(f, {2, 2, 4, 4}, SoftMask(3, 4, 0.9), {}, 1), InvalidInput);
  EXPECT_THROW(grabcut_fill(f, {8, 2, 4, 4}, SoftMask(4, 4, 0.9), {}, 1), InvalidInput);
}

TEST(GrabCut, EmptyCutFallsBackToSoftMask) {
  Frame f(12, 12);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 12; ++x) f.set(x, y, {0.5, 0.5, 0.5});
  }
  SoftMask M(5, 5, 0.0);
  M.set(2, 2, 0.5);
  const GrabCutResult r = grabcut_fill(f, {3, 3, 5, 5}, M, {}, 1);
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(r.mask.area(), 1u);
  EXPECT_TRUE(r.mask.at(5, 5));
}

TEST(GrabCut, DeterministicForSeed) {
  const ingest::SynthCase c = ingest::generate_synthetic_case({}, 5);
  const int frame = c.dropped_frames.front();
  const BoundingBox box = c.object_boxes[frame];
  const BoundingBox wide{std::max(0, box.x - 2), std::max(0, box.y - 2), std::min(96 - std::max(0, box.x - 2), box.w + 4),
                         std::min(96 - std::max(0, box.y - 2), box.h + 4)};
  SoftMask M(wide.w, wide.h, 0.3);
  for (int y = 2; y < wide.h - 2; ++y) {
    for (int x = 2; x < wide.w - 2; ++x) M.set(x, y, 0.8);
  }
  const GrabCutResult a = grabcut_fill(c.sequence.frames[frame], wide, M, {}, 9);
  const GrabCutResult b = grabcut_fill(c.sequence.frames[frame], wide, M, {}, 9);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.rounds, b.rounds);
}

// ---- track and fill --------------------------------------------------------

TEST(FillUndetected, SyntheticDroppedFramesReachIoU) {
  const ingest::SynthCase c = ingest::generate_synthetic_case({}, 17);
  std::vector<std::optional<BinaryMask>> masks(c.ground_truth.begin(), c.ground_truth.end());
  for (int d : c.dropped_frames) masks[d].reset();
  const track::NccTracker tracker;
  const auto out = fill_undetected(c.sequence, masks, tracker, {}, 17);
  ASSERT_EQ(out.size(), c.dropped_frames.size());
  std::set<int> filled;
  for (const auto& o : out) {
    filled.insert(o.frame);
    EXPECT_GE(metrics::jaccard(o.mask, c.ground_truth[o.frame]), 0.8) << "frame " << o.frame;
    for (int d : o.donors) EXPECT_TRUE(masks[d].has_value());
    EXPECT_LE(o.donors.size(), 10u);
  }
  EXPECT_EQ(filled, std::set<int>(c.dropped_frames.begin(), c.dropped_frames.end()));
  for (std::size_t i = 1; i < out.size(); ++i) {
    EXPECT_LE(std::abs(out[i - 1].frame - out[i - 1].source_frame), std::abs(out[i].frame - out[i].source_frame));
  }
}

TEST(FillUndetected, IndependentOfJobs) {
  ingest::SynthConfig cfg;
  cfg.frames = 12;
  cfg.dropped = std::vector<int>{0, 5, 6, 11};
  const ingest::SynthCase c = ingest::generate_synthetic_case(cfg, 2);
  std::vector<std::optional<BinaryMask>> masks(c.ground_truth.begin(), c.ground_truth.end());
  for (int d : c.dropped_frames) masks[d].reset();
  const track::NccTracker tracker;
  const auto a = fill_undetected(c.sequence, masks, tracker, {}, 4, 1);
  const auto b = fill_undetected(c.sequence, masks, tracker, {}, 4, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].frame, b[i].frame);
    EXPECT_EQ(a[i].mask, b[i].mask);
    EXPECT_EQ(a[i].window, b[i].window);
  }
}

TEST(FillUndetected, SingleDonorSequence) {
  std::vector<std::optional<BinaryMask>> masks(3);
  masks[1] = present(20, 20, {5, 5, 6, 6});
  VideoSequence seq{"s", {}};
  for (int i = 0; i < 3; ++i) {
    seq.frames.push_back(oracle::two_tone(20, 20, {5, 5, 6, 6}, {0.9, 0.1, 0.1}, {0.1, 0.1, 0.9}));
  }
  const auto out = fill_undetected(seq, masks, track::NccTracker{}, {}, 0);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].frame, 0);
  EXPECT_EQ(out[1].frame, 2);
  for (const auto& o : out) EXPECT_EQ(o.mask, *masks[1]);
}
