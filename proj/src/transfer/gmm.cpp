#include "ffvos/transfer/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "ffvos/core/error.hpp"
#include "ffvos/simd/kernels.hpp"

namespace ffvos::transfer {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Cholesky of a 3x3 SPD matrix; returns false if not positive definite.
bool cholesky3(const std::array<double, 9>& a, std::array<double, 9>& l) {
  l.fill(0.0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * 3 + j];
      for (int k = 0; k < j; ++k) s -= l[i * 3 + k] * l[j * 3 + k];
      if (i == j) {
        if (!(s > 0.0)) return false;
        l[i * 3 + i] = std::sqrt(s);
      } else {
        l[i * 3 + j] = s / l[j * 3 + j];
      }
    }
  }
  return true;
}

double logsumexp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InvalidInput("GaussianMixture: no components");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0)) throw InvalidInput("GaussianMixture: component weight must be > 0");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("GaussianMixture: weights must sum to 1");

  cache_.resize(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    const auto& s = c.cov;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (s[i * 3 + j] != s[j * 3 + i]) throw InvalidInput("GaussianMixture: covariance not symmetric");
      }
    }
    std::array<double, 9> l{};
    if (!cholesky3(s, l)) throw InvalidInput("GaussianMixture: covariance not positive definite");
    const double log_det = 2.0 * (std::log(l[0]) + std::log(l[4]) + std::log(l[8]));
    const double det = s[0] * (s[4] * s[8] - s[5] * s[7]) - s[1] * (s[3] * s[8] - s[5] * s[6]) +
                       s[2] * (s[3] * s[7] - s[4] * s[6]);
    Cache& cc = cache_[k];
    cc.inv[0] = (s[4] * s[8] - s[5] * s[7]) / det;
    cc.inv[1] = (s[2] * s[7] - s[1] * s[8]) / det;
    cc.inv[2] = (s[1] * s[5] - s[2] * s[4]) / det;
    cc.inv[3] = (s[0] * s[8] - s[2] * s[6]) / det;
    cc.inv[4] = (s[2] * s[3] - s[0] * s[5]) / det;
    cc.inv[5] = (s[0] * s[4] - s[1] * s[3]) / det;
    cc.log_norm = std::log(c.weight) - 0.5 * log_det - 1.5 * kLog2Pi;
  }
}

double GaussianMixture::log_density(const Rgb& x) const {
  ColorPlanes p;
  p.width = 1;
  p.height = 1;
  p.r = {x.r};
  p.g = {x.g};
  p.b = {x.b};
  double out = 0.0;
  log_density(p, std::span<double>(&out, 1));
  return out;
}

void GaussianMixture::log_density(const ColorPlanes& px, std::span<double> out) const {
  const std::size_t n = px.size();
  if (out.size() != n) throw InvalidInput("log_density: output size mismatch");
  const auto& k = simd::kernels();
  const std::size_t K = components_.size();
  std::vector<double> q(K * n);
  for (std::size_t c = 0; c < K; ++c) {
    k.quadratic_form3(px.r.data(), px.g.data(), px.b.data(), n, components_[c].mean.data(),
                      cache_[c].inv, q.data() + c * n);
  }
  std::vector<double> terms(K);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < K; ++c) terms[c] = cache_[c].log_norm - 0.5 * q[c * n + i];
    out[i] = logsumexp(terms);
  }
}

double GaussianMixture::min_eigenvalue(int k) const {
  // Symmetric 3x3 eigenvalues (trigonometric method).
  const auto& a = components_.at(k).cov;
  const double p1 = a[1] * a[1] + a[2] * a[2] + a[5] * a[5];
  const double q = (a[0] + a[4] + a[8]) / 3.0;
  if (p1 == 0.0) return std::min({a[0], a[4], a[8]});
  const double p2 = (a[0] - q) * (a[0] - q) + (a[4] - q) * (a[4] - q) + (a[8] - q) * (a[8] - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  std::array<double, 9> b{};
  for (int i = 0; i < 9; ++i) b[i] = (a[i] - (i % 4 == 0 ? q : 0.0)) / p;
  const double det_b = b[0] * (b[4] * b[8] - b[5] * b[7]) - b[1] * (b[3] * b[8] - b[5] * b[6]) +
                       b[2] * (b[3] * b[7] - b[4] * b[6]);
  const double r = std::clamp(det_b / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double pi = 3.14159265358979323846;
  return q + 2.0 * p * std::cos(phi + 2.0 * pi / 3.0);
}

double gmm_density(const GaussianMixture& g, const Rgb& x) { return std::exp(g.log_density(x)); }

GaussianMixture fit_gmm(std::span<const Rgb> samples, int K, std::uint64_t seed, double reg,
                        const GmmFitOptions& options) {
  ColorPlanes p;
  p.width = static_cast<int>(samples.size());
  p.height = 1;
  for (const auto& s : samples) {
    p.r.push_back(s.r);
    p.g.push_back(s.g);
    p.b.push_back(s.b);
  }
  return fit_gmm(p, K, seed, reg, options);
}

GaussianMixture fit_gmm(const ColorPlanes& samples, int K, std::uint64_t seed, double reg,
                        const GmmFitOptions& options) {
  const std::size_t n = samples.size();
  if (n == 0) throw InvalidInput("fit_gmm: no samples");
  if (K < 1) throw InvalidInput("fit_gmm: K must be >= 1");
  if (!(reg > 0.0)) throw InvalidInput("fit_gmm: regularization must be > 0");
  if (static_cast<std::size_t>(K) > n) {
    spdlog::warn("fit_gmm: {} samples for {} components; reducing K to {}", n, K, n);
    K = static_cast<int>(n);
  }

  std::mt19937_64 rng(seed);
  auto sq = [&](std::size_t i, const std::array<double, 3>& c) {
    const double dr = samples.r[i] - c[0], dg = samples.g[i] - c[1], db = samples.b[i] - c[2];
    return dr * dr + dg * dg + db * db;
  };

  // k-means++ seeding.
  std::vector<std::array<double, 3>> centers;
  centers.reserve(K);
  {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t first = pick(rng);
    centers.push_back({samples.r[first], samples.g[first], samples.b[first]});
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq(i, centers[0]);
    while (static_cast<int>(centers.size()) < K) {
      const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
      std::size_t chosen = 0;
      if (total > 0.0) {
        const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
        double acc = 0.0;
        chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          acc += d2[i];
          if (u < acc) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = pick(rng);
      }
      centers.push_back({samples.r[chosen], samples.g[chosen], samples.b[chosen]});
      for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq(i, centers.back()));
    }
  }

  // Responsibilities; start from the hard nearest-center assignment.
  std::vector<double> resp(static_cast<std::size_t>(K) * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double best_d = sq(i, centers[0]);
    for (int c = 1; c < K; ++c) {
      const double d = sq(i, centers[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    resp[best * n + i] = 1.0;
  }

  auto m_step = [&]() {
    std::vector<GaussianComponent> comps(K);
    for (int c = 0; c < K; ++c) {
      const double* rc = resp.data() + static_cast<std::size_t>(c) * n;
      double nk = 0.0, mr = 0.0, mg = 0.0, mb = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nk += rc[i];
        mr += rc[i] * samples.r[i];
        mg += rc[i] * samples.g[i];
        mb += rc[i] * samples.b[i];
      }
      GaussianComponent& g = comps[c];
      if (nk < 1e-10) {
        // Starved component: keep its seed center with an isotropic covariance.
        g.weight = 1e-10;
        g.mean = centers[c];
        g.cov = {reg, 0, 0, 0, reg, 0, 0, 0, reg};
        continue;
      }
      g.weight = nk / static_cast<double>(n);
      g.mean = {mr / nk, mg / nk, mb / nk};
      double sxx = 0, sxy = 0, sxz = 0, syy = 0, syz = 0, szz = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dr = samples.r[i] - g.mean[0];
        const double dg = samples.g[i] - g.mean[1];
        const double db = samples.b[i] - g.mean[2];
        sxx += rc[i] * dr * dr;
        sxy += rc[i] * dr * dg;
        sxz += rc[i] * dr * db;
        syy += rc[i] * dg * dg;
        syz += rc[i] * dg * db;
        szz += rc[i] * db * db;
      }
      g.cov = {sxx / nk + reg, sxy / nk,       sxz / nk,       //
               sxy / nk,       syy / nk + reg, syz / nk,       //
               sxz / nk,       syz / nk,       szz / nk + reg};
    }
    double total = 0.0;
    for (const auto& g : comps) total += g.weight;
    for (auto& g : comps) g.weight /= total;
    return GaussianMixture(std::move(comps));
  };

  GaussianMixture model = m_step();
  double prev_ll = -std::numeric_limits<double>::infinity();
  std::vector<double> lp(static_cast<std::size_t>(K) * n);
  std::vector<double> terms(K);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    // E-step.
    for (int c = 0; c < K; ++c) {
      const auto& comp = model.components()[c];
      GaussianMixture single({GaussianComponent{1.0, comp.mean, comp.cov}});
      single.log_density(samples, std::span<double>(lp.data() + static_cast<std::size_t>(c) * n, n));
    }
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < K; ++c) {
        terms[c] = std::log(model.components()[c].weight) + lp[static_cast<std::size_t>(c) * n + i];
      }
      const double lse = logsumexp(terms);
      ll += lse;
      for (int c = 0; c < K; ++c) resp[static_cast<std::size_t>(c) * n + i] = std::exp(terms[c] - lse);
    }
    ll /= static_cast<double>(n);
    model = m_step();
    if (ll - prev_ll < options.tol) break;
    prev_ll = ll;
  }
  return model;
}

}  // namespace ffvos::transfer
