#pragma once

// Full-covariance Gaussian mixtures over RGB.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ffvos/core/raster.hpp"

namespace ffvos::transfer {

struct GaussianComponent {
  double weight = 1.0;
  std::array<double, 3> mean{};
  /// Row-major 3x3, symmetric positive definite.
  std::array<double, 9> cov{};
};

class GaussianMixture {
 public:
  /// Validates the invariants (positive weights summing to 1 within 1e-9,
  /// SPD covariances) and caches inverses. Throws InvalidInput.
  explicit GaussianMixture(std::vector<GaussianComponent> components);

  const std::vector<GaussianComponent>& components() const noexcept { return components_; }
  int size() const noexcept { return static_cast<int>(components_.size()); }

  double log_density(const Rgb& x) const;
  /// out[i] = log p(x_i) for every pixel of `px`.
  void log_density(const ColorPlanes& px, std::span<double> out) const;

  /// Smallest eigenvalue of component k's covariance.
  double min_eigenvalue(int k) const;

 private:
  struct Cache {
    double inv[6];     // symmetric inverse (xx, xy, xz, yy, yz, zz)
    double log_norm;   // log w - 0.5 log det - 1.5 log 2pi
  };
  std::vector<GaussianComponent> components_;
  std::vector<Cache> cache_;
};

struct GmmFitOptions {
  int max_iter = 100;
  /// Stop once the mean per-sample log-likelihood improves by less than this.
  double tol = 1e-4;
};

/// Seeded k-means++ initialisation followed by EM. Every covariance gets
/// reg * I added. If there are fewer samples than K, K is reduced to the
/// sample count and a warning is logged. Throws InvalidInput on no samples.
GaussianMixture fit_gmm(const ColorPlanes& samples, int K, std::uint64_t seed, double reg,
                        const GmmFitOptions& options = {});
GaussianMixture fit_gmm(std::span<const Rgb> samples, int K, std::uint64_t seed, double reg,
                        const GmmFitOptions& options = {});

/// Mixture density sum_k w_k N(x; mu_k, Sigma_k).
double gmm_density(const GaussianMixture& g, const Rgb& x);

}  // namespace ffvos::transfer
