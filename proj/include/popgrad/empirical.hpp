#pragma once

#include <cstdint>
#include <vector>

#include "popgrad/geometry.hpp"

namespace popgrad {

// Finite-sample counterparts of the analytic module, used as sampling oracles.
// Everything is per-sample normalized (1/n), matching the analytic convention.

struct GatingMask {
    std::vector<std::uint8_t> bits;  // bits[l] = (x_l^T w > 0), strict
};

GatingMask gating(const SampleBatch& X, const Vec& w);

// (1/n) sum over samples with x^T e > 0 and x^T w > 0 of x (x^T w).
Vec empirical_pg(const SampleBatch& X, const Vec& e, const Vec& w);

// Same estimator without materializing the batch; generates rows on the fly.
// Needed for large n * d where storing X is wasteful.
Vec empirical_pg_streamed(int n, int d, Distribution dist, RngSeed rng, const Vec& e, const Vec& w);

// Finite-sample gradient of (1/n) * (1/2) |g(X;W*,a*) - g(X;W,a)|^2 at
// differentiable points.
std::vector<Vec> empirical_grad(const SampleBatch& X, const WeightSet& W, const WeightSet& W_star,
                                const std::vector<double>& a, const std::vector<double>& a_star);

// (1/n) * (1/2) |g(X;W*,a*) - g(X;W,a)|^2; the quantity empirical_grad differentiates.
double empirical_loss(const SampleBatch& X, const WeightSet& W, const WeightSet& W_star,
                      const std::vector<double>& a, const std::vector<double>& a_star);

// |analytic - empirical| / |empirical|.
double relative_rms_error(const Vec& analytic, const Vec& empirical);

struct AngleErrorRow {
    double theta = 0.0;  // bin center
    double mean_err = 0.0;
    double max_err = 0.0;
};

// For each theta bin center in (0, pi), build (e, w) pairs at exactly that
// angle (w random Gaussian, e = cos(t) w_hat + sin(t) w_perp) and report the
// relative RMS error of the analytic formula against a fresh batch per pair.
std::vector<AngleErrorRow> error_vs_angle_profile(int d, int n, int bins, int pairs_per_bin,
                                                  RngSeed rng);

// Unit-norm pair (w_hat, w_perp) with w_perp orthogonal to w_hat, both d-dim.
std::pair<Vec, Vec> random_orthonormal_pair(int d, CounterRng& gen);

}  // namespace popgrad
