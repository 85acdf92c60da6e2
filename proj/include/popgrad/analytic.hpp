#pragma once

#include <functional>
#include <vector>

#include "popgrad/geometry.hpp"

namespace popgrad {

// Closed-form expectation of the gating-pair map F(e, w) = X^T D(e) D(w) X w
// under spherical Gaussian input, per-sample convention (sample count divided
// out). Decomposes into a mass term along w and an asymmetric term along e:
//   E[F] = ((pi - theta)/2pi) w + (|w| sin(theta)/2pi) e
struct PGResult {
    Vec vector;
    double mass_coeff = 0.0;  // (pi - theta) / 2pi
    double asym_coeff = 0.0;  // |w| sin(theta) / 2pi
};

PGResult pg_function(const Vec& e, const Vec& w);

// Population gradient of the one-node teacher-student l2 loss:
//   (1/2)(w - w*) + (1/2pi)(theta w* - (|w*|/|w|) sin(theta) w)
Vec single_relu_grad(const Vec& w, const Vec& w_star);

// Per-node population gradient for K nodes with unit top weights.
std::vector<Vec> multi_relu_grad(const WeightSet& W, const WeightSet& W_star);

// Same with fixed top weights a (student) and a_star (teacher). Since the
// network output is linear in the ReLU node outputs, the l2-loss gradient is
// the bilinear combination
//   grad_j = a_j [ sum_j' a_j' E[F(e_j, w_j')] - sum_j' a*_j' E[F(e_j, w*_j')] ].
// With all-ones top weights this reduces to multi_relu_grad.
std::vector<Vec> weighted_multi_relu_grad(const WeightSet& W, const WeightSet& W_star,
                                          const std::vector<double>& a,
                                          const std::vector<double>& a_star);

// Pluggable angular kernel for other isotropic input laws:
//   E[F(e, w)] = A(theta) w + |w| B(theta) e
// Valid kernels satisfy A(0) = 1/2, A(pi) = 0, B(0) = B(pi) = 0.
struct IsotropicKernel {
    std::function<double(double)> A;
    std::function<double(double)> B;

    static IsotropicKernel gaussian();
};

Vec isotropic_pg(const IsotropicKernel& kernel, const Vec& e, const Vec& w);

}  // namespace popgrad
