#include "popgrad/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace popgrad {

PGResult pg_function(const Vec& e, const Vec& w) {
    if (e.size() != w.size()) throw std::domain_error("pg_function: dimension mismatch");
    const double wn = norm(w);
    if (wn < kNormFloor) throw std::domain_error("pg_function: |w| below floor");
    const double theta = angle(e, w);
    PGResult r;
    r.mass_coeff = (M_PI - theta) / (2.0 * M_PI);
    r.asym_coeff = wn * std::sin(theta) / (2.0 * M_PI);
    r.vector = scaled(w, r.mass_coeff);
    axpy(r.asym_coeff, e, r.vector);
    return r;
}

Vec single_relu_grad(const Vec& w, const Vec& w_star) {
    const double wn = norm(w);
    const double wsn = norm(w_star);
    if (wn < kNormFloor || wsn < kNormFloor) throw std::domain_error("single_relu_grad: norm below floor");
    const double theta = angle(w, w_star);
    Vec g = sub(w, w_star);
    for (double& x : g) x *= 0.5;
    axpy(theta / (2.0 * M_PI), w_star, g);
    axpy(-(wsn / wn) * std::sin(theta) / (2.0 * M_PI), w, g);
    return g;
}

std::vector<Vec> multi_relu_grad(const WeightSet& W, const WeightSet& W_star) {
    return weighted_multi_relu_grad(W, W_star, std::vector<double>(W.K(), 1.0),
                                    std::vector<double>(W_star.K(), 1.0));
}

std::vector<Vec> weighted_multi_relu_grad(const WeightSet& W, const WeightSet& W_star,
                                          const std::vector<double>& a,
                                          const std::vector<double>& a_star) {
    const int K = W.K();
    if (W_star.K() != K) throw std::domain_error("weighted_multi_relu_grad: K mismatch");
    if (W.dim() != W_star.dim()) throw std::domain_error("weighted_multi_relu_grad: d mismatch");
    if (static_cast<int>(a.size()) != K || static_cast<int>(a_star.size()) != K) {
        throw std::domain_error("weighted_multi_relu_grad: top-weight length mismatch");
    }
    std::vector<Vec> grads;
    grads.reserve(K);
    for (int j = 0; j < K; ++j) {
        const Vec ej = W.unit(j);
        Vec g(W.dim(), 0.0);
        for (int jp = 0; jp < K; ++jp) {
            axpy(a[jp], pg_function(ej, W.vectors[jp]).vector, g);
            axpy(-a_star[jp], pg_function(ej, W_star.vectors[jp]).vector, g);
        }
        for (double& x : g) x *= a[j];
        grads.push_back(std::move(g));
    }
    return grads;
}

IsotropicKernel IsotropicKernel::gaussian() {
    IsotropicKernel k;
    k.A = [](double theta) { return (M_PI - theta) / (2.0 * M_PI); };
    k.B = [](double theta) { return std::sin(theta) / (2.0 * M_PI); };
    return k;
}

Vec isotropic_pg(const IsotropicKernel& kernel, const Vec& e, const Vec& w) {
    const double theta = angle(e, w);
    Vec out = scaled(w, kernel.A(theta));
    axpy(norm(w) * kernel.B(theta), e, out);
    return out;
}

}  // namespace popgrad
