#include "popgrad/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace popgrad {

double dot(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

Vec scaled(const Vec& v, double c) {
    Vec out(v);
    for (double& x : out) x *= c;
    return out;
}

Vec add(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw std::invalid_argument("add: dimension mismatch");
    Vec out(u);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
    return out;
}

Vec sub(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw std::invalid_argument("sub: dimension mismatch");
    Vec out(u);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] -= v[i];
    return out;
}

void axpy(double a, const Vec& x, Vec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

Vec normalized(const Vec& v) {
    const double n = norm(v);
    if (n < kNormFloor) throw std::domain_error("normalized: zero-norm vector");
    return scaled(v, 1.0 / n);
}

double angle(const Vec& u, const Vec& v) {
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu < kNormFloor || nv < kNormFloor) throw std::domain_error("angle: zero-norm input");
    const double c = std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
    return std::acos(c);
}

WeightSet::WeightSet(std::vector<Vec> vecs) : vectors(std::move(vecs)) {
    if (vectors.empty()) throw std::invalid_argument("WeightSet: empty");
    const std::size_t d = vectors.front().size();
    norms.reserve(vectors.size());
    for (const Vec& w : vectors) {
        if (w.size() != d) throw std::invalid_argument("WeightSet: inconsistent dimensions");
        for (double x : w) {
            if (!std::isfinite(x)) throw std::invalid_argument("WeightSet: non-finite entry");
        }
        const double n = norm(w);
        if (n < kNormFloor) throw std::domain_error("WeightSet: weight norm below floor");
        norms.push_back(n);
    }
}

Vec WeightSet::unit(int j) const { return scaled(vectors.at(j), 1.0 / norms.at(j)); }

AngleMatrix pair_angles(const WeightSet& W) {
    const int K = W.K();
    AngleMatrix theta(K, std::vector<double>(K, 0.0));
    for (int i = 0; i < K; ++i) {
        for (int j = i + 1; j < K; ++j) {
            theta[i][j] = theta[j][i] = angle(W.vectors[i], W.vectors[j]);
        }
    }
    return theta;
}

AngleMatrix cross_angles(const WeightSet& W, const WeightSet& W_star) {
    if (W.K() != W_star.K()) throw std::invalid_argument("cross_angles: K mismatch");
    const int K = W.K();
    AngleMatrix theta(K, std::vector<double>(K, 0.0));
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) {
            theta[i][j] = angle(W.vectors[j], W_star.vectors[i]);
        }
    }
    return theta;
}

SampleBatch gaussian_batch(int n, int d, RngSeed rng) {
    if (n < 1 || d < 1) throw std::invalid_argument("gaussian_batch: n and d must be positive");
    SampleBatch b;
    b.n = n;
    b.d = d;
    b.distribution = Distribution::gaussian;
    b.provenance = rng;
    b.data.resize(static_cast<std::size_t>(n) * d);
    CounterRng gen(rng);
    for (double& x : b.data) x = gen.next_gaussian();
    return b;
}

SampleBatch uniform_centered_batch(int n, int d, RngSeed rng) {
    if (n < 1 || d < 1) throw std::invalid_argument("uniform_centered_batch: n and d must be positive");
    SampleBatch b;
    b.n = n;
    b.d = d;
    b.distribution = Distribution::uniform_centered;
    b.provenance = rng;
    b.data.resize(static_cast<std::size_t>(n) * d);
    CounterRng gen(rng);
    for (double& x : b.data) x = gen.next_uniform_centered();
    return b;
}

std::vector<Vec> orthonormalize(const std::vector<Vec>& vecs) {
    std::vector<Vec> basis;
    double max_pivot = 0.0;
    std::vector<std::pair<Vec, double>> candidates;
    for (const Vec& v : vecs) {
        Vec u(v);
        // two MGS passes
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vec& b : basis) axpy(-dot(u, b), b, u);
        }
        const double p = norm(u);
        max_pivot = std::max(max_pivot, std::max(p, norm(v)));
        if (p > 1e-10 * std::max(max_pivot, 1e-300)) {
            basis.push_back(scaled(u, 1.0 / p));
        }
    }
    return basis;
}

Mat rotation_fixing_subspace(const std::vector<Vec>& basis, int d, double plane_angle) {
    if (basis.empty()) throw std::invalid_argument("rotation_fixing_subspace: empty basis");
    const int K = static_cast<int>(basis.size());
    if (d < K + 2) throw std::invalid_argument("rotation_fixing_subspace: requires d >= K + 2");
    for (const Vec& b : basis) {
        if (static_cast<int>(b.size()) != d) {
            throw std::invalid_argument("rotation_fixing_subspace: basis dimension mismatch");
        }
    }
    std::vector<Vec> frame = orthonormalize(basis);
    if (static_cast<int>(frame.size()) != K) {
        throw std::domain_error("rotation_fixing_subspace: rank-deficient basis");
    }
    // Extend with canonical vectors until we have two complement directions.
    for (int i = 0; i < d && static_cast<int>(frame.size()) < K + 2; ++i) {
        Vec e(d, 0.0);
        e[i] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vec& b : frame) axpy(-dot(e, b), b, e);
        }
        const double p = norm(e);
        if (p > 1e-8) frame.push_back(scaled(e, 1.0 / p));
    }
    if (static_cast<int>(frame.size()) < K + 2) {
        throw std::domain_error("rotation_fixing_subspace: failed to extend frame");
    }
    const Vec& u = frame[K];
    const Vec& v = frame[K + 1];
    const double c = std::cos(plane_angle);
    const double s = std::sin(plane_angle);
    // R = I + (c-1)(uu^T + vv^T) + s(vu^T - uv^T)
    Mat R(d, Vec(d, 0.0));
    for (int i = 0; i < d; ++i) {
        R[i][i] = 1.0;
        for (int j = 0; j < d; ++j) {
            R[i][j] += (c - 1.0) * (u[i] * u[j] + v[i] * v[j]) + s * (v[i] * u[j] - u[i] * v[j]);
        }
    }
    return R;
}

Vec mat_vec(const Mat& R, const Vec& v) {
    Vec out(R.size(), 0.0);
    for (std::size_t i = 0; i < R.size(); ++i) out[i] = dot(R[i], v);
    return out;
}

}  // namespace popgrad
