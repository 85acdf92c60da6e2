#include "popgrad/empirical.hpp"

#include <cmath>
#include <stdexcept>

#include "popgrad/analytic.hpp"

namespace popgrad {

GatingMask gating(const SampleBatch& X, const Vec& w) {
    if (static_cast<int>(w.size()) != X.d) throw std::invalid_argument("gating: dimension mismatch");
    GatingMask m;
    m.bits.resize(X.n);
    for (int l = 0; l < X.n; ++l) {
        const double* x = X.row(l);
        double s = 0.0;
        for (int i = 0; i < X.d; ++i) s += x[i] * w[i];
        m.bits[l] = s > 0.0 ? 1 : 0;  // ties off, matching diag(Xw > 0)
    }
    return m;
}

Vec empirical_pg(const SampleBatch& X, const Vec& e, const Vec& w) {
    if (static_cast<int>(e.size()) != X.d || static_cast<int>(w.size()) != X.d) {
        throw std::invalid_argument("empirical_pg: dimension mismatch");
    }
    Vec acc(X.d, 0.0);
    for (int l = 0; l < X.n; ++l) {
        const double* x = X.row(l);
        double se = 0.0, sw = 0.0;
        for (int i = 0; i < X.d; ++i) {
            se += x[i] * e[i];
            sw += x[i] * w[i];
        }
        if (se > 0.0 && sw > 0.0) {
            for (int i = 0; i < X.d; ++i) acc[i] += x[i] * sw;
        }
    }
    for (double& v : acc) v /= X.n;
    return acc;
}

Vec empirical_pg_streamed(int n, int d, Distribution dist, RngSeed rng, const Vec& e, const Vec& w) {
    if (static_cast<int>(e.size()) != d || static_cast<int>(w.size()) != d) {
        throw std::invalid_argument("empirical_pg_streamed: dimension mismatch");
    }
    CounterRng gen(rng);
    Vec x(d), acc(d, 0.0);
    for (int l = 0; l < n; ++l) {
        double se = 0.0, sw = 0.0;
        for (int i = 0; i < d; ++i) {
            x[i] = dist == Distribution::gaussian ? gen.next_gaussian() : gen.next_uniform_centered();
            se += x[i] * e[i];
            sw += x[i] * w[i];
        }
        if (se > 0.0 && sw > 0.0) {
            for (int i = 0; i < d; ++i) acc[i] += x[i] * sw;
        }
    }
    for (double& v : acc) v /= n;
    return acc;
}

std::vector<Vec> empirical_grad(const SampleBatch& X, const WeightSet& W, const WeightSet& W_star,
                                const std::vector<double>& a, const std::vector<double>& a_star) {
    const int K = W.K();
    const int d = W.dim();
    if (W_star.K() != K || W_star.dim() != d || X.d != d) {
        throw std::invalid_argument("empirical_grad: dimension mismatch");
    }
    if (static_cast<int>(a.size()) != K || static_cast<int>(a_star.size()) != K) {
        throw std::invalid_argument("empirical_grad: top-weight length mismatch");
    }
    std::vector<Vec> grads(K, Vec(d, 0.0));
    std::vector<double> pre(K), pre_star(K);
    for (int l = 0; l < X.n; ++l) {
        const double* x = X.row(l);
        double residual = 0.0;  // g(x;W,a) - g(x;W*,a*)
        for (int j = 0; j < K; ++j) {
            double s = 0.0, ss = 0.0;
            for (int i = 0; i < d; ++i) {
                s += x[i] * W.vectors[j][i];
                ss += x[i] * W_star.vectors[j][i];
            }
            pre[j] = s;
            pre_star[j] = ss;
            residual += a[j] * (s > 0.0 ? s : 0.0) - a_star[j] * (ss > 0.0 ? ss : 0.0);
        }
        for (int j = 0; j < K; ++j) {
            if (pre[j] > 0.0) {
                const double c = a[j] * residual;
                for (int i = 0; i < d; ++i) grads[j][i] += c * x[i];
            }
        }
    }
    for (Vec& g : grads) {
        for (double& v : g) v /= X.n;
    }
    return grads;
}

double empirical_loss(const SampleBatch& X, const WeightSet& W, const WeightSet& W_star,
                      const std::vector<double>& a, const std::vector<double>& a_star) {
    const int K = W.K();
    const int d = W.dim();
    if (W_star.K() != K || W_star.dim() != d || X.d != d) {
        throw std::invalid_argument("empirical_loss: dimension mismatch");
    }
    double loss = 0.0;
    for (int l = 0; l < X.n; ++l) {
        const double* x = X.row(l);
        double residual = 0.0;
        for (int j = 0; j < K; ++j) {
            double s = 0.0, ss = 0.0;
            for (int i = 0; i < d; ++i) {
                s += x[i] * W.vectors[j][i];
                ss += x[i] * W_star.vectors[j][i];
            }
            residual += a[j] * (s > 0.0 ? s : 0.0) - a_star[j] * (ss > 0.0 ? ss : 0.0);
        }
        loss += 0.5 * residual * residual;
    }
    return loss / X.n;
}

double relative_rms_error(const Vec& analytic, const Vec& empirical) {
    if (analytic.size() != empirical.size()) {
        throw std::invalid_argument("relative_rms_error: dimension mismatch");
    }
    const double en = norm(empirical);
    if (en < kNormFloor) throw std::domain_error("relative_rms_error: zero empirical norm");
    return norm(sub(analytic, empirical)) / en;
}

std::pair<Vec, Vec> random_orthonormal_pair(int d, CounterRng& gen) {
    if (d < 2) throw std::invalid_argument("random_orthonormal_pair: d >= 2 required");
    Vec w(d), z(d);
    for (int i = 0; i < d; ++i) w[i] = gen.next_gaussian();
    for (int i = 0; i < d; ++i) z[i] = gen.next_gaussian();
    Vec w_hat = normalized(w);
    axpy(-dot(z, w_hat), w_hat, z);
    return {w_hat, normalized(z)};
}

std::vector<AngleErrorRow> error_vs_angle_profile(int d, int n, int bins, int pairs_per_bin,
                                                  RngSeed rng) {
    if (bins < 2) throw std::invalid_argument("error_vs_angle_profile: bins >= 2 required");
    std::vector<AngleErrorRow> rows(bins);
    for (int b = 0; b < bins; ++b) {
        const double theta = (b + 0.5) * M_PI / bins;
        CounterRng gen(rng.derived(b));
        double sum = 0.0, mx = 0.0;
        for (int p = 0; p < pairs_per_bin; ++p) {
            auto [w_hat, w_perp] = random_orthonormal_pair(d, gen);
            const double mag = 0.5 + gen.next_double();  // keep |w| away from zero
            const Vec w = scaled(w_hat, mag);
            Vec e = scaled(w_hat, std::cos(theta));
            axpy(std::sin(theta), w_perp, e);
            const SampleBatch X = gaussian_batch(n, d, rng.derived(1000003ULL * b + p + 1));
            const double err = relative_rms_error(pg_function(e, w).vector, empirical_pg(X, e, w));
            sum += err;
            mx = std::max(mx, err);
        }
        rows[b].theta = theta;
        rows[b].mean_err = sum / pairs_per_bin;
        rows[b].max_err = mx;
    }
    return rows;
}

}  // namespace popgrad
