#include "popgrad/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "popgrad/analytic.hpp"

namespace popgrad {

namespace {

constexpr double kDivergenceNorm = 1e6;

using State = std::vector<Vec>;

State evaluate_grads(const State& w, const WeightSet& W_star, const std::vector<double>& a,
                     const std::vector<double>& a_star) {
    return weighted_multi_relu_grad(WeightSet(w), W_star, a, a_star);
}

double max_grad_norm(const State& grads) {
    double worst = 0.0;
    for (const Vec& g : grads) worst = std::max(worst, norm(g));
    return worst;
}

bool state_valid(const State& w) {
    for (const Vec& v : w) {
        const double n = norm(v);
        if (!(n >= kNormFloor) || n > kDivergenceNorm) return false;
    }
    return true;
}

// max_j |w_j - w*_perm(j)| / |w*_perm(j)| minimized over permutations.
// Exhaustive for K <= 8, greedy beyond.
std::pair<double, std::vector<int>> best_permutation_distance(const State& w, const WeightSet& W_star) {
    const int K = static_cast<int>(w.size());
    std::vector<std::vector<double>> D(K, std::vector<double>(K, 0.0));
    for (int j = 0; j < K; ++j) {
        for (int k = 0; k < K; ++k) {
            D[j][k] = norm(sub(w[j], W_star.vectors[k])) / W_star.norms[k];
        }
    }
    std::vector<int> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    if (K <= 8) {
        std::vector<int> best_perm = perm;
        double best = std::numeric_limits<double>::infinity();
        do {
            double worst = 0.0;
            for (int j = 0; j < K; ++j) worst = std::max(worst, D[j][perm[j]]);
            if (worst < best) {
                best = worst;
                best_perm = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return {best, best_perm};
    }
    // greedy: repeatedly take the globally smallest remaining entry
    std::vector<bool> used_row(K, false), used_col(K, false);
    std::vector<int> assign(K, -1);
    for (int it = 0; it < K; ++it) {
        double best = std::numeric_limits<double>::infinity();
        int br = -1, bc = -1;
        for (int j = 0; j < K; ++j) {
            if (used_row[j]) continue;
            for (int k = 0; k < K; ++k) {
                if (used_col[k]) continue;
                if (D[j][k] < best) {
                    best = D[j][k];
                    br = j;
                    bc = k;
                }
            }
        }
        used_row[br] = used_col[bc] = true;
        assign[br] = bc;
    }
    double worst = 0.0;
    for (int j = 0; j < K; ++j) worst = std::max(worst, D[j][assign[j]]);
    return {worst, assign};
}

}  // namespace

Trajectory flow(const WeightSet& W0, const WeightSet& W_star, const std::vector<double>& a,
                const std::vector<double>& a_star, const FlowOptions& opts) {
    if (opts.step <= 0.0) throw std::invalid_argument("flow: step must be positive");
    const int K = W0.K();
    if (W_star.K() != K || W_star.dim() != W0.dim()) throw std::invalid_argument("flow: shape mismatch");

    Trajectory traj;
    State w = W0.vectors;
    const bool single = (K == 1);

    auto record = [&](double t, const State& state, double gnorm) {
        traj.times.push_back(t);
        traj.grad_norms.push_back(gnorm);
        if (opts.record_states) traj.states.emplace_back(state);
        if (single) traj.lyapunov.push_back(0.5 * dot(sub(state[0], W_star.vectors[0]),
                                                      sub(state[0], W_star.vectors[0])));
    };

    auto finish = [&](double t, const State& state, double gnorm, Terminal term) {
        if (!opts.record_states) traj.states.emplace_back(state);  // keep terminal state
        record(t, state, gnorm);
        traj.terminal = term;
    };

    double t = 0.0;
    for (long step = 0;; ++step) {
        State grads;
        try {
            grads = evaluate_grads(w, W_star, a, a_star);
        } catch (const std::domain_error&) {
            traj.terminal = Terminal::diverged;  // norm hit the origin singularity
            traj.steps = step;
            return traj;
        }
        const double gnorm = max_grad_norm(grads);
        if (!state_valid(w)) {
            finish(t, w, gnorm, Terminal::diverged);
            traj.steps = step;
            return traj;
        }
        if (gnorm < opts.grad_tol) {
            auto [dist, perm] = best_permutation_distance(w, W_star);
            if (dist < opts.target_rel_tol) {
                traj.matched_permutation = perm;
                finish(t, w, gnorm, Terminal::converged_to_target);
            } else {
                finish(t, w, gnorm, Terminal::converged_to_point);
            }
            traj.steps = step;
            return traj;
        }
        if (step >= opts.max_steps) {
            finish(t, w, gnorm, Terminal::max_steps);
            traj.steps = step;
            return traj;
        }
        record(t, w, gnorm);

        const double hstep = opts.step;
        try {
            if (opts.method == Integrator::euler) {
                for (int j = 0; j < K; ++j) axpy(-hstep, grads[j], w[j]);
            } else {
                State k1 = grads;
                State w2 = w;
                for (int j = 0; j < K; ++j) axpy(-0.5 * hstep, k1[j], w2[j]);
                State k2 = evaluate_grads(w2, W_star, a, a_star);
                State w3 = w;
                for (int j = 0; j < K; ++j) axpy(-0.5 * hstep, k2[j], w3[j]);
                State k3 = evaluate_grads(w3, W_star, a, a_star);
                State w4 = w;
                for (int j = 0; j < K; ++j) axpy(-hstep, k3[j], w4[j]);
                State k4 = evaluate_grads(w4, W_star, a, a_star);
                for (int j = 0; j < K; ++j) {
                    for (std::size_t i = 0; i < w[j].size(); ++i) {
                        w[j][i] -= hstep / 6.0 * (k1[j][i] + 2.0 * k2[j][i] + 2.0 * k3[j][i] + k4[j][i]);
                    }
                }
            }
        } catch (const std::domain_error&) {
            traj.terminal = Terminal::diverged;
            traj.steps = step + 1;
            return traj;
        }
        t += hstep;
    }
}

std::pair<double, double> lyapunov_value_and_rate(const Vec& w, const Vec& w_star) {
    const Vec diff = sub(w, w_star);
    const double V = 0.5 * dot(diff, diff);
    const double rate = -dot(diff, single_relu_grad(w, w_star));
    return {V, rate};
}

std::array<double, 4> lyapunov_form_matrix(double theta) {
    if (theta < 0.0 || theta > M_PI / 2.0 + 1e-15) {
        throw std::domain_error("lyapunov_form_matrix: theta outside [0, pi/2]");
    }
    const double off = -0.5 * ((2.0 * M_PI - theta) * std::cos(theta) + std::sin(theta));
    return {0.5 * (std::sin(2.0 * theta) + 2.0 * M_PI - 2.0 * theta), off, off, M_PI};
}

double sampling_radius(int d, double epsilon, double wstar_norm) {
    if (d < 1) throw std::invalid_argument("sampling_radius: d >= 1 required");
    if (epsilon <= 0.0 || epsilon >= 1.0 + 1e-15) {
        throw std::invalid_argument("sampling_radius: epsilon in (0, 1]");
    }
    return epsilon * std::sqrt(2.0 * M_PI / (d + 1)) * wstar_norm;
}

BasinResult basin_experiment(int d, double epsilon, const Vec& wstar, int trials, RngSeed rng,
                             const FlowOptions& opts) {
    if (trials < 100) throw std::invalid_argument("basin_experiment: trials >= 100 required");
    const double r = sampling_radius(d, epsilon, norm(wstar));
    const WeightSet W_star({wstar});
    BasinResult res;
    res.trials = trials;
    res.lower_bound = (1.0 - epsilon) / 2.0;
    FlowOptions run_opts = opts;
    run_opts.record_states = false;
    for (int trial = 0; trial < trials; ++trial) {
        CounterRng gen(rng.derived(trial));
        Vec w0(d);
        double n = 0.0;
        do {
            for (int i = 0; i < d; ++i) w0[i] = gen.next_gaussian();
            n = norm(w0);
        } while (n < kNormFloor);
        const double radius = r * std::pow(gen.next_double_open(), 1.0 / d);
        for (double& v : w0) v *= radius / n;
        if (norm(w0) < kNormFloor) {
            continue;  // effectively at the origin; cannot start the flow there
        }
        const Trajectory traj = flow(WeightSet({w0}), W_star, {1.0}, {1.0}, run_opts);
        if (traj.terminal == Terminal::converged_to_target) ++res.success;
    }
    return res;
}

SymmetricState symmetric_state(double x, double y, int K) {
    if (K < 2) throw std::invalid_argument("symmetric_state: K >= 2 required");
    const double sq = x * x + (K - 1) * y * y;
    if (sq <= 0.0) throw std::domain_error("symmetric_state: origin is singular");
    SymmetricState s;
    s.x = x;
    s.y = y;
    s.K = K;
    s.alpha = 1.0 / std::sqrt(sq);
    s.theta = std::acos(std::clamp(s.alpha * x, -1.0, 1.0));
    s.phi_star = std::acos(std::clamp(s.alpha * y, -1.0, 1.0));
    s.phi = std::acos(std::clamp(s.alpha * s.alpha * (2.0 * x * y + (K - 2) * y * y), -1.0, 1.0));
    return s;
}

std::pair<double, double> symmetric_2d_grad(double x, double y, int K) {
    const SymmetricState s = symmetric_state(x, y, K);
    const double common = (M_PI - s.phi) * (x - 1.0 + (K - 1) * y);
    const double mix = (K - 1) * (s.alpha * std::sin(s.phi_star) - std::sin(s.phi)) +
                       s.alpha * std::sin(s.theta);
    const double gx = -(common + s.theta + s.phi * (x - 1.0)) + mix * x;
    const double gy = -(common + (s.phi_star - s.phi) + s.phi * y) + mix * y;
    return {gx, gy};
}

std::pair<WeightSet, WeightSet> embed_symmetric(double x, double y, int K) {
    if (K < 2) throw std::invalid_argument("embed_symmetric: K >= 2 required");
    if (x == 0.0 && y == 0.0) throw std::invalid_argument("embed_symmetric: origin state");
    std::vector<Vec> teacher, student;
    for (int j = 0; j < K; ++j) {
        Vec basis(K, 0.0);
        basis[j] = 1.0;
        teacher.push_back(basis);
        Vec row(K, y);
        row[j] = x;
        student.push_back(row);
    }
    return {WeightSet(student), WeightSet(teacher)};
}

double saddle_value(int K) {
    if (K < 2) throw std::invalid_argument("saddle_value: K >= 2 required");
    return (std::sqrt(static_cast<double>(K - 1)) - std::acos(1.0 / std::sqrt(static_cast<double>(K))) +
            M_PI) /
           (M_PI * K);
}

BetaParam beta_reparam(double x, double y, int K) {
    if (K < 2) throw std::invalid_argument("beta_reparam: K >= 2 required");
    if (!(x > y) || y < 0.0) throw std::domain_error("beta_reparam: requires x > y >= 0");
    const double alpha = 1.0 / std::sqrt(x * x + (K - 1) * y * y);
    const double ae = alpha * (x - y);
    BetaParam p;
    p.eps = x - y;
    p.beta = std::sqrt(std::max(K - (K - 1) * ae * ae, 1.0));
    return p;
}

std::pair<double, double> beta_inverse(double beta, double eps, int K) {
    if (K < 2) throw std::invalid_argument("beta_inverse: K >= 2 required");
    if (beta < 1.0 || beta * beta > K || eps <= 0.0) {
        throw std::domain_error("beta_inverse: beta in [1, sqrt(K)), eps > 0 required");
    }
    const double beta2 = std::sqrt((K - beta * beta) / (K - 1));
    const double alpha = beta2 / eps;
    const double y = (beta - beta2) / (K * alpha);
    return {y + eps, y};
}

SymTrajectory symmetric_flow(double x0, double y0, int K, const SymFlowOptions& opts) {
    if (x0 == 0.0 && y0 == 0.0) throw std::domain_error("symmetric_flow: origin start");
    const double s = saddle_value(K);
    SymTrajectory traj;
    double x = x0, y = y0, t = 0.0;

    auto record = [&](double tt, double xx, double yy) {
        if (opts.record_states || traj.times.empty()) {
            traj.times.push_back(tt);
            traj.xs.push_back(xx);
            traj.ys.push_back(yy);
        }
    };
    auto record_final = [&](double tt, double xx, double yy) {
        traj.times.push_back(tt);
        traj.xs.push_back(xx);
        traj.ys.push_back(yy);
    };

    for (long step = 0;; ++step) {
        const auto [gx, gy] = symmetric_2d_grad(x, y, K);
        const double gnorm = std::hypot(gx, gy);
        if (std::hypot(x - 1.0, y) < opts.point_tol) {
            record_final(t, x, y);
            traj.terminal = SymTerminal::optimum;
            traj.steps = step;
            return traj;
        }
        if (gnorm < opts.grad_tol) {
            traj.terminal = std::hypot(x - s, y - s) < opts.point_tol ? SymTerminal::saddle
                                                                     : SymTerminal::max_steps;
            record_final(t, x, y);
            traj.steps = step;
            return traj;
        }
        if (step >= opts.max_steps) {
            record_final(t, x, y);
            traj.terminal = SymTerminal::max_steps;
            traj.steps = step;
            return traj;
        }
        record(t, x, y);
        const double hstep = opts.step;
        const auto [k1x, k1y] = std::pair(gx, gy);
        const auto [k2x, k2y] = symmetric_2d_grad(x + 0.5 * hstep * k1x, y + 0.5 * hstep * k1y, K);
        const auto [k3x, k3y] = symmetric_2d_grad(x + 0.5 * hstep * k2x, y + 0.5 * hstep * k2y, K);
        const auto [k4x, k4y] = symmetric_2d_grad(x + hstep * k3x, y + hstep * k3y, K);
        x += hstep / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += hstep / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        t += hstep;
    }
}

}  // namespace popgrad
