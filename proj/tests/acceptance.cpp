// Acceptance gate: twelve end-to-end checks, one pass/fail line each.
// Exits nonzero if any check fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "popgrad/analytic.hpp"
#include "popgrad/critical.hpp"
#include "popgrad/empirical.hpp"
#include "popgrad/experiments.hpp"
#include "popgrad/flow.hpp"
#include "popgrad/multilayer.hpp"

using namespace popgrad;
using nlohmann::json;

namespace {

Vec random_vec(int d, CounterRng& gen) {
    Vec v(d);
    for (double& c : v) c = gen.next_gaussian();
    return v;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fresh_dir(const std::string& tag) {
    const std::filesystem::path p = std::filesystem::path("acceptance_out") / tag;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p.string();
}

// ---- criterion 1: closed-form population gradient vs Monte Carlo ----
// The naive estimator's per-pair error at d=100, n=1e5 concentrates at
// 0.042-0.054 depending on theta, so the gate is the mean over pairs < 0.05
// with a 0.10 per-pair cap; see the decisions ledger for the variance math.
bool crit_formula_vs_monte_carlo() {
    const int d = 100, pairs = 50;
    double mean_hi = 0.0, mean_lo = 0.0;
    bool each_ok = true;
    for (int p = 0; p < pairs; ++p) {
        CounterRng gen(RngSeed{1001, static_cast<std::uint64_t>(p)});
        auto [w_hat, w_perp] = random_orthonormal_pair(d, gen);
        const double theta = gen.next_double() * (M_PI / 2);
        Vec e = scaled(w_hat, std::cos(theta));
        axpy(std::sin(theta), w_perp, e);
        const Vec w = scaled(w_hat, 0.5 + gen.next_double());
        const Vec truth = pg_function(e, w).vector;
        const double err_hi = relative_rms_error(
            truth, empirical_pg_streamed(100000, d, Distribution::gaussian,
                                         RngSeed{1002, 2ULL * p}, e, w));
        const double err_lo = relative_rms_error(
            truth, empirical_pg_streamed(1000, d, Distribution::gaussian,
                                         RngSeed{1002, 2ULL * p + 1}, e, w));
        each_ok = each_ok && err_hi < 0.10;
        mean_hi += err_hi;
        mean_lo += err_lo;
    }
    return each_ok && mean_hi / pairs < 0.05 && mean_hi / pairs < mean_lo / pairs;
}

// ---- criterion 2: closed-form per-sample gradient vs finite differences of
// the frozen-batch loss ----
bool crit_gradient_identity() {
    const int n = 100000, d = 5;
    for (int inst = 0; inst < 20; ++inst) {
        const int K = 1 + inst % 3;
        CounterRng gen(RngSeed{1101, static_cast<std::uint64_t>(inst)});
        std::vector<Vec> wv, tv;
        std::vector<double> a, as;
        for (int j = 0; j < K; ++j) {
            wv.push_back(random_vec(d, gen));
            tv.push_back(random_vec(d, gen));
            a.push_back(0.5 + gen.next_double());
            as.push_back(0.5 + gen.next_double());
        }
        const WeightSet T(tv);
        const SampleBatch X =
            gaussian_batch(n, d, RngSeed{1102, static_cast<std::uint64_t>(inst)});
        const auto an = empirical_grad(X, WeightSet(wv), T, a, as);
        double num = 0.0, den = 0.0;
        for (int j = 0; j < K; ++j) {
            const double h = 1e-5 * (1.0 + norm(wv[j]));
            for (int i = 0; i < d; ++i) {
                std::vector<Vec> up = wv, dn = wv;
                up[j][i] += h;
                dn[j][i] -= h;
                const double fd = (empirical_loss(X, WeightSet(up), T, a, as) -
                                   empirical_loss(X, WeightSet(dn), T, a, as)) /
                                  (2.0 * h);
                num += (fd - an[j][i]) * (fd - an[j][i]);
                den += an[j][i] * an[j][i];
            }
        }
        if (!(den > 0.0) || std::sqrt(num / den) >= 1e-4) return false;
    }
    return true;
}

// ---- criterion 3: strict Lyapunov descent certificate ----
bool crit_lyapunov() {
    for (int i = 1; i <= 1000; ++i) {
        const double theta = (M_PI / 2) * i / 1000.0;
        const auto M = lyapunov_form_matrix(theta);
        if (!(M[0] * M[3] - M[1] * M[2] > 0.0)) return false;
    }
    CounterRng gen(RngSeed{1201, 0});
    for (int t = 0; t < 1000; ++t) {
        const int d = 3;
        auto [w_hat, w_perp] = random_orthonormal_pair(d, gen);
        const double theta = (M_PI / 2) * (1e-6 + (1.0 - 1e-6) * gen.next_double());
        const Vec ws = scaled(w_hat, 0.1 + 2.0 * gen.next_double());
        Vec w = scaled(w_hat, std::cos(theta));
        axpy(std::sin(theta), w_perp, w);
        w = scaled(w, 0.1 + 2.0 * gen.next_double());
        const auto [value, rate] = lyapunov_value_and_rate(w, ws);
        if (!(value > 0.0) || !(rate < 0.0)) return false;
    }
    return true;
}

// ---- criterion 4: convergence probability from the sampling ball ----
bool crit_basin() {
    ExperimentConfig cfg;
    cfg.experiment = "basin";
    cfg.seed = RngSeed{1301, 0};
    cfg.output_dir = fresh_dir("basin");
    const ExperimentReport rep = run(cfg);
    const json doc = json::parse(rep.summary_json);
    const double fraction = doc["summary"]["success_fraction"].get<double>();
    return rep.passed && fraction >= 0.4 - 3.0 * std::sqrt(0.4 * 0.6 / 2000.0);
}

// ---- criterion 5: diagonal fixed point of the reduced dynamics ----
bool crit_saddle_fixed_point() {
    for (int K = 2; K <= 10; ++K) {
        const double s = saddle_value(K);
        const auto [gx, gy] = symmetric_2d_grad(s, s, K);
        if (std::hypot(gx, gy) > 1e-10) return false;
    }
    return std::abs(saddle_value(2) - 0.53416) < 1e-4;
}

// ---- criterion 6: symmetry breaking along the diagonal ----
bool crit_symmetry_breaking() {
    SymFlowOptions opts;
    opts.record_states = false;
    if (symmetric_flow(0.5, 0.5, 2, opts).terminal != SymTerminal::saddle) return false;
    if (symmetric_flow(0.5, 0.5 - 1e-6, 2, opts).terminal != SymTerminal::optimum) return false;
    long prev_steps = -1;
    for (int K : {2, 5, 10}) {
        const SymTrajectory traj = symmetric_flow(1e-3, 0.0, K, opts);
        if (traj.terminal != SymTerminal::optimum) return false;
        if (prev_steps >= 0 && traj.steps >= prev_steps) return false;
        prev_steps = traj.steps;
    }
    return true;
}

// ---- criterion 7: reduced 2D field equals the projected full gradient ----
bool crit_2d_equivalence() {
    for (int K : {2, 3, 5}) {
        CounterRng gen(RngSeed{1501, static_cast<std::uint64_t>(K)});
        for (int t = 0; t < 200; ++t) {
            const double y = gen.next_double();
            const double x = y + 1e-3 + (1.3 - y) * gen.next_double();
            const auto [gx, gy] = symmetric_2d_grad(x, y, K);
            const auto [W, Wstar] = embed_symmetric(x, y, K);
            const auto grads = multi_relu_grad(W, Wstar);
            if (std::abs(gx + 2.0 * M_PI * grads[0][0]) > 1e-8) return false;
            if (std::abs(gy + 2.0 * M_PI * grads[0][1]) > 1e-8) return false;
        }
    }
    return true;
}

// ---- criterion 8: sign-agreement scan of the planar screening quantities ----
bool crit_scan() {
    const ScanReport rep = scan_conjecture_2d(1000, 1000);
    return rep.counterexamples == 0 && rep.cells_checked > 0;
}

// ---- criterion 9: critical-point constructions ----
bool crit_constructions() {
    CounterRng gen(RngSeed{1701, 0});
    // collinear saddle family (equal teacher norms)
    for (int t = 0; t < 10; ++t) {
        auto [e1, e2] = random_orthonormal_pair(4, gen);
        const double mix = 0.2 + 0.6 * gen.next_double();
        Vec dir2 = scaled(e1, std::cos(mix));
        axpy(std::sin(mix), e2, dir2);
        const double nrm = 0.5 + gen.next_double();
        const Vec w1s = scaled(e1, nrm);
        const Vec w2s = scaled(normalized(dir2), nrm);
        const double split = 0.05 + 0.9 * gen.next_double();
        const WeightSet W = collinear_saddle_k2(w1s, w2s, split);
        if (grad_norm_residual(W, WeightSet({w1s, w2s})) > 1e-8) return false;
    }
    // rotational orbit invariance at d = K + 3, K = 2
    for (int t = 0; t < 100; ++t) {
        const int d = 5;
        const WeightSet W({random_vec(d, gen), random_vec(d, gen)});
        const WeightSet Wstar({random_vec(d, gen), random_vec(d, gen)});
        const OrbitCheck chk = orbit_invariance_check(W, Wstar, 2.0 * M_PI * gen.next_double());
        if (std::abs(chk.residual_before - chk.residual_after) > 1e-10) return false;
    }
    // orthonormal optimum normal system
    const WeightSet I2({{1.0, 0.0}, {0.0, 1.0}});
    const NormalSystem sys = assemble_normal_system(I2, I2);
    const double expect[4][2] = {{M_PI, 1.0}, {0.0, M_PI / 2}, {M_PI / 2, 0.0}, {1.0, M_PI}};
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 2; ++c) {
            if (std::abs(sys.M[r][c] - expect[r][c]) > 1e-12) return false;
            if (std::abs(sys.M_star[r][c] - expect[r][c]) > 1e-12) return false;
        }
    }
    return true;
}

// ---- criterion 10: deep-net gradient recursion vs finite differences ----
bool crit_multilayer() {
    ExperimentConfig cfg;
    cfg.experiment = "multilayer_check";
    cfg.seed = RngSeed{1801, 0};
    cfg.output_dir = fresh_dir("multilayer");
    if (!run(cfg).passed) return false;

    // depth-1 exact reduction to the two-layer empirical gradient
    CounterRng gen(RngSeed{1802, 0});
    const int d = 5, K = 3;
    Mat Ws(d, Vec(K)), Ts(d, Vec(K));
    std::vector<Vec> wv(K, Vec(d)), tv(K, Vec(d));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < K; ++j) {
            Ws[i][j] = gen.next_gaussian();
            Ts[i][j] = gen.next_gaussian();
            wv[j][i] = Ws[i][j];
            tv[j][i] = Ts[i][j];
        }
    }
    const SampleBatch X = gaussian_batch(2000, d, RngSeed{1803, 0});
    const auto inflow = gradient_inflow(LayeredNet({Ws}), LayeredNet({Ts}), X);
    const std::vector<double> ones(K, 1.0);
    const auto emp = empirical_grad(X, WeightSet(wv), WeightSet(tv), ones, ones);
    for (int j = 0; j < K; ++j) {
        for (int i = 0; i < d; ++i) {
            if (std::abs(inflow[0][i][j] - emp[j][i]) > 1e-12) return false;
        }
    }
    return true;
}

// ---- criterion 11: fixed top-weight convergence behavior ----
bool crit_fixed_top() {
    ExperimentConfig cfg;
    cfg.experiment = "fixed_top_weights";
    cfg.seed = RngSeed{1901, 0};
    cfg.output_dir = fresh_dir("fixed_top");
    const ExperimentReport rep = run(cfg);
    const json doc = json::parse(rep.summary_json);
    const int runs = doc["summary"]["runs"].get<int>();
    return doc["summary"]["all_positive_successes"].get<int>() == runs &&
           doc["summary"]["mixed_sign_successes"].get<int>() == 0;
}

// ---- criterion 12: byte-identical CSV on rerun ----
bool crit_determinism() {
    for (const std::string name : {"verify_formula", "scan_l12"}) {
        ExperimentConfig cfg;
        cfg.experiment = name;
        cfg.seed = RngSeed{2001, 7};
        if (name == "verify_formula") {
            cfg.params = {{"d", 20.0}, {"pairs", 4.0}, {"n_levels", 2.0}, {"n_base", 500.0}};
        } else {
            cfg.params = {{"grid_phi", 40.0}, {"grid_theta12", 40.0}};
        }
        cfg.output_dir = fresh_dir("det_a_" + name);
        const ExperimentReport a = run(cfg);
        cfg.output_dir = fresh_dir("det_b_" + name);
        const ExperimentReport b = run(cfg);
        if (slurp(a.csv_path) != slurp(b.csv_path) || slurp(a.csv_path).empty()) return false;
    }
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        std::string description;
        std::function<bool()> check;
    };
    const std::vector<Criterion> criteria = {
        {"closed-form population gradient matches Monte Carlo (50 pairs, d=100)",
         crit_formula_vs_monte_carlo},
        {"per-sample gradient equals finite differences of the frozen-batch loss",
         crit_gradient_identity},
        {"Lyapunov descent: dV/dt < 0 and det M(theta) > 0 off the degenerate ray",
         crit_lyapunov},
        {"convergence fraction from the sampling ball at d=10, eps=0.2 meets the bound",
         crit_basin},
        {"reduced field vanishes at the diagonal fixed point, K=2 value 0.53416",
         crit_saddle_fixed_point},
        {"symmetry breaking: diagonal reaches the saddle, perturbed reaches the optimum",
         crit_symmetry_breaking},
        {"reduced 2D field equals the projected full gradient within 1e-8",
         crit_2d_equivalence},
        {"1000x1000 planar scan finds no cone-vs-screening sign violations", crit_scan},
        {"collinear saddles, orbit invariance, and the orthonormal normal system",
         crit_constructions},
        {"deep-net gradient recursion passes finite differences and the depth-1 reduction",
         crit_multilayer},
        {"all-positive top weights converge 8/8; one negative top weight converges 0/8",
         crit_fixed_top},
        {"experiment reruns with identical config are byte-identical", crit_determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        bool ok = false;
        try {
            ok = criteria[i].check();
        } catch (const std::exception& ex) {
            std::fprintf(stderr, "criterion %zu raised: %s\n", i + 1, ex.what());
        }
        failures += !ok;
        std::printf("%s - %zu: %s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].description.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
