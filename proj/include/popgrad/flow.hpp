#pragma once

#include <array>
#include <utility>
#include <vector>

#include "popgrad/geometry.hpp"

namespace popgrad {

// Gradient-flow integration of dw/dt = -E[grad J] plus the reduced symmetric
// 2D dynamics for cyclic weight patterns under an orthonormal teacher.

enum class Terminal { converged_to_target, converged_to_point, max_steps, diverged };
enum class Integrator { euler, rk4 };

struct FlowOptions {
    double step = 0.1;
    long max_steps = 100000;
    double grad_tol = 1e-8;
    double target_rel_tol = 1e-3;
    Integrator method = Integrator::rk4;
    bool record_states = true;  // keep the full state history (first/last always kept)
};

struct Trajectory {
    std::vector<double> times;
    std::vector<WeightSet> states;
    std::vector<double> grad_norms;
    std::vector<double> lyapunov;  // filled for K = 1 runs only
    Terminal terminal = Terminal::max_steps;
    long steps = 0;
    // Permutation matching the student to the teacher at termination (only
    // meaningful for converged_to_target).
    std::vector<int> matched_permutation;
};

Trajectory flow(const WeightSet& W0, const WeightSet& W_star, const std::vector<double>& a,
                const std::vector<double>& a_star, const FlowOptions& opts);

// V = 0.5 |w - w*|^2 and its flow derivative dV/dt = -(w - w*)^T E[grad J],
// per-sample convention. Negative throughout the basin |w - w*| < |w*|.
std::pair<double, double> lyapunov_value_and_rate(const Vec& w, const Vec& w_star);

// 2x2 bilinear-form matrix M(theta), theta in [0, pi/2], with
//   dV/dt = -(1/2pi) y^T M y,  y = (|w*|, |w|).
// The 1/2pi comes from the per-sample convention. Returned row-major.
std::array<double, 4> lyapunov_form_matrix(double theta);

// Initialization radius epsilon * sqrt(2pi/(d+1)) * |w*|.
double sampling_radius(int d, double epsilon, double wstar_norm);

struct BasinResult {
    int success = 0;
    int trials = 0;
    double lower_bound = 0.0;  // (1 - epsilon)/2
};

BasinResult basin_experiment(int d, double epsilon, const Vec& wstar, int trials, RngSeed rng,
                             const FlowOptions& opts);

// ---- cyclic-symmetric reduction ----

// Derived angles for the symmetric state w = [x, y, ..., y] under an
// orthonormal teacher basis.
struct SymmetricState {
    double x = 0.0;
    double y = 0.0;
    int K = 0;
    double alpha = 0.0;
    double theta = 0.0;     // angle(w_1, w*_1)
    double phi = 0.0;       // angle(w_1, w_j'), j' != 1
    double phi_star = 0.0;  // angle(w_1, w*_j'), j' != 1
};

SymmetricState symmetric_state(double x, double y, int K);

// Reduced 2D descent field: 2pi times minus the per-sample population
// gradient of (x, y). Vanishes at (1, 0) and on the diagonal saddle.
std::pair<double, double> symmetric_2d_grad(double x, double y, int K);

// Embeds (x, y) as the cyclic student [x, y, ..., y] and shifts, with the
// standard orthonormal basis as teacher (d = K).
std::pair<WeightSet, WeightSet> embed_symmetric(double x, double y, int K);

// Diagonal fixed point x = y = (sqrt(K-1) - arccos(1/sqrt(K)) + pi) / (pi K).
double saddle_value(int K);

struct BetaParam {
    double beta = 0.0;  // in [1, sqrt(K))
    double eps = 0.0;   // x - y
};

// Reparametrization of the region x > y >= 0; beta = cos(theta) + sqrt(K-1) sin(theta).
BetaParam beta_reparam(double x, double y, int K);
std::pair<double, double> beta_inverse(double beta, double eps, int K);

enum class SymTerminal { optimum, saddle, max_steps };

struct SymTrajectory {
    std::vector<double> times;
    std::vector<double> xs;
    std::vector<double> ys;
    SymTerminal terminal = SymTerminal::max_steps;
    long steps = 0;
};

struct SymFlowOptions {
    double step = 0.02;
    long max_steps = 2000000;
    double grad_tol = 1e-9;
    double point_tol = 1e-3;  // distance at which (1,0) / the saddle count as reached
    bool record_states = true;
};

SymTrajectory symmetric_flow(double x0, double y0, int K, const SymFlowOptions& opts);

}  // namespace popgrad
