#pragma once

#include <functional>
#include <vector>

#include "popgrad/geometry.hpp"

namespace popgrad {

// h(theta) = (pi - theta) cos(theta) + sin(theta); strictly decreasing on
// [0, pi] with h(0) = pi, h(pi) = 0. Throws outside [0, pi].
double h(double theta);

// Projected normal-equation machinery. M and M_star are K^2-by-K with rows
// ordered lexicographically by (j, j'), so the diagonal-constraint rows
// (j, j) sit at index j*K + j and equal the rows of the reduced K-by-K
// systems Mr, Mr_star.
struct NormalSystem {
    int K = 0;
    std::vector<std::vector<double>> M;        // K^2 x K
    std::vector<std::vector<double>> M_star;   // K^2 x K
    std::vector<std::vector<double>> Mr;       // K x K, Mr[j][k] = h(Theta[k][j])
    std::vector<std::vector<double>> Mr_star;  // K x K, Mr_star[j][k] = h(ThetaStar[k][j])
    AngleMatrix Theta;
    AngleMatrix Theta_star;
};

NormalSystem assemble_normal_system(const WeightSet& W, const WeightSet& W_star);

inline constexpr double kSingularCondition = 1e12;

struct ReducedSolution {
    std::vector<double> magnitudes;
    double condition = 0.0;
    bool singular = false;           // condition above kSingularCondition
    bool all_positive = false;       // a non-positive solved magnitude rules out a valid critical point
};

// Solves Mr wbar = Mr_star wbar_star. Singular systems are reported, not
// thrown: collinear configurations legitimately produce them.
ReducedSolution solve_reduced_magnitudes(const NormalSystem& sys, const std::vector<double>& wbar_star);

// max_j |E[grad_j]|; zero iff critical point.
double grad_norm_residual(const WeightSet& W, const WeightSet& W_star);

// Screening quantity L_{jj'} = m*_{jj'} - v^T Mr^{-1} m_{jj'} for a single
// teacher direction e_star against all student unit directions E.
double L_function(int j, int j_prime, const Vec& e_star, const std::vector<Vec>& E,
                  const AngleMatrix& Theta);

struct ConeClassification {
    enum class Label { interior, exterior, boundary };
    Label label = Label::boundary;
    double margin = 0.0;  // min of the two cone coordinates of e_star
};

inline constexpr double kConeBoundaryBand = 1e-9;

// Planar cone test: e_star = c1 e1 + c2 e2 with c1, c2 > 0 means interior.
// e_star must lie in span(e1, e2) (projection residual <= 1e-9).
ConeClassification cone_membership_2d(const Vec& e_star, const Vec& e1, const Vec& e2);

struct ScanRow {
    double theta12 = 0.0;
    double phi = 0.0;
    double L12 = 0.0;
    double L21 = 0.0;
    ConeClassification::Label cone = ConeClassification::Label::boundary;
};

struct ScanReport {
    long counterexamples = 0;
    // Smallest signed agreement between cone label and (L12, L21) over all
    // non-boundary cells; negative values are counterexamples.
    double worst_margin = 0.0;
    int grid_theta12 = 0;
    int grid_phi = 0;
    long cells_checked = 0;
    long boundary_cells = 0;
};

// Enumerates theta12 in (0, pi), phi in [0, 2pi) for K = 2 in the plane and
// checks the sign of L12 / L21 against cone membership. row_sink, when set,
// receives every cell.
ScanReport scan_conjecture_2d(int grid_phi, int grid_theta12,
                              const std::function<void(const ScanRow&)>& row_sink = {});

// K = 2 collinear saddle family: both students on the bisector direction of
// the teacher pair, with magnitude sum s satisfying
//   pi * s = h(angle(w1*, w2*)/2) * (|w1*| + |w2*|)
// split apportions s between the two students. The residual certificate holds
// when the two teacher norms are equal.
WeightSet collinear_saddle_k2(const Vec& w1_star, const Vec& w2_star, double split);

struct OrbitCheck {
    double residual_before = 0.0;
    double residual_after = 0.0;
};

// Applies a rotation fixing span(W_star) to W and compares gradient residuals;
// rotational invariance means they agree, so critical points come in orbits.
OrbitCheck orbit_invariance_check(const WeightSet& W, const WeightSet& W_star, double plane_angle);

// ---- small dense solver helpers (K x K) ----

struct LinearSolveResult {
    std::vector<double> x;
    double condition = 0.0;  // 1-norm condition estimate via explicit inverse
    bool singular = false;
};

LinearSolveResult solve_linear(const std::vector<std::vector<double>>& A, const std::vector<double>& b);

}  // namespace popgrad
