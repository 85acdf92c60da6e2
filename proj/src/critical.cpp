#include "popgrad/critical.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "popgrad/analytic.hpp"

namespace popgrad {

double h(double theta) {
    if (theta < 0.0 || theta > M_PI) throw std::domain_error("h: theta outside [0, pi]");
    return (M_PI - theta) * std::cos(theta) + std::sin(theta);
}

namespace {

// Gauss-Jordan inverse with partial pivoting; K stays small here.
bool invert(std::vector<std::vector<double>> A, std::vector<std::vector<double>>& inv) {
    const int n = static_cast<int>(A.size());
    inv.assign(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        }
        if (std::abs(A[piv][col]) < 1e-300) return false;
        std::swap(A[piv], A[col]);
        std::swap(inv[piv], inv[col]);
        const double p = A[col][col];
        for (int c = 0; c < n; ++c) {
            A[col][c] /= p;
            inv[col][c] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = A[r][col];
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) {
                A[r][c] -= f * A[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return true;
}

double norm1(const std::vector<std::vector<double>>& A) {
    double best = 0.0;
    for (std::size_t c = 0; c < A.size(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < A.size(); ++r) s += std::abs(A[r][c]);
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

LinearSolveResult solve_linear(const std::vector<std::vector<double>>& A, const std::vector<double>& b) {
    LinearSolveResult res;
    std::vector<std::vector<double>> inv;
    if (!invert(A, inv)) {
        res.singular = true;
        res.condition = std::numeric_limits<double>::infinity();
        return res;
    }
    res.condition = norm1(A) * norm1(inv);
    res.singular = res.condition > kSingularCondition;
    const int n = static_cast<int>(A.size());
    res.x.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) res.x[i] += inv[i][j] * b[j];
    }
    return res;
}

NormalSystem assemble_normal_system(const WeightSet& W, const WeightSet& W_star) {
    if (W.K() != W_star.K() || W.dim() != W_star.dim()) {
        throw std::invalid_argument("assemble_normal_system: shape mismatch");
    }
    const int K = W.K();
    NormalSystem sys;
    sys.K = K;
    sys.Theta = pair_angles(W);
    sys.Theta_star = cross_angles(W, W_star);
    sys.M.assign(K * K, std::vector<double>(K, 0.0));
    sys.M_star.assign(K * K, std::vector<double>(K, 0.0));
    sys.Mr.assign(K, std::vector<double>(K, 0.0));
    sys.Mr_star.assign(K, std::vector<double>(K, 0.0));
    for (int j = 0; j < K; ++j) {
        for (int jp = 0; jp < K; ++jp) {
            const int row = j * K + jp;
            const double cos_jjp = std::cos(sys.Theta[j][jp]);
            for (int k = 0; k < K; ++k) {
                sys.M[row][k] = (M_PI - sys.Theta[k][j]) * std::cos(sys.Theta[k][jp]) +
                                std::sin(sys.Theta[k][j]) * cos_jjp;
                sys.M_star[row][k] = (M_PI - sys.Theta_star[k][j]) * std::cos(sys.Theta_star[k][jp]) +
                                     std::sin(sys.Theta_star[k][j]) * cos_jjp;
            }
        }
        for (int k = 0; k < K; ++k) {
            sys.Mr[j][k] = h(sys.Theta[k][j]);
            sys.Mr_star[j][k] = h(sys.Theta_star[k][j]);
        }
    }
    return sys;
}

ReducedSolution solve_reduced_magnitudes(const NormalSystem& sys, const std::vector<double>& wbar_star) {
    if (static_cast<int>(wbar_star.size()) != sys.K) {
        throw std::invalid_argument("solve_reduced_magnitudes: wbar_star length mismatch");
    }
    for (double v : wbar_star) {
        if (v <= 0.0) throw std::invalid_argument("solve_reduced_magnitudes: wbar_star must be positive");
    }
    std::vector<double> rhs(sys.K, 0.0);
    for (int j = 0; j < sys.K; ++j) {
        for (int k = 0; k < sys.K; ++k) rhs[j] += sys.Mr_star[j][k] * wbar_star[k];
    }
    LinearSolveResult lin = solve_linear(sys.Mr, rhs);
    ReducedSolution out;
    out.condition = lin.condition;
    out.singular = lin.singular;
    if (!lin.singular) {
        out.magnitudes = lin.x;
        out.all_positive = true;
        for (double m : lin.x) {
            if (m <= 0.0) out.all_positive = false;
        }
    }
    return out;
}

double grad_norm_residual(const WeightSet& W, const WeightSet& W_star) {
    double worst = 0.0;
    for (const Vec& g : multi_relu_grad(W, W_star)) worst = std::max(worst, norm(g));
    return worst;
}

double L_function(int j, int j_prime, const Vec& e_star, const std::vector<Vec>& E,
                  const AngleMatrix& Theta) {
    const int K = static_cast<int>(E.size());
    if (j < 0 || j >= K || j_prime < 0 || j_prime >= K) throw std::invalid_argument("L_function: bad index");
    std::vector<double> theta_star(K);
    for (int l = 0; l < K; ++l) theta_star[l] = angle(e_star, E[l]);
    std::vector<std::vector<double>> Mr(K, std::vector<double>(K, 0.0));
    std::vector<double> m(K), v(K);
    const double cos_jjp = std::cos(Theta[j][j_prime]);
    for (int l = 0; l < K; ++l) {
        v[l] = h(theta_star[l]);
        m[l] = (M_PI - Theta[l][j]) * std::cos(Theta[l][j_prime]) + std::sin(Theta[l][j]) * cos_jjp;
        for (int k = 0; k < K; ++k) Mr[l][k] = h(Theta[k][l]);
    }
    const double m_star = (M_PI - theta_star[j]) * std::cos(theta_star[j_prime]) +
                          std::sin(theta_star[j]) * cos_jjp;
    LinearSolveResult lin = solve_linear(Mr, m);
    if (lin.singular) throw std::domain_error("L_function: singular Mr");
    double acc = 0.0;
    for (int l = 0; l < K; ++l) acc += v[l] * lin.x[l];
    return m_star - acc;
}

ConeClassification cone_membership_2d(const Vec& e_star, const Vec& e1, const Vec& e2) {
    const double g11 = dot(e1, e1), g12 = dot(e1, e2), g22 = dot(e2, e2);
    const double det = g11 * g22 - g12 * g12;
    if (det < 1e-18 * g11 * g22 || det <= 0.0) {
        throw std::domain_error("cone_membership_2d: e1, e2 collinear");
    }
    const double b1 = dot(e1, e_star), b2 = dot(e2, e_star);
    const double c1 = (g22 * b1 - g12 * b2) / det;
    const double c2 = (g11 * b2 - g12 * b1) / det;
    Vec proj = scaled(e1, c1);
    axpy(c2, e2, proj);
    if (norm(sub(e_star, proj)) > 1e-9) {
        throw std::domain_error("cone_membership_2d: e_star out of span(e1, e2)");
    }
    ConeClassification out;
    out.margin = std::min(c1, c2);
    if (std::abs(out.margin) <= kConeBoundaryBand) {
        out.label = ConeClassification::Label::boundary;
    } else if (out.margin > 0.0) {
        out.label = ConeClassification::Label::interior;
    } else {
        out.label = ConeClassification::Label::exterior;
    }
    return out;
}

ScanReport scan_conjecture_2d(int grid_phi, int grid_theta12,
                              const std::function<void(const ScanRow&)>& row_sink) {
    if (grid_phi < 10 || grid_theta12 < 10) {
        throw std::invalid_argument("scan_conjecture_2d: grids must be >= 10");
    }
    ScanReport rep;
    rep.grid_phi = grid_phi;
    rep.grid_theta12 = grid_theta12;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (int ti = 0; ti < grid_theta12; ++ti) {
        const double t = M_PI * (ti + 1) / (grid_theta12 + 1);  // open (0, pi)
        const Vec e1{1.0, 0.0};
        const Vec e2{std::cos(t), std::sin(t)};
        const std::vector<Vec> E{e1, e2};
        const AngleMatrix Theta{{0.0, t}, {t, 0.0}};
        for (int pi_ = 0; pi_ < grid_phi; ++pi_) {
            const double phi = 2.0 * M_PI * pi_ / grid_phi;
            const Vec e_star{std::cos(phi), std::sin(phi)};
            const ConeClassification cone = cone_membership_2d(e_star, e1, e2);
            const double L12 = L_function(0, 1, e_star, E, Theta);
            const double L21 = L_function(1, 0, e_star, E, Theta);
            if (row_sink) row_sink(ScanRow{t, phi, L12, L21, cone.label});
            if (cone.label == ConeClassification::Label::boundary) {
                ++rep.boundary_cells;
                continue;
            }
            const double agreement = cone.label == ConeClassification::Label::interior
                                         ? std::min(L12, L21)
                                         : std::min(-L12, -L21);
            ++rep.cells_checked;
            rep.worst_margin = std::min(rep.worst_margin, agreement);
            if (agreement < 0.0) ++rep.counterexamples;
        }
    }
    return rep;
}

WeightSet collinear_saddle_k2(const Vec& w1_star, const Vec& w2_star, double split) {
    if (split <= 0.0 || split >= 1.0) throw std::invalid_argument("collinear_saddle_k2: split in (0,1)");
    const double theta_star = angle(w1_star, w2_star);
    if (theta_star < 1e-12 || theta_star > M_PI - 1e-12) {
        throw std::invalid_argument("collinear_saddle_k2: teacher vectors must be independent");
    }
    const Vec bisector = normalized(add(normalized(w1_star), normalized(w2_star)));
    const double s = h(theta_star / 2.0) * (norm(w1_star) + norm(w2_star)) / M_PI;
    return WeightSet({scaled(bisector, split * s), scaled(bisector, (1.0 - split) * s)});
}

OrbitCheck orbit_invariance_check(const WeightSet& W, const WeightSet& W_star, double plane_angle) {
    const Mat R = rotation_fixing_subspace(W_star.vectors, W.dim(), plane_angle);
    std::vector<Vec> rotated;
    rotated.reserve(W.K());
    for (const Vec& w : W.vectors) rotated.push_back(mat_vec(R, w));
    OrbitCheck out;
    out.residual_before = grad_norm_residual(W, W_star);
    out.residual_after = grad_norm_residual(WeightSet(rotated), W_star);
    return out;
}

}  // namespace popgrad
