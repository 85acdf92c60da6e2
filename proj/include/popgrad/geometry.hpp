#pragma once

#include <cstddef>
#include <vector>

#include "popgrad/rng.hpp"

namespace popgrad {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major list of rows

// ---- basic vector helpers ----

double dot(const Vec& u, const Vec& v);
double norm(const Vec& v);
Vec scaled(const Vec& v, double c);
Vec add(const Vec& u, const Vec& v);
Vec sub(const Vec& u, const Vec& v);
void axpy(double a, const Vec& x, Vec& y);  // y += a*x
Vec normalized(const Vec& v);               // throws on zero norm

// Angle between u and v in [0, pi]. Cosine is clamped to [-1, 1] before acos,
// so parallel/antiparallel inputs land exactly on 0 / pi.
double angle(const Vec& u, const Vec& v);

// ---- weight sets ----

inline constexpr double kNormFloor = 1e-12;

// Ordered list of K weight vectors with cached norms. Construction rejects
// vectors whose norm is below kNormFloor: the population gradient is
// discontinuous at the origin, so we refuse to evaluate there.
struct WeightSet {
    std::vector<Vec> vectors;
    std::vector<double> norms;

    WeightSet() = default;
    explicit WeightSet(std::vector<Vec> vecs);

    int K() const { return static_cast<int>(vectors.size()); }
    int dim() const { return vectors.empty() ? 0 : static_cast<int>(vectors.front().size()); }
    Vec unit(int j) const;  // vectors[j] / norms[j]
};

using AngleMatrix = std::vector<std::vector<double>>;

// Theta[i][j] = angle(w_i, w_j); symmetric with zero diagonal.
AngleMatrix pair_angles(const WeightSet& W);
// ThetaStar[i][j] = angle(w_j, wstar_i): rows index teacher, columns student.
AngleMatrix cross_angles(const WeightSet& W, const WeightSet& W_star);

// ---- sample batches ----

enum class Distribution { gaussian, uniform_centered };

struct SampleBatch {
    std::vector<double> data;  // n * d, row-major
    int n = 0;
    int d = 0;
    Distribution distribution = Distribution::gaussian;
    RngSeed provenance;

    const double* row(int l) const { return data.data() + static_cast<std::size_t>(l) * d; }
};

SampleBatch gaussian_batch(int n, int d, RngSeed rng);
SampleBatch uniform_centered_batch(int n, int d, RngSeed rng);

// ---- orthogonal transforms ----

// Modified Gram-Schmidt with a re-orthogonalization pass. Returns an
// orthonormal basis of span(vecs); rank decided by pivot threshold 1e-10
// relative to the largest pivot.
std::vector<Vec> orthonormalize(const std::vector<Vec>& vecs);

// Orthogonal d x d matrix R with R b = b for every b in span(basis),
// rotating the first two directions of the orthogonal complement by
// plane_angle. Requires d >= K + 2 and a full-rank basis.
Mat rotation_fixing_subspace(const std::vector<Vec>& basis, int d, double plane_angle);

Vec mat_vec(const Mat& R, const Vec& v);

}  // namespace popgrad
