#include "popgrad/multilayer.hpp"

#include <cmath>
#include <stdexcept>

namespace popgrad {

LayeredNet::LayeredNet(std::vector<Mat> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("LayeredNet: at least one layer required");
    for (std::size_t c = 0; c < layers_.size(); ++c) {
        const Mat& W = layers_[c];
        if (W.empty() || W.front().empty()) throw std::invalid_argument("LayeredNet: empty layer");
        const std::size_t fan_out = W.front().size();
        for (const Vec& row : W) {
            if (row.size() != fan_out) throw std::invalid_argument("LayeredNet: ragged layer matrix");
            for (double v : row) {
                if (!std::isfinite(v)) throw std::invalid_argument("LayeredNet: non-finite weight");
            }
        }
        if (c + 1 < layers_.size() && layers_[c + 1].size() != fan_out) {
            throw std::invalid_argument("LayeredNet: incompatible consecutive layer dimensions");
        }
    }
}

ForwardPass forward(const LayeredNet& net, const SampleBatch& X) {
    if (X.d != net.input_dim()) throw std::invalid_argument("forward: input dimension mismatch");
    const int L = net.depth();
    const int n = X.n;
    ForwardPass fp;
    fp.inputs.resize(L);
    fp.activations.resize(L);
    fp.gates.resize(L);
    fp.inputs[0].assign(n, Vec(X.d));
    for (int l = 0; l < n; ++l) {
        const double* x = X.row(l);
        for (int i = 0; i < X.d; ++i) fp.inputs[0][l][i] = x[i];
    }
    for (int c = 0; c < L; ++c) {
        const Mat& W = net.layer(c);
        const int fan_in = static_cast<int>(W.size());
        const int fan_out = net.width(c);
        fp.activations[c].assign(n, Vec(fan_out, 0.0));
        fp.gates[c].assign(n, Vec(fan_out, 0.0));
        for (int l = 0; l < n; ++l) {
            const Vec& in = fp.inputs[c][l];
            for (int j = 0; j < fan_out; ++j) {
                double pre = 0.0;
                for (int i = 0; i < fan_in; ++i) pre += in[i] * W[i][j];
                if (pre > 0.0) {
                    fp.activations[c][l][j] = pre;
                    fp.gates[c][l][j] = 1.0;
                }
            }
        }
        if (c + 1 < L) fp.inputs[c + 1] = fp.activations[c];
    }
    fp.output.assign(n, 0.0);
    const int top = L - 1;
    for (int l = 0; l < n; ++l) {
        for (double u : fp.activations[top][l]) fp.output[l] += u;
    }
    return fp;
}

std::vector<Mat> inflow_diagonals(const LayeredNet& net, const ForwardPass& fp) {
    const int L = net.depth();
    const int n = static_cast<int>(fp.output.size());
    std::vector<Mat> Q(L);
    Q[L - 1].assign(n, Vec(net.width(L - 1), 1.0));  // identity at the top
    for (int c = L - 1; c > 0; --c) {
        const Mat& W = net.layer(c);  // width(c-1) x width(c)
        const int below = net.width(c - 1);
        const int above = net.width(c);
        Q[c - 1].assign(n, Vec(below, 0.0));
        for (int l = 0; l < n; ++l) {
            for (int k = 0; k < below; ++k) {
                double acc = 0.0;
                for (int j = 0; j < above; ++j) {
                    acc += W[k][j] * fp.gates[c][l][j] * Q[c][l][j];
                }
                Q[c - 1][l][k] = acc;
            }
        }
    }
    return Q;
}

namespace {

void check_same_architecture(const LayeredNet& a, const LayeredNet& b) {
    if (a.depth() != b.depth() || a.input_dim() != b.input_dim()) {
        throw std::domain_error("gradient_inflow: architecture mismatch");
    }
    for (int c = 0; c < a.depth(); ++c) {
        if (a.width(c) != b.width(c)) throw std::domain_error("gradient_inflow: architecture mismatch");
    }
}

}  // namespace

std::vector<Mat> gradient_inflow(const LayeredNet& student, const LayeredNet& teacher,
                                 const SampleBatch& X) {
    check_same_architecture(student, teacher);
    const ForwardPass fp = forward(student, X);
    const ForwardPass fp_star = forward(teacher, X);
    const std::vector<Mat> Q = inflow_diagonals(student, fp);
    const int L = student.depth();
    const int n = X.n;
    Vec residual(n);
    for (int l = 0; l < n; ++l) residual[l] = fp.output[l] - fp_star.output[l];
    std::vector<Mat> grads(L);
    for (int c = 0; c < L; ++c) {
        const int fan_in = static_cast<int>(student.layer(c).size());
        const int fan_out = student.width(c);
        grads[c].assign(fan_in, Vec(fan_out, 0.0));
        for (int l = 0; l < n; ++l) {
            const Vec& in = fp.inputs[c][l];
            for (int j = 0; j < fan_out; ++j) {
                const double scale = fp.gates[c][l][j] * Q[c][l][j] * residual[l];
                if (scale == 0.0) continue;
                for (int i = 0; i < fan_in; ++i) grads[c][i][j] += scale * in[i];
            }
        }
        for (Vec& row : grads[c]) {
            for (double& v : row) v /= n;
        }
    }
    return grads;
}

double layered_loss(const LayeredNet& student, const LayeredNet& teacher, const SampleBatch& X) {
    check_same_architecture(student, teacher);
    const ForwardPass fp = forward(student, X);
    const ForwardPass fp_star = forward(teacher, X);
    double loss = 0.0;
    for (int l = 0; l < X.n; ++l) {
        const double r = fp.output[l] - fp_star.output[l];
        loss += 0.5 * r * r;
    }
    return loss / X.n;
}

}  // namespace popgrad
