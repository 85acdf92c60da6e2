#pragma once

#include <vector>

#include "popgrad/geometry.hpp"

namespace popgrad {

// Deep ReLU network as a stack of weight matrices, bottom layer first.
// layers[c] has shape fan_in x fan_out; the scalar network output is the sum
// of the top layer's ReLU activations. Gradients come from the top-down
// diagonal inflow recursion
//   Q_j = I at the top,   Q_k = sum_{j above k} w_{jk} D_j Q_j,
//   grad w_j = (1/n) X_c^T (D_j o Q_j o (g - g*)),
// with every diagonal stored as a length-n vector.
class LayeredNet {
  public:
    explicit LayeredNet(std::vector<Mat> layers);

    int depth() const { return static_cast<int>(layers_.size()); }
    int input_dim() const { return static_cast<int>(layers_.front().size()); }
    int width(int c) const { return static_cast<int>(layers_[c].front().size()); }
    const Mat& layer(int c) const { return layers_[c]; }
    Mat& layer(int c) { return layers_[c]; }

  private:
    std::vector<Mat> layers_;
};

struct ForwardPass {
    // inputs[c] is the n x fan_in data seen by layer c (inputs[0] = X);
    // activations[c] and gates[c] are n x fan_out, gates in {0, 1}.
    std::vector<Mat> inputs;
    std::vector<Mat> activations;
    std::vector<Mat> gates;
    Vec output;  // length n, row-sum of the top activations
};

ForwardPass forward(const LayeredNet& net, const SampleBatch& X);

// Per-node inflow diagonals Q: result[c] is n x width(c).
std::vector<Mat> inflow_diagonals(const LayeredNet& net, const ForwardPass& fp);

// Per-layer gradient matrices, same shapes as the weights.
std::vector<Mat> gradient_inflow(const LayeredNet& student, const LayeredNet& teacher,
                                 const SampleBatch& X);

// (1/2n) sum_l (g(x_l) - g*(x_l))^2, the finite-difference oracle target.
double layered_loss(const LayeredNet& student, const LayeredNet& teacher, const SampleBatch& X);

}  // namespace popgrad
