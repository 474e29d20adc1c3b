#pragma once

#include <cstdint>
#include <vector>

#include "ontotkge/rng.hpp"
#include "ontotkge/tensor.hpp"

namespace onto {

// Learned per-dimension gate blending the local and global entity views.
struct FusionParams {
    Tensor w_local;   // d x d, applied to the local view
    Tensor w_global;  // d x d, applied to the evolved global view
    Tensor bias;      // d
};

FusionParams make_fusion(int64_t dim, SplitMix64& rng);

// theta = sigmoid(H_l W_l^T + Z W_g^T + b) rowwise;
// returns theta*H_l + (1-theta)*Z, a rowwise convex combination.
Tensor fuse_gated(const FusionParams& params, const Tensor& h_local, const Tensor& z_global);

// Ablation variant: plain summation of the two views.
Tensor fuse_sum(const Tensor& h_local, const Tensor& z_global);

struct ContrastiveResult {
    Tensor loss;          // scalar; detached zero when skipped
    bool skipped = false; // fewer than two usable entities
    int64_t used = 0;     // entities that entered the loss
    int64_t dropped_zero_rows = 0;
};

// In-batch contrastive alignment of the two views over the unique entities
// of `batch`: -(1/M) sum_u [ sim(z_u,h_u)/tau - log sum_{j != u} exp(sim(z_u,h_j)/tau) ],
// with cosine similarity. The denominator runs over the other entities only.
// Entities whose local row is exactly zero are dropped; a remaining
// zero-norm row is a degenerate-input error.
ContrastiveResult contrastive_loss(const Tensor& z_global, const Tensor& h_local,
                                   const std::vector<uint32_t>& batch, double temperature);

}  // namespace onto
