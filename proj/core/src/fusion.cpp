#include "ontotkge/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ontotkge/errors.hpp"

namespace onto {

FusionParams make_fusion(int64_t dim, SplitMix64& rng) {
    FusionParams params;
    params.w_local = xavier_uniform(dim, dim, rng);
    params.w_global = xavier_uniform(dim, dim, rng);
    params.bias = zeros(Shape{dim});
    return params;
}

Tensor fuse_gated(const FusionParams& params, const Tensor& h_local, const Tensor& z_global) {
    if (h_local.shape() != z_global.shape()) {
        throw ShapeError("fuse_gated: view shapes differ");
    }
    Tensor logits = add_rowvec(add(matmul(h_local, transpose(params.w_local)),
                                   matmul(z_global, transpose(params.w_global))),
                               params.bias);
    Tensor theta = sigmoid(logits);
    Tensor ones = full(theta.shape(), 1.0);
    return add(mul(theta, h_local), mul(sub(ones, theta), z_global));
}

Tensor fuse_sum(const Tensor& h_local, const Tensor& z_global) {
    return add(h_local, z_global);
}

ContrastiveResult contrastive_loss(const Tensor& z_global, const Tensor& h_local,
                                   const std::vector<uint32_t>& batch, double temperature) {
    if (!(temperature > 0.0)) throw DomainError("contrastive_loss: temperature must be positive");
    if (z_global.shape() != h_local.shape()) {
        throw ShapeError("contrastive_loss: view shapes differ");
    }
    ContrastiveResult result;
    int64_t cols = h_local.cols();
    const double* hdata = h_local.data();

    // Unique entities only: a duplicated entity would act as a false
    // negative for itself. Entities outside every subgraph (exact-zero local
    // row) cannot take part in a cosine and are dropped.
    std::set<uint32_t> unique(batch.begin(), batch.end());
    std::vector<int64_t> ids;
    for (uint32_t e : unique) {
        const double* row = hdata + static_cast<int64_t>(e) * cols;
        bool all_zero = std::all_of(row, row + cols, [](double v) { return v == 0.0; });
        if (all_zero) {
            ++result.dropped_zero_rows;
            continue;
        }
        ids.push_back(static_cast<int64_t>(e));
    }
    result.used = static_cast<int64_t>(ids.size());
    if (ids.size() < 2) {
        result.loss = scalar(0.0);
        result.skipped = true;
        return result;
    }

    Tensor zs = gather_rows(z_global, ids);
    Tensor hs = gather_rows(h_local, ids);
    Tensor zn = sqrt(row_sum(mul(zs, zs)));
    Tensor hn = sqrt(row_sum(mul(hs, hs)));
    for (int64_t i = 0; i < result.used; ++i) {
        if (zn.at(i) <= 1e-12 || hn.at(i) <= 1e-12) {
            throw DomainError("contrastive_loss: degenerate input (zero-norm row)");
        }
    }
    Tensor sims = scale(matmul(row_scale(zs, reciprocal(zn)),
                               transpose(row_scale(hs, reciprocal(hn)))),
                        1.0 / temperature);
    Tensor positives = diag_part(sims);
    Tensor negatives = row_logsumexp_offdiag(sims);
    result.loss = scale(sum_all(sub(positives, negatives)),
                        -1.0 / static_cast<double>(result.used));
    return result;
}

}  // namespace onto
