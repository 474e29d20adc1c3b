#pragma once

#include <cstdint>
#include <vector>

#include "ontotkge/rng.hpp"
#include "ontotkge/tensor.hpp"

namespace onto {

// Convolutional scoring decoder: the subject and relation embeddings are
// stacked as a 2 x d map, pushed through C same-padded 1-D convolutions,
// a leaky activation, and a flat projection back to R^d.
struct DecoderParams {
    Tensor kernels;  // C x 2 x w, odd w
    Tensor proj;     // (C*d) x d
    int64_t dim = 0;
};

DecoderParams make_decoder(int64_t dim, int64_t channels, int64_t width, SplitMix64& rng);

// Query vectors for a batch: subjects and relations are [B x d] (a single
// rank-1 pair is accepted too and returns rank-1).
Tensor decode(const DecoderParams& dec, const Tensor& subjects, const Tensor& relations);

// Raw dot-product scores of every entity against each query vector: [B x |E|].
Tensor raw_scores(const Tensor& entity_emb, const Tensor& queries);

// Reported likelihoods: sigmoid of the raw scores, in (0,1). Ranking by
// these equals ranking by the raw scores.
Tensor score_all(const DecoderParams& dec, const Tensor& entity_emb, const Tensor& subject,
                 const Tensor& relation);

// Task loss: mean softmax cross-entropy of the raw scores against the gold
// object per query row.
Tensor tkg_loss(const Tensor& raw, const std::vector<int64_t>& gold);

// L = L_tkg + alpha1 * L_hie + alpha2 * L_cl; every component must be finite.
Tensor total_loss(const Tensor& l_tkg, const Tensor& l_hie, const Tensor& l_cl, double alpha1,
                  double alpha2);

}  // namespace onto
