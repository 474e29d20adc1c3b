#include "ontotkge/decoder.hpp"

#include <cmath>

#include "ontotkge/compgcn.hpp"

namespace onto {

DecoderParams make_decoder(int64_t dim, int64_t channels, int64_t width, SplitMix64& rng) {
    if (width % 2 == 0) throw ConfigError("decoder kernel width must be odd");
    DecoderParams dec;
    double bound = std::sqrt(6.0 / static_cast<double>(2 * width + channels * width));
    dec.kernels = uniform_init(Shape{channels, 2, width}, -bound, bound, rng);
    dec.proj = xavier_uniform(channels * dim, dim, rng);
    dec.dim = dim;
    return dec;
}

Tensor decode(const DecoderParams& dec, const Tensor& subjects, const Tensor& relations) {
    if (subjects.rank() == 1 && relations.rank() == 1) {
        Tensor s = reshape(subjects, Shape{1, subjects.shape()[0]});
        Tensor r = reshape(relations, Shape{1, relations.shape()[0]});
        return reshape(decode(dec, s, r), subjects.shape());
    }
    if (subjects.rank() != 2 || subjects.shape() != relations.shape() ||
        subjects.cols() != dec.dim) {
        throw ShapeError("decode: subject/relation batches must be [B x d] with d = " +
                         std::to_string(dec.dim));
    }
    Tensor features = leaky_relu(conv1d_pair(subjects, relations, dec.kernels), kLeakySlope);
    return matmul(features, dec.proj);
}

Tensor raw_scores(const Tensor& entity_emb, const Tensor& queries) {
    return matmul(queries, transpose(entity_emb));
}

Tensor score_all(const DecoderParams& dec, const Tensor& entity_emb, const Tensor& subject,
                 const Tensor& relation) {
    Tensor s = subject.rank() == 1 ? reshape(subject, Shape{1, subject.shape()[0]}) : subject;
    Tensor r = relation.rank() == 1 ? reshape(relation, Shape{1, relation.shape()[0]}) : relation;
    Tensor raw = raw_scores(entity_emb, decode(dec, s, r));
    Tensor scores = sigmoid(raw);
    if (subject.rank() == 1) return reshape(scores, Shape{entity_emb.rows()});
    return scores;
}

Tensor tkg_loss(const Tensor& raw, const std::vector<int64_t>& gold) {
    return softmax_cross_entropy(raw, gold);
}

Tensor total_loss(const Tensor& l_tkg, const Tensor& l_hie, const Tensor& l_cl, double alpha1,
                  double alpha2) {
    for (const Tensor* t : {&l_tkg, &l_hie, &l_cl}) {
        if (t->defined() && !std::isfinite(t->value())) {
            throw NumericError("total_loss: non-finite component");
        }
    }
    Tensor total = l_tkg;
    if (alpha1 != 0.0 && l_hie.defined()) total = add(total, scale(l_hie, alpha1));
    if (alpha2 != 0.0 && l_cl.defined()) total = add(total, scale(l_cl, alpha2));
    return total;
}

}  // namespace onto
