#include "ontotkge/optim.hpp"

#include <cmath>

namespace onto {

void Adam::step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size()) {
        throw Error("Adam::step: parameter/gradient count mismatch");
    }
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(static_cast<size_t>(params[i]->numel()), 0.0);
            v_[i].assign(static_cast<size_t>(params[i]->numel()), 0.0);
        }
    }

    double sq_norm = 0.0;
    for (const Tensor& g : grads) {
        for (double x : g.vec()) sq_norm += x * x;
    }
    double gscale = 1.0;
    if (cfg_.clip > 0.0) {
        double norm = std::sqrt(sq_norm);
        if (norm > cfg_.clip) gscale = cfg_.clip / norm;
    }

    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
        auto& value = params[i]->vec();
        const auto& grad = grads[i].vec();
        if (value.size() != grad.size() || value.size() != m_[i].size()) {
            throw Error("Adam::step: parameter shape changed between steps");
        }
        for (size_t j = 0; j < value.size(); ++j) {
            double g = grad[j] * gscale;
            m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g;
            v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g * g;
            double mhat = m_[i][j] / bc1;
            double vhat = v_[i][j] / bc2;
            value[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace onto
