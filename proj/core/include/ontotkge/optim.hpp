#pragma once

#include <cstdint>
#include <vector>

#include "ontotkge/tensor.hpp"

namespace onto {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip = 1.0;  // global gradient-norm clip; <= 0 disables
};

// Adam with bias correction and global-norm gradient clipping. Moment
// buffers are keyed by parameter position, so the parameter list must stay
// in a fixed order across steps.
class Adam {
public:
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads);

    int64_t steps_taken() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    int64_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace onto
