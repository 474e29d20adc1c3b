#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ontotkge/rng.hpp"
#include "ontotkge/tensor.hpp"

namespace onto::selfcheck {

// One randomized check instance: detached input tensors plus a loss closure
// that may be invoked repeatedly (recorded or detached) on those inputs.
struct Instance {
    std::vector<Tensor> params;
    std::function<Tensor(std::vector<Tensor>&)> loss;
};

struct CheckResult {
    std::string name;
    int instances = 0;
    double max_rel_err = 0;
    bool pass = false;
};

// Compares reverse-mode gradients against central finite differences
// (forward evaluations only, so the oracle is independent of the backward
// pass). Relative error is measured in L2 over all parameter components of
// an instance.
CheckResult check_gradients(const std::string& name,
                            const std::function<Instance(SplitMix64&)>& make_instance,
                            int instances, uint64_t seed, double h = 1e-6, double tol = 1e-4);

// Finite-difference/analytic comparison for every differentiable operation
// family: primitive ops, the composition ops, the graph-convolution layer
// and stack, the recurrent evolution, the cone losses (off the hinge), the
// gated fusion, the contrastive loss and the decoder.
std::vector<CheckResult> gradient_suite(int instances_per_check, uint64_t seed);

// Gradient suite plus a handful of forward invariants; prints one line per
// check, returns overall success.
bool run_selfcheck(std::ostream& out, int instances_per_check = 20, uint64_t seed = 42);

}  // namespace onto::selfcheck
