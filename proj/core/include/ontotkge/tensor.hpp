#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ontotkge/errors.hpp"
#include "ontotkge/rng.hpp"

namespace onto {

class Tape;

namespace detail {
struct TensorAccess;
}

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major f64 tensor. A tensor is either detached (plain value) or
// recorded on a Tape, in which case every op consuming it appends a node so
// reverse-mode gradients can be pulled out later. Detached tensors flowing
// through an op are treated as constants.
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
    int64_t numel() const { return data_ ? static_cast<int64_t>(data_->size()) : 0; }

    int64_t rows() const;  // rank-2 only
    int64_t cols() const;

    const double* data() const { return data_->data(); }
    double* data() { return data_->data(); }
    const std::vector<double>& vec() const { return *data_; }
    std::vector<double>& vec() { return *data_; }

    double value() const;                       // numel()==1 accessor
    double at(int64_t i) const;                 // flat index
    double at(int64_t r, int64_t c) const;      // rank-2 index
    void set(int64_t i, double v) { (*data_)[i] = v; }

    bool defined() const { return static_cast<bool>(data_); }
    bool recorded() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    int64_t node() const { return node_; }

    Tensor clone() const;      // deep copy, detached
    Tensor detached() const;   // shares the buffer, drops the tape handle
    void detach_() { tape_ = nullptr; node_ = -1; }

private:
    std::shared_ptr<std::vector<double>> data_;
    Shape shape_;
    Tape* tape_ = nullptr;
    int64_t node_ = -1;

    friend class Tape;
    friend struct detail::TensorAccess;
};

// Construction helpers.
Tensor zeros(Shape shape);
Tensor full(Shape shape, double v);
Tensor scalar(double v);                                        // rank-0
Tensor vector_of(std::vector<double> v);                        // rank-1
Tensor matrix_of(int64_t rows, int64_t cols, std::vector<double> v);
Tensor uniform_init(Shape shape, double lo, double hi, SplitMix64& rng);
Tensor xavier_uniform(int64_t rows, int64_t cols, SplitMix64& rng);

// Records every op applied to watched tensors and replays them in reverse
// to accumulate gradients. One tape serves one training step; backward may
// run once per tape.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Registers t as a leaf on this tape (in place).
    void watch(Tensor& t);

    // Seeds d(loss)/d(loss)=1 and sweeps the recorded nodes in reverse
    // topological order. loss must be a single-element tensor recorded on
    // this tape; a second call without re-recording throws.
    void backward(const Tensor& loss);

    // Gradient of the last backward() w.r.t. t (zeros if the loss never
    // touched it). t must be recorded on this tape.
    Tensor grad(const Tensor& t) const;

    int64_t node_count() const { return static_cast<int64_t>(nodes_.size()); }
    bool consumed() const { return used_; }

    // --- internals used by the op implementations ---
    using BackFn = std::function<void(Tape&, const std::vector<double>& gout)>;
    int64_t emit(const Shape& shape, BackFn back);
    std::vector<double>& grad_buf(int64_t id);
    const std::vector<double>* grad_if_any(int64_t id) const;

private:
    struct Node {
        Shape shape;
        BackFn back;  // null for leaves
    };
    std::vector<Node> nodes_;
    std::vector<std::vector<double>> grads_;
    bool used_ = false;
};

// RAII helper: watches a set of parameters on construction and detaches
// them again on scope exit, so the same long-lived tensors can be reused
// across steps and served detached to the evaluator.
class ParamScope {
public:
    ParamScope(Tape& tape, std::vector<Tensor*> params);
    ~ParamScope();
    ParamScope(const ParamScope&) = delete;
    ParamScope& operator=(const ParamScope&) = delete;

private:
    std::vector<Tensor*> params_;
};

// ---------------------------------------------------------------------------
// Primitive ops. All differentiable; all validate shapes and reject
// non-finite forward results.
// ---------------------------------------------------------------------------

// Elementwise, equal shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double c);
Tensor add_const(const Tensor& a, double c);

// Elementwise unary.
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);          // domain error for x <= 0
Tensor sqrt(const Tensor& a);         // domain error for x < 0
Tensor reciprocal(const Tensor& a);   // domain error for x == 0
Tensor leaky_relu(const Tensor& a, double slope);
Tensor relu(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);  // zero gradient outside [lo,hi]
Tensor acos(const Tensor& a);         // inputs must lie in [-1,1]
Tensor asin(const Tensor& a);

// Structure.
Tensor reshape(const Tensor& a, Shape shape);
Tensor transpose(const Tensor& a);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor sum_all(const Tensor& a);      // rank-0
Tensor row_sum(const Tensor& a);      // [m x n] -> [m]
Tensor gather_rows(const Tensor& m, const std::vector<int64_t>& idx);
Tensor scatter_add_rows(const Tensor& src, const std::vector<int64_t>& idx, int64_t out_rows);
Tensor scatter_rows_replace(const Tensor& base, const std::vector<int64_t>& idx, const Tensor& rows);
Tensor scale_rows(const Tensor& m, const std::vector<double>& factors);  // constant factors
Tensor row_scale(const Tensor& m, const Tensor& v);   // out[i,:] = m[i,:] * v[i]
Tensor add_rowvec(const Tensor& m, const Tensor& v);  // out[i,:] = m[i,:] + v

// Circular correlation out[k] = sum_i a[i] * b[(i+k) mod d]. Accepts a pair
// of equal-length vectors or a pair of [m x d] matrices (applied rowwise).
// Computed directly in O(d^2).
Tensor circular_correlation(const Tensor& a, const Tensor& b);

// 1-D convolution over a two-row stack. a and b are [B x d]; kernels is
// [C x 2 x w] with odd w; zero padding keeps the length at d. Output is the
// flattened feature map [B x C*d], laid out channel-major. Cross-correlation
// convention (no kernel flip).
Tensor conv1d_pair(const Tensor& a, const Tensor& b, const Tensor& kernels);

Tensor diag_part(const Tensor& m);              // [n x n] -> [n]
Tensor row_logsumexp_offdiag(const Tensor& m);  // [n x n] -> [n], n >= 2

// Mean over rows of (logsumexp(row) - row[gold]); the standard softmax
// cross-entropy with integer labels. Stable via max-shift.
Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int64_t>& gold);

// a.b / (|a||b|), rank-1 inputs. Degenerate-input error when either norm
// is <= 1e-12.
Tensor cosine_sim(const Tensor& a, const Tensor& b);

}  // namespace onto
