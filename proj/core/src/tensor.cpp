#include "ontotkge/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace onto {

namespace {

constexpr double kDerivGuard = 1e-24;  // keeps 1/sqrt(1-x^2) finite at |x|=1

void check_finite(const std::vector<double>& data, const char* op) {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite value produced by op '") + op + "'");
        }
    }
}

Tape* joint_tape(std::initializer_list<const Tensor*> ts) {
    Tape* tape = nullptr;
    for (const Tensor* t : ts) {
        if (!t->recorded()) continue;
        if (tape && tape != t->tape()) {
            throw Error("operands recorded on different tapes");
        }
        tape = t->tape();
    }
    return tape;
}

}  // namespace

namespace detail {
struct TensorAccess {
    static Tensor make(Shape shape, std::vector<double> data, Tape* tape, Tape::BackFn back) {
        Tensor out(std::move(shape), std::move(data));
        if (tape) {
            attach(out, tape, tape->emit(out.shape(), std::move(back)));
        }
        return out;
    }
    static void attach(Tensor& t, Tape* tape, int64_t node) {
        t.tape_ = tape;
        t.node_ = node;
    }
};
}  // namespace detail

namespace {
using detail::TensorAccess;
}  // namespace

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

int64_t shape_numel(const Shape& shape) {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : data_(std::make_shared<std::vector<double>>(std::move(data))), shape_(std::move(shape)) {
    if (shape_numel(shape_) != static_cast<int64_t>(data_->size())) {
        throw ShapeError("tensor data size " + std::to_string(data_->size()) +
                         " does not match shape " + shape_str(shape_));
    }
}

int64_t Tensor::rows() const {
    if (rank() != 2) throw ShapeError("rows() on non-matrix " + shape_str(shape_));
    return shape_[0];
}

int64_t Tensor::cols() const {
    if (rank() != 2) throw ShapeError("cols() on non-matrix " + shape_str(shape_));
    return shape_[1];
}

double Tensor::value() const {
    if (numel() != 1) throw ShapeError("value() on tensor with numel " + std::to_string(numel()));
    return (*data_)[0];
}

double Tensor::at(int64_t i) const { return (*data_)[static_cast<size_t>(i)]; }

double Tensor::at(int64_t r, int64_t c) const {
    return (*data_)[static_cast<size_t>(r * cols() + c)];
}

Tensor Tensor::clone() const {
    if (!defined()) return Tensor();
    return Tensor(shape_, *data_);
}

Tensor Tensor::detached() const {
    Tensor t = *this;
    t.detach_();
    return t;
}

Tensor zeros(Shape shape) {
    int64_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
}

Tensor full(Shape shape, double v) {
    int64_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), v));
}

Tensor scalar(double v) { return Tensor(Shape{}, {v}); }

Tensor vector_of(std::vector<double> v) {
    int64_t n = static_cast<int64_t>(v.size());
    return Tensor(Shape{n}, std::move(v));
}

Tensor matrix_of(int64_t rows, int64_t cols, std::vector<double> v) {
    return Tensor(Shape{rows, cols}, std::move(v));
}

Tensor uniform_init(Shape shape, double lo, double hi, SplitMix64& rng) {
    int64_t n = shape_numel(shape);
    std::vector<double> data(static_cast<size_t>(n));
    for (double& x : data) x = rng.uniform(lo, hi);
    return Tensor(std::move(shape), std::move(data));
}

Tensor xavier_uniform(int64_t rows, int64_t cols, SplitMix64& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    return uniform_init(Shape{rows, cols}, -bound, bound, rng);
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

void Tape::watch(Tensor& t) {
    if (!t.defined()) throw Error("watch() on undefined tensor");
    if (t.recorded()) throw Error("tensor is already recorded on a tape");
    TensorAccess::attach(t, this, emit(t.shape(), nullptr));
}

int64_t Tape::emit(const Shape& shape, BackFn back) {
    nodes_.push_back(Node{shape, std::move(back)});
    grads_.emplace_back();
    return static_cast<int64_t>(nodes_.size()) - 1;
}

std::vector<double>& Tape::grad_buf(int64_t id) {
    auto& buf = grads_[static_cast<size_t>(id)];
    if (buf.empty()) {
        buf.assign(static_cast<size_t>(shape_numel(nodes_[static_cast<size_t>(id)].shape)), 0.0);
    }
    return buf;
}

const std::vector<double>* Tape::grad_if_any(int64_t id) const {
    const auto& buf = grads_[static_cast<size_t>(id)];
    return buf.empty() ? nullptr : &buf;
}

void Tape::backward(const Tensor& loss) {
    if (used_) throw Error("backward() already called on this tape");
    if (!loss.recorded() || loss.tape() != this) {
        throw Error("loss is not recorded on this tape");
    }
    if (loss.numel() != 1) {
        throw ShapeError("backward() requires a scalar loss, got " + shape_str(loss.shape()));
    }
    used_ = true;
    grad_buf(loss.node())[0] = 1.0;
    for (int64_t id = static_cast<int64_t>(nodes_.size()) - 1; id >= 0; --id) {
        const Node& node = nodes_[static_cast<size_t>(id)];
        const auto* g = grad_if_any(id);
        if (!g || !node.back) continue;
        node.back(*this, *g);
    }
}

Tensor Tape::grad(const Tensor& t) const {
    if (!t.recorded() || t.tape() != this) {
        throw Error("grad() of a tensor not recorded on this tape");
    }
    const auto* buf = grad_if_any(t.node());
    if (!buf) return zeros(t.shape());
    return Tensor(t.shape(), *buf);
}

ParamScope::ParamScope(Tape& tape, std::vector<Tensor*> params) : params_(std::move(params)) {
    for (Tensor* p : params_) tape.watch(*p);
}

ParamScope::~ParamScope() {
    for (Tensor* p : params_) p->detach_();
}

// ---------------------------------------------------------------------------
// Op helpers
// ---------------------------------------------------------------------------

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
}

void accumulate(Tape& t, int64_t node, const std::vector<double>& contrib) {
    if (node < 0) return;
    auto& buf = t.grad_buf(node);
    for (size_t i = 0; i < contrib.size(); ++i) buf[i] += contrib[i];
}

// Elementwise binary op with per-element adjoints computed from saved inputs.
template <typename Fwd, typename BackA, typename BackB>
Tensor ew_binary(const char* name, const Tensor& a, const Tensor& b, Fwd fwd, BackA da,
                 BackB db) {
    require_same_shape(a, b, name);
    Tape* tape = joint_tape({&a, &b});
    const auto& av = a.vec();
    const auto& bv = b.vec();
    std::vector<double> out(av.size());
    for (size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i], bv[i]);
    check_finite(out, name);

    Tape::BackFn back;
    if (tape) {
        auto adata = a.vec();
        auto bdata = b.vec();
        int64_t na = a.recorded() ? a.node() : -1;
        int64_t nb = b.recorded() ? b.node() : -1;
        back = [adata = std::move(adata), bdata = std::move(bdata), na, nb, da,
                db](Tape& t, const std::vector<double>& g) {
            if (na >= 0) {
                auto& buf = t.grad_buf(na);
                for (size_t i = 0; i < g.size(); ++i) buf[i] += g[i] * da(adata[i], bdata[i]);
            }
            if (nb >= 0) {
                auto& buf = t.grad_buf(nb);
                for (size_t i = 0; i < g.size(); ++i) buf[i] += g[i] * db(adata[i], bdata[i]);
            }
        };
    }
    return TensorAccess::make(a.shape(), std::move(out), tape, std::move(back));
}

// Elementwise unary op; the adjoint sees the input value.
template <typename Fwd, typename Back>
Tensor ew_unary(const char* name, const Tensor& a, Fwd fwd, Back dfdx) {
    Tape* tape = joint_tape({&a});
    const auto& av = a.vec();
    std::vector<double> out(av.size());
    for (size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
    check_finite(out, name);

    Tape::BackFn back;
    if (tape) {
        auto adata = a.vec();
        int64_t na = a.node();
        back = [adata = std::move(adata), na, dfdx](Tape& t, const std::vector<double>& g) {
            auto& buf = t.grad_buf(na);
            for (size_t i = 0; i < g.size(); ++i) buf[i] += g[i] * dfdx(adata[i]);
        };
    }
    return TensorAccess::make(a.shape(), std::move(out), tape, std::move(back));
}

}  // namespace

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    return ew_binary(
        "add", a, b, [](double x, double y) { return x + y; },
        [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return ew_binary(
        "sub", a, b, [](double x, double y) { return x - y; },
        [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return ew_binary(
        "mul", a, b, [](double x, double y) { return x * y; },
        [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
    for (double y : b.vec()) {
        if (y == 0.0) throw DomainError("div: zero denominator");
    }
    return ew_binary(
        "div", a, b, [](double x, double y) { return x / y; },
        [](double, double y) { return 1.0 / y; },
        [](double x, double y) { return -x / (y * y); });
}

Tensor scale(const Tensor& a, double c) {
    return ew_unary(
        "scale", a, [c](double x) { return c * x; }, [c](double) { return c; });
}

Tensor add_const(const Tensor& a, double c) {
    return ew_unary(
        "add_const", a, [c](double x) { return x + c; }, [](double) { return 1.0; });
}

Tensor sigmoid(const Tensor& a) {
    return ew_unary(
        "sigmoid", a,
        [](double x) {
            if (x >= 0) {
                double e = std::exp(-x);
                return 1.0 / (1.0 + e);
            }
            double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double x) {
            double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
            return s * (1.0 - s);
        });
}

Tensor tanh(const Tensor& a) {
    return ew_unary(
        "tanh", a, [](double x) { return std::tanh(x); },
        [](double x) {
            double t = std::tanh(x);
            return 1.0 - t * t;
        });
}

Tensor exp(const Tensor& a) {
    return ew_unary(
        "exp", a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Tensor log(const Tensor& a) {
    for (double x : a.vec()) {
        if (x <= 0.0) throw DomainError("log: non-positive input");
    }
    return ew_unary(
        "log", a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Tensor sqrt(const Tensor& a) {
    for (double x : a.vec()) {
        if (x < 0.0) throw DomainError("sqrt: negative input");
    }
    return ew_unary(
        "sqrt", a, [](double x) { return std::sqrt(x); },
        [](double x) { return 0.5 / std::max(std::sqrt(x), 1e-150); });
}

Tensor reciprocal(const Tensor& a) {
    for (double x : a.vec()) {
        if (x == 0.0) throw DomainError("reciprocal: zero input");
    }
    return ew_unary(
        "reciprocal", a, [](double x) { return 1.0 / x; },
        [](double x) { return -1.0 / (x * x); });
}

Tensor leaky_relu(const Tensor& a, double slope) {
    return ew_unary(
        "leaky_relu", a, [slope](double x) { return x > 0 ? x : slope * x; },
        [slope](double x) { return x > 0 ? 1.0 : slope; });
}

Tensor relu(const Tensor& a) { return leaky_relu(a, 0.0); }

Tensor clamp(const Tensor& a, double lo, double hi) {
    if (!(lo <= hi)) throw DomainError("clamp: lo > hi");
    return ew_unary(
        "clamp", a, [lo, hi](double x) { return std::min(std::max(x, lo), hi); },
        [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor acos(const Tensor& a) {
    for (double x : a.vec()) {
        if (x < -1.0 || x > 1.0) throw DomainError("acos: input outside [-1,1]");
    }
    return ew_unary(
        "acos", a, [](double x) { return std::acos(x); },
        [](double x) { return -1.0 / std::sqrt(std::max(1.0 - x * x, kDerivGuard)); });
}

Tensor asin(const Tensor& a) {
    for (double x : a.vec()) {
        if (x < -1.0 || x > 1.0) throw DomainError("asin: input outside [-1,1]");
    }
    return ew_unary(
        "asin", a, [](double x) { return std::asin(x); },
        [](double x) { return 1.0 / std::sqrt(std::max(1.0 - x * x, kDerivGuard)); });
}

// ---------------------------------------------------------------------------
// Structural ops
// ---------------------------------------------------------------------------

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel()) {
        throw ShapeError("reshape: numel mismatch " + shape_str(a.shape()) + " -> " +
                         shape_str(shape));
    }
    Tape* tape = joint_tape({&a});
    std::vector<double> out = a.vec();
    Tape::BackFn back;
    if (tape) {
        int64_t na = a.node();
        back = [na](Tape& t, const std::vector<double>& g) { accumulate(t, na, g); };
    }
    return TensorAccess::make(std::move(shape), std::move(out), tape, std::move(back));
}

Tensor transpose(const Tensor& a) {
    int64_t m = a.rows(), n = a.cols();
    Tape* tape = joint_tape({&a});
    std::vector<double> out(static_cast<size_t>(m * n));
    const auto& av = a.vec();
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) out[static_cast<size_t>(j * m + i)] = av[static_cast<size_t>(i * n + j)];
    Tape::BackFn back;
    if (tape) {
        int64_t na = a.node();
        back = [na, m, n](Tape& t, const std::vector<double>& g) {
            auto& buf = t.grad_buf(na);
            for (int64_t i = 0; i < m; ++i)
                for (int64_t j = 0; j < n; ++j)
                    buf[static_cast<size_t>(i * n + j)] += g[static_cast<size_t>(j * m + i)];
        };
    }
    return TensorAccess::make(Shape{n, m}, std::move(out), tape, std::move(back));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw ShapeError("matmul: rank-2 operands required, got " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
    }
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
    }
    int64_t m = a.rows(), k = a.cols(), n = b.cols();
    Tape* tape = joint_tape({&a, &b});
    const auto& av = a.vec();
    const auto& bv = b.vec();
    std::vector<double> out(static_cast<size_t>(m * n), 0.0);
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t p = 0; p < k; ++p) {
            double aip = av[static_cast<size_t>(i * k + p)];
            if (aip == 0.0) continue;
            const double* brow = &bv[static_cast<size_t>(p * n)];
            double* orow = &out[static_cast<size_t>(i * n)];
            for (int64_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
        }
    }
    check_finite(out, "matmul");

    Tape::BackFn back;
    if (tape) {
        auto adata = a.vec();
        auto bdata = b.vec();
        int64_t na = a.recorded() ? a.node() : -1;
        int64_t nb = b.recorded() ? b.node() : -1;
        back = [adata = std::move(adata), bdata = std::move(bdata), na, nb, m, k,
                n](Tape& t, const std::vector<double>& g) {
            if (na >= 0) {
                // dA = G . B^T
                auto& buf = t.grad_buf(na);
                for (int64_t i = 0; i < m; ++i)
                    for (int64_t p = 0; p < k; ++p) {
                        double s = 0.0;
                        for (int64_t j = 0; j < n; ++j)
                            s += g[static_cast<size_t>(i * n + j)] * bdata[static_cast<size_t>(p * n + j)];
                        buf[static_cast<size_t>(i * k + p)] += s;
                    }
            }
            if (nb >= 0) {
                // dB = A^T . G
                auto& buf = t.grad_buf(nb);
                for (int64_t p = 0; p < k; ++p)
                    for (int64_t j = 0; j < n; ++j) {
                        double s = 0.0;
                        for (int64_t i = 0; i < m; ++i)
                            s += adata[static_cast<size_t>(i * k + p)] * g[static_cast<size_t>(i * n + j)];
                        buf[static_cast<size_t>(p * n + j)] += s;
                    }
            }
        };
    }
    return TensorAccess::make(Shape{m, n}, std::move(out), tape, std::move(back));
}

Tensor sum_all(const Tensor& a) {
    Tape* tape = joint_tape({&a});
    double s = 0.0;
    for (double x : a.vec()) s += x;
    std::vector<double> out{s};
    check_finite(out, "sum_all");
    Tape::BackFn back;
    if (tape) {
        int64_t na = a.node();
        int64_t n = a.numel();
        back = [na, n](Tape& t, const std::vector<double>& g) {
            auto& buf = t.grad_buf(na);
            for (int64_t i = 0; i < n; ++i) buf[static_cast<size_t>(i)] += g[0];
        };
    }
    return TensorAccess::make(Shape{}, std::move(out), tape, std::move(back));
}

Tensor row_sum(const Tensor& a) {
    int64_t m = a.rows(), n = a.cols();
    Tape* tape = joint_tape({&a});
    const auto& av = a.vec();
    std::vector<double> out(static_cast<size_t>(m), 0.0);
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) out[static_cast<size_t>(i)] += av[static_cast<size_t>(i * n + j)];
    check_finite(out, "row_sum");
    Tape::BackFn back;
    if (tape) {
        int64_t na = a.node();
        back = [na, m, n](Tape& t, const std::vector<double>& g) {
            auto& buf = t.grad_buf(na);
            for (int64_t i = 0; i < m; ++i)
                for (int64_t j = 0; j < n; ++j) buf[static_cast<size_t>(i * n + j)] += g[static_cast<size_t>(i)];
        };
    }
    return TensorAccess::make(Shape{m}, std::move(out), tape, std::move(back));
}

Tensor gather_rows(const Tensor& m, const std::vector<int64_t>& idx) {
    int64_t rows = m.rows(), cols = m.cols();
    for (int64_t i : idx) {
        if (i < 0 || i >= rows) throw ShapeError("gather_rows: index out of range");
    }
    Tape* tape = joint_tape({&m});
    const auto& mv = m.vec();
    std::vector<double> out(idx.size() * static_cast<size_t>(cols));
    for (size_t p = 0; p < idx.size(); ++p) {
        std::copy_n(&mv[static_cast<size_t>(idx[p] * cols)], cols, &out[p * static_cast<size_t>(cols)]);
    }
    Tape::BackFn back;
    if (tape) {
        int64_t nm = m.node();
        auto index = idx;
        back = [nm, index = std::move(index), cols](Tape& t, const std::vector<double>& g) {
            auto& buf = t.grad_buf(nm);
            for (size_t p = 0; p < index.size(); ++p)
                for (int64_t j = 0; j < cols; ++j)
                    buf[static_cast<size_t>(index[p] * cols + j)] += g[p * static_cast<size_t>(cols) + static_cast<size_t>(j)];
        };
    }
    return TensorAccess::make(Shape{static_cast<int64_t>(idx.size()), cols}, std::move(out), tape,
                              std::move(back));
}

Tensor scatter_add_rows(const Tensor& src, const std::vector<int64_t>& idx, int64_t out_rows) {
    int64_t n = src.rows(), cols = src.cols();
    if (static_cast<int64_t>(idx.size()) != n) {
        throw ShapeError("scatter_add_rows: index count != source rows");
    }
    for (int64_t i : idx) {
        if (i < 0 || i >= out_rows) throw ShapeError("scatter_add_rows: index out of range");
    }
    Tape* tape = joint_tape({&src});
    const auto& sv = src.vec();
    std::vector<double> out(static_cast<size_t>(out_rows * cols), 0.0);
    for (int64_t p = 0; p < n; ++p)
        for (int64_t j = 0; j < cols; ++j)
            out[static_cast<size_t>(idx[static_cast<size_t>(p)] * cols + j)] += sv[static_cast<size_t>(p * cols + j)];
    check_finite(out, "scatter_add_rows");
    Tape::BackFn back;
    if (tape) {
        int64_t ns = src.node();
        auto index = idx;
        back = [ns, index = std::move(index), cols](Tape& t, const std::vector<double>& g) {
            auto& buf = t.grad_buf(ns);
            for (size_t p = 0; p < index.size(); ++p)
                for (int64_t j = 0; j < cols; ++j)
                    buf[p * static_cast<size_t>(cols) + static_cast<size_t>(j)] += g[static_cast<size_t>(index[p] * cols + j)];
        };
    }
    return TensorAccess::make(Shape{out_rows, cols}, std::move(out), tape, std::move(back));
}

Tensor scatter_rows_replace(const Tensor& base, const std::vector<int64_t>& idx,
                            const Tensor& rows) {
    int64_t m = base.rows(), cols = base.cols();
    if (rows.rank() != 2 || rows.cols() != cols ||
        rows.rows() != static_cast<int64_t>(idx.size())) {
        throw ShapeError("scatter_rows_replace: replacement shape mismatch");
    }
    std::vector<char> seen(static_cast<size_t>(m), 0);
    for (int64_t i : idx) {
        if (i < 0 || i >= m) throw ShapeError("scatter_rows_replace: index out of range");
        if (seen[static_cast<size_t>(i)]) throw ShapeError("scatter_rows_replace: duplicate index");
        seen[static_cast<size_t>(i)] = 1;
    }
    Tape* tape = joint_tape({&base, &rows});
    std::vector<double> out = base.vec();
    const auto& rv = rows.vec();
    for (size_t p = 0; p < idx.size(); ++p)
        std::copy_n(&rv[p * static_cast<size_t>(cols)], cols, &out[static_cast<size_t>(idx[p] * cols)]);
    check_finite(out, "scatter_rows_replace");
    Tape::BackFn back;
    if (tape) {
        int64_t nb = base.recorded() ? base.node() : -1;
        int64_t nr = rows.recorded() ? rows.node() : -1;
        auto index = idx;
        back = [nb, nr, index = std::move(index), m, cols](Tape& t, const std::vector<double>& g) {
            if (nb >= 0) {
                auto& buf = t.grad_buf(nb);
                std::vector<char> replaced(static_cast<size_t>(m), 0);
                for (int64_t i : index) replaced[static_cast<size_t>(i)] = 1;
                for (int64_t i = 0; i < m; ++i) {
                    if (replaced[static_cast<size_t>(i)]) continue;
                    for (int64_t j = 0; j < cols; ++j)
                        buf[static_cast<size_t>(i * cols + j)] += g[static_cast<size_t>(i * cols + j)];
                }
            }
            if (nr >= 0) {
                auto& buf = t.grad_buf(nr);
                for (size_t p = 0; p < index.size(); ++p)
                    for (int64_t j = 0; j < cols; ++j)
                        buf[p * static_cast<size_t>(cols) + static_cast<size_t>(j)] += g[static_cast<size_t>(index[p] * cols + j)];
            }
        };
    }
    return TensorAccess::make(base.shape(), std::move(out), tape, std::move(back));
}

Tensor scale_rows(const Tensor& m, const std::vector<double>& factors) {
    int64_t rows = m.rows(), cols = m.cols();
    if (static_cast<int64_t>(factors.size()) != rows) {
        throw ShapeError("scale_rows: factor count != rows");
    }
    Tape* tape = joint_tape({&m});
    const auto& mv = m.vec();
    std::vector<double> out(mv.size());
    for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j)
            out[static_cast<size_t>(i * cols + j)] = mv[static_cast<size_t>(i * cols + j)] * factors[static_cast<size_t>(i)];
    check_finite(out, "scale_rows");
    Tape::BackFn back;
    if (tape) {
        int64_t nm = m.node();
        auto f = factors;
        back = [nm, f = std::move(f), rows, cols](Tape& t, const std::vector<double>& g) {
            auto& buf = t.grad_buf(nm);
            for (int64_t i = 0; i < rows; ++i)
                for (int64_t j = 0; j < cols; ++j)
                    buf[static_cast<size_t>(i * cols + j)] += g[static_cast<size_t>(i * cols + j)] * f[static_cast<size_t>(i)];
        };
    }
    return TensorAccess::make(m.shape(), std::move(out), tape, std::move(back));
}

Tensor row_scale(const Tensor& m, const Tensor& v) {
    int64_t rows = m.rows(), cols = m.cols();
    if (v.rank() != 1 || v.shape()[0] != rows) {
        throw ShapeError("row_scale: factor vector must have one entry per row");
    }
    Tape* tape = joint_tape({&m, &v});
    const auto& mv = m.vec();
    const auto& vv = v.vec();
    std::vector<double> out(mv.size());
    for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j)
            out[static_cast<size_t>(i * cols + j)] = mv[static_cast<size_t>(i * cols + j)] * vv[static_cast<size_t>(i)];
    check_finite(out, "row_scale");
    Tape::BackFn back;
    if (tape) {
        int64_t nm = m.recorded() ? m.node() : -1;
        int64_t nv = v.recorded() ? v.node() : -1;
        auto mdata = m.vec();
        auto vdata = v.vec();
        back = [nm, nv, mdata = std::move(mdata), vdata = std::move(vdata), rows,
                cols](Tape& t, const std::vector<double>& g) {
            if (nm >= 0) {
                auto& buf = t.grad_buf(nm);
                for (int64_t i = 0; i < rows; ++i)
                    for (int64_t j = 0; j < cols; ++j)
                        buf[static_cast<size_t>(i * cols + j)] += g[static_cast<size_t>(i * cols + j)] * vdata[static_cast<size_t>(i)];
            }
            if (nv >= 0) {
                auto& buf = t.grad_buf(nv);
                for (int64_t i = 0; i < rows; ++i) {
                    double s = 0.0;
                    for (int64_t j = 0; j < cols; ++j)
                        s += g[static_cast<size_t>(i * cols + j)] * mdata[static_cast<size_t>(i * cols + j)];
                    buf[static_cast<size_t>(i)] += s;
                }
            }
        };
    }
    return TensorAccess::make(m.shape(), std::move(out), tape, std::move(back));
}

Tensor add_rowvec(const Tensor& m, const Tensor& v) {
    int64_t rows = m.rows(), cols = m.cols();
    if (v.rank() != 1 || v.shape()[0] != cols) {
        throw ShapeError("add_rowvec: vector length must equal column count");
    }
    Tape* tape = joint_tape({&m, &v});
    const auto& mv = m.vec();
    const auto& vv = v.vec();
    std::vector<double> out(mv.size());
    for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j)
            out[static_cast<size_t>(i * cols + j)] = mv[static_cast<size_t>(i * cols + j)] + vv[static_cast<size_t>(j)];
    check_finite(out, "add_rowvec");
    Tape::BackFn back;
    if (tape) {
        int64_t nm = m.recorded() ? m.node() : -1;
        int64_t nv = v.recorded() ? v.node() : -1;
        back = [nm, nv, rows, cols](Tape& t, const std::vector<double>& g) {
            if (nm >= 0) accumulate(t, nm, g);
            if (nv >= 0) {
                auto& buf = t.grad_buf(nv);
                for (int64_t i = 0; i < rows; ++i)
                    for (int64_t j = 0; j < cols; ++j) buf[static_cast<size_t>(j)] += g[static_cast<size_t>(i * cols + j)];
            }
        };
    }
    return TensorAccess::make(m.shape(), std::move(out), tape, std::move(back));
}

// ---------------------------------------------------------------------------
// Circular correlation
// ---------------------------------------------------------------------------

Tensor circular_correlation(const Tensor& a, const Tensor& b) {
    if (a.rank() == 1 && b.rank() == 1) {
        Tensor am = reshape(a, Shape{1, a.shape()[0]});
        Tensor bm = reshape(b, Shape{1, b.shape()[0]});
        return reshape(circular_correlation(am, bm), a.shape());
    }
    require_same_shape(a, b, "circular_correlation");
    if (a.rank() != 2) throw ShapeError("circular_correlation: rank-1 or rank-2 operands only");
    int64_t m = a.rows(), d = a.cols();
    Tape* tape = joint_tape({&a, &b});
    const auto& av = a.vec();
    const auto& bv = b.vec();
    std::vector<double> out(static_cast<size_t>(m * d), 0.0);
    for (int64_t r = 0; r < m; ++r) {
        const double* ar = &av[static_cast<size_t>(r * d)];
        const double* br = &bv[static_cast<size_t>(r * d)];
        double* orow = &out[static_cast<size_t>(r * d)];
        for (int64_t k = 0; k < d; ++k) {
            double s = 0.0;
            for (int64_t i = 0; i < d; ++i) s += ar[i] * br[(i + k) % d];
            orow[k] = s;
        }
    }
    check_finite(out, "circular_correlation");
    Tape::BackFn back;
    if (tape) {
        int64_t na = a.recorded() ? a.node() : -1;
        int64_t nb = b.recorded() ? b.node() : -1;
        auto adata = a.vec();
        auto bdata = b.vec();
        back = [na, nb, adata = std::move(adata), bdata = std::move(bdata), m,
                d](Tape& t, const std::vector<double>& g) {
            if (na >= 0) {
                auto& buf = t.grad_buf(na);
                for (int64_t r = 0; r < m; ++r)
                    for (int64_t i = 0; i < d; ++i) {
                        double s = 0.0;
                        for (int64_t k = 0; k < d; ++k)
                            s += g[static_cast<size_t>(r * d + k)] * bdata[static_cast<size_t>(r * d + (i + k) % d)];
                        buf[static_cast<size_t>(r * d + i)] += s;
                    }
            }
            if (nb >= 0) {
                auto& buf = t.grad_buf(nb);
                for (int64_t r = 0; r < m; ++r)
                    for (int64_t j = 0; j < d; ++j) {
                        double s = 0.0;
                        for (int64_t k = 0; k < d; ++k)
                            s += g[static_cast<size_t>(r * d + k)] * adata[static_cast<size_t>(r * d + (j - k + d) % d)];
                        buf[static_cast<size_t>(r * d + j)] += s;
                    }
            }
        };
    }
    return TensorAccess::make(a.shape(), std::move(out), tape, std::move(back));
}

// ---------------------------------------------------------------------------
// conv1d_pair
// ---------------------------------------------------------------------------

Tensor conv1d_pair(const Tensor& a, const Tensor& b, const Tensor& kernels) {
    require_same_shape(a, b, "conv1d_pair");
    if (a.rank() != 2) throw ShapeError("conv1d_pair: inputs must be [batch x d]");
    if (kernels.rank() != 3 || kernels.shape()[1] != 2) {
        throw ShapeError("conv1d_pair: kernels must be [channels x 2 x width]");
    }
    int64_t batch = a.rows(), d = a.cols();
    int64_t channels = kernels.shape()[0], width = kernels.shape()[2];
    if (width % 2 == 0) throw ShapeError("conv1d_pair: kernel width must be odd");
    int64_t half = width / 2;
    Tape* tape = joint_tape({&a, &b, &kernels});
    const auto& av = a.vec();
    const auto& bv = b.vec();
    const auto& kv = kernels.vec();
    auto kidx = [width](int64_t c, int64_t row, int64_t w) { return (c * 2 + row) * width + w; };

    std::vector<double> out(static_cast<size_t>(batch * channels * d), 0.0);
    for (int64_t n = 0; n < batch; ++n) {
        const double* arow = &av[static_cast<size_t>(n * d)];
        const double* brow = &bv[static_cast<size_t>(n * d)];
        for (int64_t c = 0; c < channels; ++c) {
            double* orow = &out[static_cast<size_t>((n * channels + c) * d)];
            for (int64_t p = 0; p < d; ++p) {
                double s = 0.0;
                for (int64_t w = 0; w < width; ++w) {
                    int64_t q = p + w - half;
                    if (q < 0 || q >= d) continue;
                    s += kv[static_cast<size_t>(kidx(c, 0, w))] * arow[q];
                    s += kv[static_cast<size_t>(kidx(c, 1, w))] * brow[q];
                }
                orow[p] = s;
            }
        }
    }
    check_finite(out, "conv1d_pair");

    Tape::BackFn back;
    if (tape) {
        int64_t na = a.recorded() ? a.node() : -1;
        int64_t nb = b.recorded() ? b.node() : -1;
        int64_t nk = kernels.recorded() ? kernels.node() : -1;
        auto adata = a.vec();
        auto bdata = b.vec();
        auto kdata = kernels.vec();
        back = [na, nb, nk, adata = std::move(adata), bdata = std::move(bdata),
                kdata = std::move(kdata), batch, d, channels, width, half,
                kidx](Tape& t, const std::vector<double>& g) {
            for (int64_t n = 0; n < batch; ++n) {
                for (int64_t c = 0; c < channels; ++c) {
                    const double* grow = &g[static_cast<size_t>((n * channels + c) * d)];
                    for (int64_t p = 0; p < d; ++p) {
                        double gv = grow[p];
                        if (gv == 0.0) continue;
                        for (int64_t w = 0; w < width; ++w) {
                            int64_t q = p + w - half;
                            if (q < 0 || q >= d) continue;
                            if (na >= 0)
                                t.grad_buf(na)[static_cast<size_t>(n * d + q)] +=
                                    gv * kdata[static_cast<size_t>(kidx(c, 0, w))];
                            if (nb >= 0)
                                t.grad_buf(nb)[static_cast<size_t>(n * d + q)] +=
                                    gv * kdata[static_cast<size_t>(kidx(c, 1, w))];
                            if (nk >= 0) {
                                auto& kb = t.grad_buf(nk);
                                kb[static_cast<size_t>(kidx(c, 0, w))] += gv * adata[static_cast<size_t>(n * d + q)];
                                kb[static_cast<size_t>(kidx(c, 1, w))] += gv * bdata[static_cast<size_t>(n * d + q)];
                            }
                        }
                    }
                }
            }
        };
    }
    return TensorAccess::make(Shape{batch, channels * d}, std::move(out), tape, std::move(back));
}

// ---------------------------------------------------------------------------
// Reductions for the contrastive / task losses
// ---------------------------------------------------------------------------

Tensor diag_part(const Tensor& m) {
    int64_t n = m.rows();
    if (m.cols() != n) throw ShapeError("diag_part: square matrix required");
    Tape* tape = joint_tape({&m});
    const auto& mv = m.vec();
    std::vector<double> out(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) out[static_cast<size_t>(i)] = mv[static_cast<size_t>(i * n + i)];
    Tape::BackFn back;
    if (tape) {
        int64_t nm = m.node();
        back = [nm, n](Tape& t, const std::vector<double>& g) {
            auto& buf = t.grad_buf(nm);
            for (int64_t i = 0; i < n; ++i) buf[static_cast<size_t>(i * n + i)] += g[static_cast<size_t>(i)];
        };
    }
    return TensorAccess::make(Shape{n}, std::move(out), tape, std::move(back));
}

Tensor row_logsumexp_offdiag(const Tensor& m) {
    int64_t n = m.rows();
    if (m.cols() != n) throw ShapeError("row_logsumexp_offdiag: square matrix required");
    if (n < 2) throw ShapeError("row_logsumexp_offdiag: needs at least 2 rows");
    Tape* tape = joint_tape({&m});
    const auto& mv = m.vec();
    std::vector<double> out(static_cast<size_t>(n));
    for (int64_t u = 0; u < n; ++u) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int64_t j = 0; j < n; ++j) {
            if (j == u) continue;
            mx = std::max(mx, mv[static_cast<size_t>(u * n + j)]);
        }
        double s = 0.0;
        for (int64_t j = 0; j < n; ++j) {
            if (j == u) continue;
            s += std::exp(mv[static_cast<size_t>(u * n + j)] - mx);
        }
        out[static_cast<size_t>(u)] = mx + std::log(s);
    }
    check_finite(out, "row_logsumexp_offdiag");
    Tape::BackFn back;
    if (tape) {
        int64_t nm = m.node();
        auto mdata = m.vec();
        auto lse = out;
        back = [nm, mdata = std::move(mdata), lse = std::move(lse), n](Tape& t,
                                                                       const std::vector<double>& g) {
            auto& buf = t.grad_buf(nm);
            for (int64_t u = 0; u < n; ++u) {
                if (g[static_cast<size_t>(u)] == 0.0) continue;
                for (int64_t j = 0; j < n; ++j) {
                    if (j == u) continue;
                    buf[static_cast<size_t>(u * n + j)] +=
                        g[static_cast<size_t>(u)] * std::exp(mdata[static_cast<size_t>(u * n + j)] - lse[static_cast<size_t>(u)]);
                }
            }
        };
    }
    return TensorAccess::make(Shape{n}, std::move(out), tape, std::move(back));
}

Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int64_t>& gold) {
    int64_t b = logits.rows(), n = logits.cols();
    if (static_cast<int64_t>(gold.size()) != b) {
        throw ShapeError("softmax_cross_entropy: one label per row required");
    }
    for (int64_t gidx : gold) {
        if (gidx < 0 || gidx >= n) throw ShapeError("softmax_cross_entropy: label out of range");
    }
    if (b == 0) throw ShapeError("softmax_cross_entropy: empty batch");
    Tape* tape = joint_tape({&logits});
    const auto& lv = logits.vec();
    std::vector<double> lse(static_cast<size_t>(b));
    double total = 0.0;
    for (int64_t i = 0; i < b; ++i) {
        const double* row = &lv[static_cast<size_t>(i * n)];
        double mx = row[0];
        for (int64_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (int64_t j = 0; j < n; ++j) s += std::exp(row[j] - mx);
        lse[static_cast<size_t>(i)] = mx + std::log(s);
        total += lse[static_cast<size_t>(i)] - row[gold[static_cast<size_t>(i)]];
    }
    std::vector<double> out{total / static_cast<double>(b)};
    check_finite(out, "softmax_cross_entropy");
    Tape::BackFn back;
    if (tape) {
        int64_t nl = logits.node();
        auto ldata = logits.vec();
        auto labels = gold;
        back = [nl, ldata = std::move(ldata), labels = std::move(labels), lse = std::move(lse), b,
                n](Tape& t, const std::vector<double>& g) {
            auto& buf = t.grad_buf(nl);
            double gscale = g[0] / static_cast<double>(b);
            for (int64_t i = 0; i < b; ++i) {
                for (int64_t j = 0; j < n; ++j) {
                    double p = std::exp(ldata[static_cast<size_t>(i * n + j)] - lse[static_cast<size_t>(i)]);
                    double delta = (j == labels[static_cast<size_t>(i)]) ? 1.0 : 0.0;
                    buf[static_cast<size_t>(i * n + j)] += gscale * (p - delta);
                }
            }
        };
    }
    return TensorAccess::make(Shape{}, std::move(out), tape, std::move(back));
}

Tensor cosine_sim(const Tensor& a, const Tensor& b) {
    if (a.rank() != 1 || b.rank() != 1 || a.shape() != b.shape()) {
        throw ShapeError("cosine_sim: two equal-length vectors required");
    }
    auto sqnorm = [](const Tensor& t) { return sum_all(mul(t, t)); };
    Tensor na2 = sqnorm(a);
    Tensor nb2 = sqnorm(b);
    if (std::sqrt(na2.value()) <= 1e-12 || std::sqrt(nb2.value()) <= 1e-12) {
        throw DomainError("cosine_sim: degenerate input (zero-norm vector)");
    }
    return div(sum_all(mul(a, b)), mul(sqrt(na2), sqrt(nb2)));
}

}  // namespace onto
