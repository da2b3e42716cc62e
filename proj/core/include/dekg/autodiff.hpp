#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dekg/rng.hpp"
#include "dekg/tensor.hpp"

namespace dekg {

// Named parameter slots, each value paired with a same-shape gradient.
class ParameterStore {
public:
    using SlotId = std::size_t;

    SlotId add(std::string name, Tensor init);
    // Uniform init in [-bound, bound].
    SlotId add_uniform(std::string name, std::size_t rows, std::size_t cols,
                       Rng& rng, double bound);

    SlotId find(std::string_view name) const;  // throws NumericError if absent
    bool contains(std::string_view name) const;

    std::size_t size() const { return slots_.size(); }
    const std::string& name(SlotId id) const { return slots_[id].name; }
    const Tensor& value(SlotId id) const { return slots_[id].value; }
    const Tensor& grad(SlotId id) const { return slots_[id].grad; }

    // Direct mutation invalidates any live trace; bumps the version counter.
    Tensor& mutable_value(SlotId id);
    void accumulate_grad(SlotId id, const Tensor& g);
    void zero_grads();

    // value -= lr * grad for every slot, then zero all gradients.
    // Throws NumericError on a non-finite gradient.
    void sgd_step(double lr);

    std::uint64_t version() const { return version_; }

private:
    struct Slot {
        std::string name;
        Tensor value;
        Tensor grad;
    };
    std::vector<Slot> slots_;
    std::unordered_map<std::string, SlotId> by_name_;
    std::uint64_t version_ = 0;
};

// Expression trace for one forward pass. Operations record enough to replay
// the backward sweep; node ids are assigned in creation order, which is a
// topological order of the DAG. All publicly produced values are checked
// finite; a NaN/Inf intermediate throws NumericError.
class Graph {
public:
    using Value = std::uint32_t;

    explicit Graph(ParameterStore* store = nullptr) : store_(store) {}

    Value constant(Tensor t);
    Value scalar(double v) { return constant(Tensor::scalar(v)); }
    Value param(ParameterStore::SlotId slot);
    Value param(std::string_view name);

    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    Value mul(Value a, Value b);  // elementwise
    Value matmul(Value a, Value b);
    Value concat(Value a, Value b);  // along columns; rows must match
    Value scale(Value a, double c);
    Value mul_scalar(Value a, Value s);  // s must be 1x1
    Value gather_rows(Value a, std::vector<std::uint32_t> idx);
    Value scatter_rows(Value a, std::vector<std::uint32_t> dest, std::size_t n_rows);
    Value mean_rows(Value a);  // (n,d) -> (1,d)
    Value sum(Value a);        // all elements -> 1x1
    Value relu(Value a);       // elementwise [x]_+; subgradient at 0 is 0
    Value hinge(Value a) { return relu(a); }
    Value sigmoid(Value a);
    Value sqrt(Value a);  // elementwise; subgradient at 0 is 0

    const Tensor& value(Value v) const { return nodes_[v].out; }
    std::size_t size() const { return nodes_.size(); }

    // Accumulates d(root)/d(param) into the store's gradient slots.
    // Throws NumericError if the store was mutated after tracing.
    void backward(Value root);  // seed = ones like root
    void backward(Value root, const Tensor& seed);

    // True when some forward pass evaluated relu or sqrt within kink_eps of
    // its non-differentiable point; gradient checks exclude such traces.
    bool saw_kink() const { return saw_kink_; }

    static constexpr double kKinkEps = 1e-9;

private:
    enum class Op : std::uint8_t {
        Constant, Param, Add, Sub, Mul, MatMul, Concat, Scale, MulScalar,
        GatherRows, ScatterRows, MeanRows, Sum, Relu, Sigmoid, Sqrt,
    };

    struct Node {
        Op op;
        Value a = kNone;
        Value b = kNone;
        Tensor out;
        std::vector<std::uint32_t> idx;  // gather/scatter indices
        double c = 0.0;                  // scale factor
        ParameterStore::SlotId slot = 0;
    };

    static constexpr Value kNone = ~Value{0};

    Value push(Node n);
    const Tensor& val(Value v) const { return nodes_[v].out; }

    ParameterStore* store_;
    std::vector<Node> nodes_;
    std::uint64_t traced_version_ = 0;
    bool has_params_ = false;
    bool saw_kink_ = false;
};

struct GradCheckEntry {
    std::string param;
    double max_rel_err = 0.0;
    std::size_t argmax_index = 0;
    bool pass = true;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    // Nominal point touched a relu/sqrt kink: comparison skipped, not failed.
    bool kink = false;
    bool pass = true;
};

// Central finite differences against the analytic backward pass, per
// parameter slot. `expr` must build a scalar-valued expression on the given
// graph; it is re-evaluated under elementwise perturbations of every slot.
// Relative error uses max(1, |analytic|, |numeric|) as denominator.
GradCheckReport grad_check(const std::function<Graph::Value(Graph&)>& expr,
                           ParameterStore& store, double tolerance,
                           double fd_step = 1e-5);

}  // namespace dekg
