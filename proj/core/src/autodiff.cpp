#include "dekg/autodiff.hpp"

#include <cmath>
#include <utility>

#include "dekg/error.hpp"

namespace dekg {

// ---------------------------------------------------------------------------
// ParameterStore

ParameterStore::SlotId ParameterStore::add(std::string name, Tensor init) {
    if (by_name_.count(name)) throw NumericError("duplicate parameter slot: " + name);
    if (!init.finite()) throw NumericError("non-finite init for slot: " + name);
    SlotId id = slots_.size();
    Tensor grad(init.rows, init.cols, 0.0);
    by_name_.emplace(name, id);
    slots_.push_back({std::move(name), std::move(init), std::move(grad)});
    return id;
}

ParameterStore::SlotId ParameterStore::add_uniform(std::string name, std::size_t rows,
                                                   std::size_t cols, Rng& rng,
                                                   double bound) {
    Tensor t(rows, cols);
    for (double& x : t.data) x = rng.uniform(-bound, bound);
    return add(std::move(name), std::move(t));
}

ParameterStore::SlotId ParameterStore::find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end())
        throw NumericError("unknown parameter slot: " + std::string(name));
    return it->second;
}

bool ParameterStore::contains(std::string_view name) const {
    return by_name_.count(std::string(name)) != 0;
}

Tensor& ParameterStore::mutable_value(SlotId id) {
    ++version_;
    return slots_[id].value;
}

void ParameterStore::accumulate_grad(SlotId id, const Tensor& g) {
    slots_[id].grad += g;
}

void ParameterStore::zero_grads() {
    for (auto& s : slots_)
        for (double& x : s.grad.data) x = 0.0;
}

void ParameterStore::sgd_step(double lr) {
    for (auto& s : slots_) {
        if (!s.grad.finite())
            throw NumericError("non-finite gradient in slot: " + s.name);
        for (std::size_t i = 0; i < s.value.data.size(); ++i)
            s.value.data[i] -= lr * s.grad.data[i];
        for (double& x : s.grad.data) x = 0.0;
    }
    ++version_;
}

// ---------------------------------------------------------------------------
// Graph

Graph::Value Graph::push(Node n) {
    if (!n.out.finite()) throw NumericError("non-finite intermediate in forward pass");
    nodes_.push_back(std::move(n));
    return static_cast<Value>(nodes_.size() - 1);
}

Graph::Value Graph::constant(Tensor t) {
    Node n{Op::Constant};
    n.out = std::move(t);
    return push(std::move(n));
}

Graph::Value Graph::param(ParameterStore::SlotId slot) {
    if (!store_) throw NumericError("graph has no parameter store");
    if (!has_params_) {
        traced_version_ = store_->version();
        has_params_ = true;
    } else if (traced_version_ != store_->version()) {
        throw NumericError("parameter store mutated while tracing");
    }
    Node n{Op::Param};
    n.slot = slot;
    n.out = store_->value(slot);
    return push(std::move(n));
}

Graph::Value Graph::param(std::string_view name) {
    if (!store_) throw NumericError("graph has no parameter store");
    return param(store_->find(name));
}

Graph::Value Graph::add(Value a, Value b) {
    const Tensor &ta = val(a), &tb = val(b);
    if (!ta.same_shape(tb)) throw NumericError("add: shape mismatch");
    Node n{Op::Add, a, b};
    n.out = ta;
    n.out += tb;
    return push(std::move(n));
}

Graph::Value Graph::sub(Value a, Value b) {
    const Tensor &ta = val(a), &tb = val(b);
    if (!ta.same_shape(tb)) throw NumericError("sub: shape mismatch");
    Node n{Op::Sub, a, b};
    n.out = ta;
    for (std::size_t i = 0; i < n.out.data.size(); ++i) n.out.data[i] -= tb.data[i];
    return push(std::move(n));
}

Graph::Value Graph::mul(Value a, Value b) {
    const Tensor &ta = val(a), &tb = val(b);
    if (!ta.same_shape(tb)) throw NumericError("mul: shape mismatch");
    Node n{Op::Mul, a, b};
    n.out = ta;
    for (std::size_t i = 0; i < n.out.data.size(); ++i) n.out.data[i] *= tb.data[i];
    return push(std::move(n));
}

Graph::Value Graph::matmul(Value a, Value b) {
    const Tensor &ta = val(a), &tb = val(b);
    if (ta.cols != tb.rows) throw NumericError("matmul: inner dimension mismatch");
    Node n{Op::MatMul, a, b};
    n.out = Tensor(ta.rows, tb.cols);
    for (std::size_t i = 0; i < ta.rows; ++i)
        for (std::size_t k = 0; k < ta.cols; ++k) {
            const double aik = ta.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < tb.cols; ++j)
                n.out.at(i, j) += aik * tb.at(k, j);
        }
    return push(std::move(n));
}

Graph::Value Graph::concat(Value a, Value b) {
    const Tensor &ta = val(a), &tb = val(b);
    if (ta.rows != tb.rows) throw NumericError("concat: row count mismatch");
    Node n{Op::Concat, a, b};
    n.out = Tensor(ta.rows, ta.cols + tb.cols);
    for (std::size_t r = 0; r < ta.rows; ++r) {
        for (std::size_t c = 0; c < ta.cols; ++c) n.out.at(r, c) = ta.at(r, c);
        for (std::size_t c = 0; c < tb.cols; ++c) n.out.at(r, ta.cols + c) = tb.at(r, c);
    }
    return push(std::move(n));
}

Graph::Value Graph::scale(Value a, double c) {
    Node n{Op::Scale, a};
    n.c = c;
    n.out = val(a);
    n.out *= c;
    return push(std::move(n));
}

Graph::Value Graph::mul_scalar(Value a, Value s) {
    const Tensor& ts = val(s);
    if (!ts.is_scalar()) throw NumericError("mul_scalar: scalar operand must be 1x1");
    Node n{Op::MulScalar, a, s};
    n.out = val(a);
    n.out *= ts.data[0];
    return push(std::move(n));
}

Graph::Value Graph::gather_rows(Value a, std::vector<std::uint32_t> idx) {
    const Tensor& ta = val(a);
    for (auto i : idx)
        if (i >= ta.rows) throw NumericError("gather_rows: index out of range");
    Node n{Op::GatherRows, a};
    n.out = Tensor(idx.size(), ta.cols);
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < ta.cols; ++c) n.out.at(r, c) = ta.at(idx[r], c);
    n.idx = std::move(idx);
    return push(std::move(n));
}

Graph::Value Graph::scatter_rows(Value a, std::vector<std::uint32_t> dest,
                                 std::size_t n_rows) {
    const Tensor& ta = val(a);
    if (dest.size() != ta.rows) throw NumericError("scatter_rows: index count mismatch");
    for (auto i : dest)
        if (i >= n_rows) throw NumericError("scatter_rows: index out of range");
    Node n{Op::ScatterRows, a};
    n.out = Tensor(n_rows, ta.cols);
    for (std::size_t r = 0; r < dest.size(); ++r)
        for (std::size_t c = 0; c < ta.cols; ++c) n.out.at(dest[r], c) += ta.at(r, c);
    n.idx = std::move(dest);
    return push(std::move(n));
}

Graph::Value Graph::mean_rows(Value a) {
    const Tensor& ta = val(a);
    if (ta.rows == 0) throw NumericError("mean_rows: empty tensor");
    Node n{Op::MeanRows, a};
    n.out = Tensor(1, ta.cols);
    for (std::size_t r = 0; r < ta.rows; ++r)
        for (std::size_t c = 0; c < ta.cols; ++c) n.out.at(0, c) += ta.at(r, c);
    n.out *= 1.0 / static_cast<double>(ta.rows);
    return push(std::move(n));
}

Graph::Value Graph::sum(Value a) {
    const Tensor& ta = val(a);
    Node n{Op::Sum, a};
    double s = 0.0;
    for (double x : ta.data) s += x;
    n.out = Tensor::scalar(s);
    return push(std::move(n));
}

Graph::Value Graph::relu(Value a) {
    const Tensor& ta = val(a);
    Node n{Op::Relu, a};
    n.out = ta;
    for (double& x : n.out.data) {
        if (x > -kKinkEps && x < kKinkEps) saw_kink_ = true;
        if (x < 0.0) x = 0.0;
    }
    return push(std::move(n));
}

Graph::Value Graph::sigmoid(Value a) {
    Node n{Op::Sigmoid, a};
    n.out = val(a);
    for (double& x : n.out.data) x = 1.0 / (1.0 + std::exp(-x));
    return push(std::move(n));
}

Graph::Value Graph::sqrt(Value a) {
    const Tensor& ta = val(a);
    for (double x : ta.data)
        if (x < 0.0) throw NumericError("sqrt: negative input");
    Node n{Op::Sqrt, a};
    n.out = ta;
    for (double& x : n.out.data) {
        if (x < kKinkEps) saw_kink_ = true;
        x = std::sqrt(x);
    }
    return push(std::move(n));
}

void Graph::backward(Value root) {
    const Tensor& out = val(root);
    backward(root, Tensor(out.rows, out.cols, 1.0));
}

void Graph::backward(Value root, const Tensor& seed) {
    if (root >= nodes_.size()) throw NumericError("backward: bad root");
    if (!seed.same_shape(val(root))) throw NumericError("backward: seed shape mismatch");
    if (has_params_ && store_ && traced_version_ != store_->version())
        throw NumericError("backward: parameter store mutated after tracing");

    std::vector<Tensor> grads(nodes_.size());
    grads[root] = seed;

    auto bump = [&](Value v, std::size_t r, std::size_t c) -> Tensor& {
        if (grads[v].numel() == 0) grads[v] = Tensor(r, c, 0.0);
        return grads[v];
    };

    for (std::size_t ii = nodes_.size(); ii-- > 0;) {
        const Value v = static_cast<Value>(ii);
        if (grads[v].numel() == 0) continue;
        const Node& n = nodes_[v];
        const Tensor& g = grads[v];
        switch (n.op) {
            case Op::Constant:
                break;
            case Op::Param:
                store_->accumulate_grad(n.slot, g);
                break;
            case Op::Add: {
                bump(n.a, g.rows, g.cols) += g;
                bump(n.b, g.rows, g.cols) += g;
                break;
            }
            case Op::Sub: {
                bump(n.a, g.rows, g.cols) += g;
                Tensor& gb = bump(n.b, g.rows, g.cols);
                for (std::size_t i = 0; i < g.data.size(); ++i) gb.data[i] -= g.data[i];
                break;
            }
            case Op::Mul: {
                const Tensor &ta = val(n.a), &tb = val(n.b);
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                Tensor& gb = bump(n.b, tb.rows, tb.cols);
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    ga.data[i] += g.data[i] * tb.data[i];
                    gb.data[i] += g.data[i] * ta.data[i];
                }
                break;
            }
            case Op::MatMul: {
                const Tensor &ta = val(n.a), &tb = val(n.b);
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                Tensor& gb = bump(n.b, tb.rows, tb.cols);
                // ga += g * tb^T ; gb += ta^T * g
                for (std::size_t i = 0; i < ta.rows; ++i)
                    for (std::size_t j = 0; j < tb.cols; ++j) {
                        const double gij = g.at(i, j);
                        if (gij == 0.0) continue;
                        for (std::size_t k = 0; k < ta.cols; ++k) {
                            ga.at(i, k) += gij * tb.at(k, j);
                            gb.at(k, j) += gij * ta.at(i, k);
                        }
                    }
                break;
            }
            case Op::Concat: {
                const Tensor &ta = val(n.a), &tb = val(n.b);
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                Tensor& gb = bump(n.b, tb.rows, tb.cols);
                for (std::size_t r = 0; r < ta.rows; ++r) {
                    for (std::size_t c = 0; c < ta.cols; ++c)
                        ga.at(r, c) += g.at(r, c);
                    for (std::size_t c = 0; c < tb.cols; ++c)
                        gb.at(r, c) += g.at(r, ta.cols + c);
                }
                break;
            }
            case Op::Scale: {
                const Tensor& ta = val(n.a);
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                for (std::size_t i = 0; i < g.data.size(); ++i)
                    ga.data[i] += g.data[i] * n.c;
                break;
            }
            case Op::MulScalar: {
                const Tensor& ta = val(n.a);
                const double s = val(n.b).data[0];
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                Tensor& gs = bump(n.b, 1, 1);
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    ga.data[i] += g.data[i] * s;
                    gs.data[0] += g.data[i] * ta.data[i];
                }
                break;
            }
            case Op::GatherRows: {
                const Tensor& ta = val(n.a);
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                for (std::size_t r = 0; r < n.idx.size(); ++r)
                    for (std::size_t c = 0; c < ta.cols; ++c)
                        ga.at(n.idx[r], c) += g.at(r, c);
                break;
            }
            case Op::ScatterRows: {
                const Tensor& ta = val(n.a);
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                for (std::size_t r = 0; r < n.idx.size(); ++r)
                    for (std::size_t c = 0; c < ta.cols; ++c)
                        ga.at(r, c) += g.at(n.idx[r], c);
                break;
            }
            case Op::MeanRows: {
                const Tensor& ta = val(n.a);
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                const double inv = 1.0 / static_cast<double>(ta.rows);
                for (std::size_t r = 0; r < ta.rows; ++r)
                    for (std::size_t c = 0; c < ta.cols; ++c)
                        ga.at(r, c) += g.at(0, c) * inv;
                break;
            }
            case Op::Sum: {
                const Tensor& ta = val(n.a);
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                for (double& x : ga.data) x += g.data[0];
                break;
            }
            case Op::Relu: {
                const Tensor& ta = val(n.a);
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                for (std::size_t i = 0; i < g.data.size(); ++i)
                    if (ta.data[i] > 0.0) ga.data[i] += g.data[i];
                break;
            }
            case Op::Sigmoid: {
                const Tensor& ta = val(n.a);
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                for (std::size_t i = 0; i < g.data.size(); ++i) {
                    const double s = n.out.data[i];
                    ga.data[i] += g.data[i] * s * (1.0 - s);
                }
                break;
            }
            case Op::Sqrt: {
                const Tensor& ta = val(n.a);
                Tensor& ga = bump(n.a, ta.rows, ta.cols);
                for (std::size_t i = 0; i < g.data.size(); ++i)
                    if (ta.data[i] > 0.0)
                        ga.data[i] += g.data[i] * 0.5 / n.out.data[i];
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// grad_check

GradCheckReport grad_check(const std::function<Graph::Value(Graph&)>& expr,
                           ParameterStore& store, double tolerance, double fd_step) {
    GradCheckReport report;

    store.zero_grads();
    std::vector<Tensor> analytic;
    {
        Graph g(&store);
        Graph::Value root = expr(g);
        if (!g.value(root).is_scalar())
            throw NumericError("grad_check: expression must be scalar-valued");
        g.backward(root);
        if (g.saw_kink()) {
            report.kink = true;
            store.zero_grads();
            return report;
        }
        analytic.reserve(store.size());
        for (ParameterStore::SlotId s = 0; s < store.size(); ++s)
            analytic.push_back(store.grad(s));
    }
    store.zero_grads();

    auto eval = [&]() -> double {
        Graph g(&store);
        Graph::Value root = expr(g);
        return g.value(root).item();
    };

    for (ParameterStore::SlotId s = 0; s < store.size(); ++s) {
        GradCheckEntry entry;
        entry.param = store.name(s);
        const std::size_t n = store.value(s).numel();
        for (std::size_t i = 0; i < n; ++i) {
            const double saved = store.value(s).data[i];
            store.mutable_value(s).data[i] = saved + fd_step;
            const double fp = eval();
            store.mutable_value(s).data[i] = saved - fd_step;
            const double fm = eval();
            store.mutable_value(s).data[i] = saved;

            const double numeric = (fp - fm) / (2.0 * fd_step);
            const double a = analytic[s].data[i];
            const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
            const double rel = std::abs(a - numeric) / denom;
            if (rel > entry.max_rel_err) {
                entry.max_rel_err = rel;
                entry.argmax_index = i;
            }
        }
        entry.pass = entry.max_rel_err <= tolerance;
        report.pass = report.pass && entry.pass;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace dekg
