#include "dekg/relation_profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dekg/error.hpp"

namespace dekg {

RelationComponentTable::RelationComponentTable(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].second == 0)
            throw DataError("relation-component table entry with zero count");
        if (i > 0 && entries_[i - 1].first == entries_[i].first)
            throw DataError("duplicate axis in relation-component table");
    }
}

void RelationComponentTable::set(RelationId axis, std::uint32_t count) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), axis,
                               [](const Entry& e, RelationId a) { return e.first < a; });
    if (it != entries_.end() && it->first == axis) {
        if (count == 0)
            entries_.erase(it);
        else
            it->second = count;
    } else if (count != 0) {
        entries_.insert(it, {axis, count});
    }
}

std::uint32_t RelationComponentTable::count(RelationId axis) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), axis,
                               [](const Entry& e, RelationId a) { return e.first < a; });
    return (it != entries_.end() && it->first == axis) ? it->second : 0;
}

std::vector<RelationId> RelationComponentTable::support() const {
    std::vector<RelationId> s;
    s.reserve(entries_.size());
    for (const auto& [axis, count] : entries_) s.push_back(axis);
    return s;
}

std::uint64_t RelationComponentTable::total() const {
    std::uint64_t t = 0;
    for (const auto& [axis, count] : entries_) t += count;
    return t;
}

bool RelationComponentTable::same_support(const RelationComponentTable& o) const {
    if (entries_.size() != o.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].first != o.entries_[i].first) return false;
    return true;
}

RelationComponentTable build_table(const KnowledgeGraph& g, EntityId e,
                                   bool direction_aware) {
    if (e >= g.n_entities()) throw DataError("entity id out of range");
    RelationComponentTable t;
    for (const auto& [rel, tail] : g.out_adj[e]) {
        RelationId axis = direction_aware ? 2 * rel : rel;
        t.set(axis, t.count(axis) + 1);
    }
    for (const auto& [rel, head] : g.in_adj[e]) {
        if (!direction_aware && head == e) continue;  // self-loop already counted
        RelationId axis = direction_aware ? 2 * rel + 1 : rel;
        t.set(axis, t.count(axis) + 1);
    }
    return t;
}

std::string relation_axis_name(const Vocabulary& v, RelationId axis,
                               bool direction_aware) {
    if (!direction_aware) return v.relation_token(axis);
    const char* role = (axis % 2 == 0) ? "#head" : "#tail";
    return v.relation_token(axis / 2) + role;
}

void export_tables_csv(const KnowledgeGraph& g, bool direction_aware,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write " + path);
    out << "entity,relation,count\n";
    for (EntityId e = 0; e < g.n_entities(); ++e) {
        RelationComponentTable t = build_table(g, e, direction_aware);
        for (const auto& [axis, count] : t.entries()) {
            out << g.vocab.entity_token(e) << ','
                << relation_axis_name(g.vocab, axis, direction_aware) << ','
                << count << '\n';
        }
    }
    if (!out.flush()) throw FileError("short write to " + path);
}

Graph::Value fuse(Graph& g, const RelationComponentTable& table,
                  Graph::Value features) {
    if (table.empty())
        throw NumericError("cannot fuse an empty relation-component table");
    const double total = static_cast<double>(table.total());
    std::vector<std::uint32_t> rows;
    std::vector<double> weights;
    rows.reserve(table.support_size());
    weights.reserve(table.support_size());
    for (const auto& [axis, count] : table.entries()) {
        rows.push_back(axis);
        weights.push_back(static_cast<double>(count) / total);
    }
    Graph::Value picked = g.gather_rows(features, rows);
    return g.matmul(g.constant(Tensor::row(weights)), picked);
}

Graph::Value semantic_score(Graph& g, Graph::Value ei, RelationId rel,
                            Graph::Value ej, Graph::Value rel_embeddings) {
    Graph::Value r = g.gather_rows(rel_embeddings, {rel});
    return g.sum(g.mul(g.mul(ei, r), ej));
}

double mean_count(const RelationComponentTable& table) {
    if (table.empty())
        throw NumericError("mean count of an empty relation-component table");
    return static_cast<double>(table.total()) /
           static_cast<double>(table.support_size());
}

namespace {

// Uniform in [1, ceil(mean_count * theta)].
std::uint32_t fresh_count(const RelationComponentTable& table, Rng& rng,
                          double theta) {
    double hi = std::ceil(mean_count(table) * theta);
    auto cap = static_cast<std::uint64_t>(std::max(1.0, hi));
    return static_cast<std::uint32_t>(rng.range(1, static_cast<std::int64_t>(cap)));
}

}  // namespace

RelationComponentTable op_variation(const RelationComponentTable& table, Rng& rng,
                                    double theta) {
    if (table.empty()) throw DataError("count variation needs a nonempty table");
    std::uint32_t c = fresh_count(table, rng, theta);
    RelationComponentTable out = table;
    out.set(table.entries()[rng.below(table.support_size())].first, c);
    return out;
}

RelationComponentTable op_addition(const RelationComponentTable& table, Rng& rng,
                                   double theta, std::size_t n_axes) {
    if (table.support_size() >= n_axes)
        throw DataError("relation addition: no axis left to add");
    std::uint32_t c = fresh_count(table, rng, theta);
    // Pick the k-th axis outside the support, in axis order.
    std::uint64_t k = rng.below(n_axes - table.support_size());
    RelationId axis = 0;
    for (const auto& [used, count] : table.entries()) {
        if (used - axis > k) break;
        k -= used - axis;
        axis = used + 1;
    }
    axis += static_cast<RelationId>(k);
    RelationComponentTable out = table;
    out.set(axis, c);
    return out;
}

RelationComponentTable op_deletion(const RelationComponentTable& table, Rng& rng) {
    if (table.support_size() < 2)
        throw DataError("relation deletion needs support size >= 2");
    RelationComponentTable out = table;
    out.set(table.entries()[rng.below(table.support_size())].first, 0);
    return out;
}

ContrastivePair sample_pair(const RelationComponentTable& table, Rng& rng,
                            double theta, std::size_t len_pos, std::size_t len_neg,
                            std::size_t n_axes) {
    if (table.empty()) throw DataError("contrastive sampling needs a nonempty table");
    if (len_pos == 0 || len_neg == 0)
        throw DataError("contrastive sampling needs positive edit lengths");

    ContrastivePair pair;
    pair.anchor = table;
    // An identical positive is useless (its distance term is pinned at zero),
    // so redraw until some count actually moved.
    for (int attempt = 0;; ++attempt) {
        RelationComponentTable pos = table;
        for (std::size_t i = 0; i < len_pos; ++i)
            pos = op_variation(pos, rng, theta);
        if (pos != table) {
            pair.positive = std::move(pos);
            break;
        }
        if (attempt == 63)
            throw DataError(
                "contrastive sampling: count variation cannot move any count; "
                "theta is too small");
    }

    const bool can_add = table.support_size() < n_axes;
    const bool can_del = table.support_size() >= 2;
    if (!can_add && !can_del)
        throw DataError("contrastive sampling: support can be neither grown nor shrunk");
    if (can_add && can_del && len_neg < 2) len_neg = 2;  // one of each
    // Full support: the walk starts with a delete and every add is forced to
    // restore the axis just removed, so an even-length walk always cancels.
    if (!can_add && len_neg % 2 == 0) ++len_neg;

    for (int attempt = 0; attempt < 64; ++attempt) {
        RelationComponentTable neg = table;
        bool add_turn = can_add;
        for (std::size_t i = 0; i < len_neg; ++i) {
            bool step_can_add = neg.support_size() < n_axes;
            bool step_can_del = neg.support_size() >= 2;
            bool add = add_turn ? step_can_add : !step_can_del;
            if (add)
                neg = op_addition(neg, rng, theta, n_axes);
            else
                neg = op_deletion(neg, rng);
            add_turn = !add;
        }
        if (!neg.same_support(table)) {
            pair.negative = std::move(neg);
            return pair;
        }
    }
    throw DataError("contrastive sampling: could not change the support");
}

Graph::Value euclidean_distance(Graph& g, Graph::Value x, Graph::Value y) {
    Graph::Value d = g.sub(x, y);
    return g.sqrt(g.sum(g.mul(d, d)));
}

Graph::Value contrastive_loss(Graph& g, Graph::Value anchor_emb,
                              Graph::Value pos_emb, Graph::Value neg_emb,
                              double gamma_c) {
    Graph::Value d_pos = euclidean_distance(g, pos_emb, anchor_emb);
    Graph::Value d_neg = euclidean_distance(g, neg_emb, anchor_emb);
    return g.hinge(g.add(g.sub(d_pos, d_neg), g.scalar(gamma_c)));
}

}  // namespace dekg
