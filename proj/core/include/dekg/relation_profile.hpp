#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dekg/autodiff.hpp"
#include "dekg/kg.hpp"
#include "dekg/rng.hpp"

namespace dekg {

// Sparse per-entity counts over the relation axis. Zero counts are implicit;
// every stored count is positive. With direction-aware counting the axis is
// doubled to (relation, role) pairs: axis 2r for the entity-as-head role and
// 2r+1 for the entity-as-tail role.
class RelationComponentTable {
public:
    using Entry = std::pair<RelationId, std::uint32_t>;  // (axis, count)

    RelationComponentTable() = default;
    explicit RelationComponentTable(std::vector<Entry> entries);

    void set(RelationId axis, std::uint32_t count);  // count 0 erases
    std::uint32_t count(RelationId axis) const;

    bool empty() const { return entries_.empty(); }
    std::size_t support_size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<RelationId> support() const;
    std::uint64_t total() const;
    bool same_support(const RelationComponentTable& o) const;

    bool operator==(const RelationComponentTable&) const = default;

private:
    std::vector<Entry> entries_;  // sorted by axis, counts > 0
};

// Counts the triples of g that touch e, per relation axis. Direction-agnostic
// by default: a triple contributes once whether e is its head or tail (a
// self-loop also counts once). Direction-aware mode splits the axis by role;
// a self-loop then contributes to both role axes.
RelationComponentTable build_table(const KnowledgeGraph& g, EntityId e,
                                   bool direction_aware = false);

// Number of relation axes a table over g can touch.
inline std::size_t relation_axis_count(std::size_t n_relations, bool direction_aware) {
    return direction_aware ? 2 * n_relations : n_relations;
}

std::string relation_axis_name(const Vocabulary& v, RelationId axis,
                               bool direction_aware);

// Diagnostic CSV `entity,relation,count`, one row per nonzero table entry.
void export_tables_csv(const KnowledgeGraph& g, bool direction_aware,
                       const std::string& path);

// Count-weighted average of feature rows: (sum_k a_k f_k) / (sum_k a_k).
// `features` is the (n_axes x d) feature bank on the tape; differentiable
// with respect to it. Throws NumericError for an empty table.
Graph::Value fuse(Graph& g, const RelationComponentTable& table,
                  Graph::Value features);

// DistMult-style score: sum over dimensions of ei * r_k * ej, where r_k is
// row `rel` of the (n x d) semantic relation embedding matrix.
Graph::Value semantic_score(Graph& g, Graph::Value ei, RelationId rel,
                            Graph::Value ej, Graph::Value rel_embeddings);

// (sum of counts) / |support|. Throws NumericError for an empty table.
double mean_count(const RelationComponentTable& table);

// Contrastive table operations. Each picks uniformly with the caller's rng;
// new counts are uniform integers in [1, ceil(mean_count * theta)].
// o1: one in-support count re-drawn; support unchanged.
RelationComponentTable op_variation(const RelationComponentTable& table, Rng& rng,
                                    double theta);
// o2: one out-of-support axis (of n_axes) set to a fresh count.
RelationComponentTable op_addition(const RelationComponentTable& table, Rng& rng,
                                   double theta, std::size_t n_axes);
// o3: one in-support axis dropped; requires support size >= 2.
RelationComponentTable op_deletion(const RelationComponentTable& table, Rng& rng);

struct ContrastivePair {
    RelationComponentTable anchor;
    RelationComponentTable positive;  // same support as anchor
    RelationComponentTable negative;  // strictly different support
};

// positive: len_pos sequential o1 applications, retried until some count
// actually moved (an unchanged positive pins its distance term at zero).
// negative: an interleaved o2/o3 sequence of length len_neg (raised to 2 when
// both operations are feasible, so that at least one axis is added and one
// removed; made odd when the support already spans every axis, where an even
// walk provably cancels). Retries until the negative's support differs.
ContrastivePair sample_pair(const RelationComponentTable& table, Rng& rng,
                            double theta, std::size_t len_pos, std::size_t len_neg,
                            std::size_t n_axes);

// Euclidean distance between two same-shape row vectors, on the tape.
Graph::Value euclidean_distance(Graph& g, Graph::Value x, Graph::Value y);

// Margin hinge on distances: [dist(pos,anchor) - dist(neg,anchor) + gamma]_+.
Graph::Value contrastive_loss(Graph& g, Graph::Value anchor_emb,
                              Graph::Value pos_emb, Graph::Value neg_emb,
                              double gamma_c);

}  // namespace dekg
