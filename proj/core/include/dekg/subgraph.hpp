#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dekg/kg.hpp"
#include "dekg/tensor.hpp"

namespace dekg {

// Node-induced subgraph around a candidate link, with per-node distance
// labels. Node 0 is always the head endpoint and node 1 the tail endpoint;
// edges use local node indices and never include the candidate edge itself.
struct LabeledSubgraph {
    struct Edge {
        std::uint32_t head;
        RelationId rel;
        std::uint32_t tail;
    };

    std::vector<EntityId> nodes;  // local index -> global entity id
    std::vector<Edge> edges;
    // (distance from head, distance from tail); -1 = farther than the hop
    // budget or unreachable.
    std::vector<std::pair<int, int>> labels;

    std::size_t n_nodes() const { return nodes.size(); }
};

struct ExtractOptions {
    int hops = 2;
    // Per-endpoint cap on ball size; nearest nodes win (breadth-first order).
    std::size_t max_ball_nodes = 500;
};

enum class LabelingMode {
    // Distances avoid the opposite endpoint; nodes out of range on both
    // sides are dropped.
    Improved,
    // Plain double-radius labeling; any node out of range on either side is
    // dropped.
    Pruned,
};

// Union of the two t-hop balls around ei and ej (undirected reachability,
// with the candidate edge (ei, rk, ej) excluded), plus all edges of g between
// kept nodes except the candidate edge. Labels are not yet assigned.
LabeledSubgraph extract_subgraph(const KnowledgeGraph& g, EntityId ei,
                                 EntityId ej, RelationId rk,
                                 const ExtractOptions& opts);

// Assigns double-radius labels and prunes out-of-range nodes per `mode`.
// Distance from an endpoint is breadth-first over the subgraph's edges,
// ignoring direction; in Improved mode paths through the opposite endpoint
// are forbidden. The endpoints always keep labels (0,1) and (1,0).
void label_nodes(LabeledSubgraph& sg, int hops, LabelingMode mode);

// One-hot encoding of the labels: per node, two blocks of width hops+1, one
// per label component; -1 maps to an all-zero block.
Tensor encode_labels(const LabeledSubgraph& sg, int hops);

// Diagnostic dump: node lines `node <local> <entity-token> <d_head> <d_tail>`
// followed by edge lines `edge <head-token> <relation-token> <tail-token>`.
void export_subgraph(const LabeledSubgraph& sg, const Vocabulary& vocab,
                     std::ostream& out);

}  // namespace dekg
