#pragma once

#include <cstdint>
#include <vector>

#include "dekg/autodiff.hpp"
#include "dekg/rng.hpp"
#include "dekg/subgraph.hpp"

namespace dekg {

// Parameter-store handles for the relational GNN. Layer l transforms its
// input (label width for l = 0, hidden afterwards) to hidden width; every
// relation owns a forward and an inverse transform per layer, plus a shared
// self-loop transform. Edge attention scores a message relation against the
// candidate relation through a per-layer bilinear form over small attention
// embeddings.
struct GnnSlots {
    std::vector<ParameterStore::SlotId> self;                    // per layer
    std::vector<std::vector<ParameterStore::SlotId>> fwd;        // layer x relation
    std::vector<std::vector<ParameterStore::SlotId>> inv;        // layer x relation
    std::vector<ParameterStore::SlotId> att_bilinear;            // per layer
    ParameterStore::SlotId att_embed = 0;                        // n_rel x d_att
    ParameterStore::SlotId rel_tpo = 0;                          // n_rel x hidden
    ParameterStore::SlotId score_w = 0;                          // 4*hidden x 1

    std::size_t n_layers() const { return self.size(); }
};

// Registers freshly initialized GNN parameters (uniform in [-bound, bound])
// and returns their handles. `in_width` is the label encoding width.
GnnSlots init_gnn_slots(ParameterStore& store, std::size_t n_relations,
                        std::size_t in_width, std::size_t hidden,
                        std::size_t n_layers, std::size_t d_att, Rng& rng);

struct GnnOutput {
    Graph::Value nodes;   // n x hidden, final layer
    Graph::Value pooled;  // 1 x hidden, mean over nodes
    Graph::Value head;    // 1 x hidden
    Graph::Value tail;    // 1 x hidden
};

// Runs the message-passing stack over a labeled subgraph. `features` must be
// an n_nodes x in_width value (typically the one-hot labels). When training,
// each edge is dropped with probability `edge_dropout` (one mask per forward,
// shared by all layers); only messages are masked, the self-loop always
// applies.
GnnOutput gnn_forward(Graph& g, const LabeledSubgraph& sg, Graph::Value features,
                      const GnnSlots& slots, RelationId target_rel,
                      double edge_dropout, bool training, Rng* dropout_rng);

// Linear score over [pooled | head | tail | relation embedding].
Graph::Value topological_score(Graph& g, const GnnOutput& out,
                               RelationId target_rel, const GnnSlots& slots);

}  // namespace dekg
