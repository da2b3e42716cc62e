#pragma once

#include <cstdint>
#include <vector>

#include "dekg/autodiff.hpp"
#include "dekg/config.hpp"
#include "dekg/gnn.hpp"
#include "dekg/kg.hpp"
#include "dekg/relation_profile.hpp"
#include "dekg/rng.hpp"
#include "dekg/subgraph.hpp"

namespace dekg {

// All learned state for one run: the relation feature bank and semantic
// relation embeddings (profile side), and the message-passing stack
// (subgraph side). Nothing is keyed by entity id, which is what lets the
// model score entities it has never seen.
struct Model {
    TrainConfig cfg;
    std::size_t n_relations = 0;
    ParameterStore store;
    ParameterStore::SlotId feature_bank = 0;  // n_axes x d
    ParameterStore::SlotId rel_sem = 0;       // n_relations x d
    GnnSlots gnn;

    std::size_t n_axes() const {
        return relation_axis_count(n_relations, cfg.direction_aware);
    }
    std::size_t label_width() const {
        return 2 * (static_cast<std::size_t>(cfg.hops) + 1);
    }

    // Fresh parameters, uniform in [-1/sqrt(d), 1/sqrt(d)], drawn from the
    // "init" stream of cfg.seed. Validates cfg.
    static Model init(TrainConfig cfg, std::size_t n_relations);
};

// Per-graph precomputation shared by scoring calls: one relation-component
// table per entity. Immutable after construction, safe to share across
// threads.
class ScoringContext {
public:
    ScoringContext(const KnowledgeGraph& g, bool direction_aware);

    const KnowledgeGraph& graph() const { return *g_; }
    const RelationComponentTable& table(EntityId e) const { return tables_.at(e); }

private:
    const KnowledgeGraph* g_;
    std::vector<RelationComponentTable> tables_;
};

// Extraction + labeling + encoding for one candidate link, per cfg (hop
// budget, ball cap, labeling mode).
LabeledSubgraph make_subgraph(const KnowledgeGraph& g, const Triple& t,
                              const TrainConfig& cfg);

// Profile-based score of a triple (fused head/tail profiles against the
// semantic relation embedding), on the tape.
Graph::Value semantic_score_value(Graph& tape, const Model& m,
                                  const ScoringContext& ctx, const Triple& t);

// Message-passing score of an already-prepared subgraph, on the tape.
Graph::Value topological_score_value(Graph& tape, const Model& m,
                                     const LabeledSubgraph& sg, RelationId rel,
                                     bool training, Rng* dropout_rng);

// Full score: semantic + topological, or topological alone when the
// semantic score is disabled.
Graph::Value combined_score_value(Graph& tape, const Model& m,
                                  const ScoringContext& ctx, const Triple& t,
                                  const LabeledSubgraph& sg, bool training,
                                  Rng* dropout_rng);

// Inference-mode scalar score on a throwaway tape (no dropout).
double score_triple(Model& m, const ScoringContext& ctx, const Triple& t);

// Fused profile embedding of one entity as a plain 1 x d tensor.
Tensor fused_embedding(Model& m, const ScoringContext& ctx, EntityId e);

}  // namespace dekg
