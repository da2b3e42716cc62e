#include "dekg/model.hpp"

#include <cmath>

#include "dekg/error.hpp"

namespace dekg {

Model Model::init(TrainConfig cfg, std::size_t n_relations) {
    validate(cfg);
    if (n_relations == 0) throw DataError("model needs at least one relation");
    Model m;
    m.cfg = cfg;
    m.n_relations = n_relations;
    Rng rng = Rng(cfg.seed).stream("init");
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.d));
    m.feature_bank = m.store.add_uniform("profile.features", m.n_axes(), cfg.d,
                                         rng, bound);
    // Relation vectors act as a diagonal metric between two fused embeddings;
    // starting them at unit scale puts the profile score on the same footing
    // as a bilinear form instead of a vanishing triple product.
    m.rel_sem = m.store.add_uniform("profile.rel_sem", n_relations, cfg.d, rng,
                                    1.0);
    m.gnn = init_gnn_slots(m.store, n_relations, m.label_width(), cfg.d,
                           cfg.layers, cfg.d_att, rng);
    return m;
}

ScoringContext::ScoringContext(const KnowledgeGraph& g, bool direction_aware)
    : g_(&g) {
    tables_.reserve(g.n_entities());
    for (EntityId e = 0; e < g.n_entities(); ++e)
        tables_.push_back(build_table(g, e, direction_aware));
}

LabeledSubgraph make_subgraph(const KnowledgeGraph& g, const Triple& t,
                              const TrainConfig& cfg) {
    ExtractOptions opts;
    opts.hops = cfg.hops;
    opts.max_ball_nodes = cfg.max_ball_nodes;
    LabeledSubgraph sg = extract_subgraph(g, t.head, t.tail, t.rel, opts);
    label_nodes(sg, cfg.hops,
                cfg.disable_improved_labeling ? LabelingMode::Pruned
                                              : LabelingMode::Improved);
    return sg;
}

Graph::Value semantic_score_value(Graph& tape, const Model& m,
                                  const ScoringContext& ctx, const Triple& t) {
    Graph::Value bank = tape.param(m.feature_bank);
    Graph::Value ei = fuse(tape, ctx.table(t.head), bank);
    Graph::Value ej = fuse(tape, ctx.table(t.tail), bank);
    return semantic_score(tape, ei, t.rel, ej, tape.param(m.rel_sem));
}

Graph::Value topological_score_value(Graph& tape, const Model& m,
                                     const LabeledSubgraph& sg, RelationId rel,
                                     bool training, Rng* dropout_rng) {
    Graph::Value features = tape.constant(encode_labels(sg, m.cfg.hops));
    GnnOutput out = gnn_forward(tape, sg, features, m.gnn, rel, m.cfg.beta,
                                training, dropout_rng);
    return topological_score(tape, out, rel, m.gnn);
}

Graph::Value combined_score_value(Graph& tape, const Model& m,
                                  const ScoringContext& ctx, const Triple& t,
                                  const LabeledSubgraph& sg, bool training,
                                  Rng* dropout_rng) {
    Graph::Value tpo =
        topological_score_value(tape, m, sg, t.rel, training, dropout_rng);
    if (m.cfg.disable_semantic_score) return tpo;
    return tape.add(semantic_score_value(tape, m, ctx, t), tpo);
}

double score_triple(Model& m, const ScoringContext& ctx, const Triple& t) {
    Graph tape(&m.store);
    LabeledSubgraph sg = make_subgraph(ctx.graph(), t, m.cfg);
    Graph::Value phi =
        combined_score_value(tape, m, ctx, t, sg, /*training=*/false, nullptr);
    return tape.value(phi).item();
}

Tensor fused_embedding(Model& m, const ScoringContext& ctx, EntityId e) {
    Graph tape(&m.store);
    return tape.value(fuse(tape, ctx.table(e), tape.param(m.feature_bank)));
}

}  // namespace dekg
