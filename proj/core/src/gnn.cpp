#include "dekg/gnn.hpp"

#include <cmath>
#include <string>

#include "dekg/error.hpp"

namespace dekg {

GnnSlots init_gnn_slots(ParameterStore& store, std::size_t n_relations,
                        std::size_t in_width, std::size_t hidden,
                        std::size_t n_layers, std::size_t d_att, Rng& rng) {
    if (n_relations == 0) throw DataError("gnn needs at least one relation");
    if (n_layers == 0) throw DataError("gnn needs at least one layer");
    auto bound = [](std::size_t fan_in) {
        return 1.0 / std::sqrt(static_cast<double>(fan_in));
    };
    GnnSlots s;
    for (std::size_t l = 0; l < n_layers; ++l) {
        std::size_t in = l == 0 ? in_width : hidden;
        std::string tag = "gnn.l" + std::to_string(l);
        s.self.push_back(store.add_uniform(tag + ".self", in, hidden, rng, bound(in)));
        s.fwd.emplace_back();
        s.inv.emplace_back();
        for (std::size_t r = 0; r < n_relations; ++r) {
            std::string rel = tag + ".r" + std::to_string(r);
            s.fwd.back().push_back(
                store.add_uniform(rel + ".fwd", in, hidden, rng, bound(in)));
            s.inv.back().push_back(
                store.add_uniform(rel + ".inv", in, hidden, rng, bound(in)));
        }
        s.att_bilinear.push_back(
            store.add_uniform(tag + ".att", d_att, d_att, rng, bound(d_att)));
    }
    s.att_embed = store.add_uniform("gnn.att_embed", n_relations, d_att, rng,
                                    bound(d_att));
    s.rel_tpo = store.add_uniform("gnn.rel_tpo", n_relations, hidden, rng,
                                  bound(hidden));
    s.score_w = store.add_uniform("gnn.score_w", 4 * hidden, 1, rng,
                                  bound(4 * hidden));
    return s;
}

namespace {

// Kept edges bucketed by relation, as parallel source/destination index lists.
struct RelationEdges {
    std::vector<std::uint32_t> src;
    std::vector<std::uint32_t> dst;
};

}  // namespace

GnnOutput gnn_forward(Graph& g, const LabeledSubgraph& sg, Graph::Value features,
                      const GnnSlots& slots, RelationId target_rel,
                      double edge_dropout, bool training, Rng* dropout_rng) {
    const std::size_t n = sg.n_nodes();
    if (n < 2) throw DataError("gnn forward needs both endpoints present");
    if (g.value(features).rows != n)
        throw DataError("feature row count does not match subgraph");
    if (training && edge_dropout > 0.0 && dropout_rng == nullptr)
        throw DataError("edge dropout needs an rng");

    const std::size_t n_rel = slots.fwd.empty() ? 0 : slots.fwd.front().size();
    if (target_rel >= n_rel) throw DataError("target relation out of range");

    std::vector<RelationEdges> by_rel(n_rel);
    for (const auto& e : sg.edges) {
        if (e.rel >= n_rel) throw DataError("edge relation out of range");
        if (training && edge_dropout > 0.0 &&
            dropout_rng->uniform() < edge_dropout)
            continue;
        by_rel[e.rel].src.push_back(e.head);
        by_rel[e.rel].dst.push_back(e.tail);
    }

    Graph::Value target_att = g.gather_rows(g.param(slots.att_embed), {target_rel});
    Graph::Value h = features;
    for (std::size_t l = 0; l < slots.n_layers(); ++l) {
        Graph::Value acc = g.matmul(h, g.param(slots.self[l]));
        for (RelationId r = 0; r < n_rel; ++r) {
            const auto& edges = by_rel[r];
            if (edges.src.empty()) continue;
            Graph::Value r_att = g.gather_rows(g.param(slots.att_embed), {r});
            Graph::Value alpha = g.sigmoid(g.sum(g.mul(
                g.matmul(r_att, g.param(slots.att_bilinear[l])), target_att)));
            Graph::Value fwd = g.scatter_rows(
                g.mul_scalar(g.matmul(g.gather_rows(h, edges.src),
                                      g.param(slots.fwd[l][r])),
                             alpha),
                edges.dst, n);
            Graph::Value inv = g.scatter_rows(
                g.mul_scalar(g.matmul(g.gather_rows(h, edges.dst),
                                      g.param(slots.inv[l][r])),
                             alpha),
                edges.src, n);
            acc = g.add(acc, g.add(fwd, inv));
        }
        h = g.relu(acc);
    }

    GnnOutput out;
    out.nodes = h;
    out.pooled = g.mean_rows(h);
    out.head = g.gather_rows(h, {0});
    out.tail = g.gather_rows(h, {1});
    return out;
}

Graph::Value topological_score(Graph& g, const GnnOutput& out,
                               RelationId target_rel, const GnnSlots& slots) {
    Graph::Value rel = g.gather_rows(g.param(slots.rel_tpo), {target_rel});
    Graph::Value feats =
        g.concat(g.concat(out.pooled, out.head), g.concat(out.tail, rel));
    return g.matmul(feats, g.param(slots.score_w));
}

}  // namespace dekg
