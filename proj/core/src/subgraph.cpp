#include "dekg/subgraph.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <unordered_map>

#include "dekg/error.hpp"

namespace dekg {

namespace {

// Breadth-first ball of radius `hops` around `center` over undirected
// adjacency, skipping the candidate edge. Returns nodes in discovery order,
// center first, at most `cap` of them.
std::vector<EntityId> ball(const KnowledgeGraph& g, EntityId center, int hops,
                           EntityId ei, EntityId ej, RelationId rk,
                           std::size_t cap) {
    std::vector<EntityId> nodes{center};
    if (cap <= 1 || hops == 0) return nodes;
    std::vector<char> seen(g.n_entities(), 0);
    seen[center] = 1;
    std::deque<std::pair<EntityId, int>> frontier{{center, 0}};
    auto visit = [&](EntityId next) {
        if (!seen[next] && nodes.size() < cap) {
            seen[next] = 1;
            nodes.push_back(next);
            frontier.emplace_back(next, 0);  // depth patched by caller
        }
    };
    while (!frontier.empty()) {
        auto [u, depth] = frontier.front();
        frontier.pop_front();
        if (depth >= hops || nodes.size() >= cap) continue;
        std::size_t before = frontier.size();
        for (const auto& [rel, v] : g.out_adj[u]) {
            if (u == ei && rel == rk && v == ej) continue;
            visit(v);
        }
        for (const auto& [rel, v] : g.in_adj[u]) {
            if (v == ei && rel == rk && u == ej) continue;
            visit(v);
        }
        for (std::size_t i = before; i < frontier.size(); ++i)
            frontier[i].second = depth + 1;
    }
    return nodes;
}

// Double-radius component from one endpoint over the (undirected) subgraph
// edges. `blocked` is the local index to avoid entirely, or -1 for none.
std::vector<int> distances(const LabeledSubgraph& sg, std::uint32_t source,
                           int blocked, int hops) {
    std::vector<std::vector<std::uint32_t>> adj(sg.n_nodes());
    for (const auto& e : sg.edges) {
        adj[e.head].push_back(e.tail);
        adj[e.tail].push_back(e.head);
    }
    std::vector<int> dist(sg.n_nodes(), -1);
    if (static_cast<int>(source) == blocked) return dist;
    dist[source] = 0;
    std::deque<std::uint32_t> frontier{source};
    while (!frontier.empty()) {
        std::uint32_t u = frontier.front();
        frontier.pop_front();
        if (dist[u] >= hops) continue;
        for (std::uint32_t v : adj[u]) {
            if (dist[v] != -1 || static_cast<int>(v) == blocked) continue;
            dist[v] = dist[u] + 1;
            frontier.push_back(v);
        }
    }
    return dist;
}

void keep_nodes(LabeledSubgraph& sg, const std::vector<char>& keep) {
    std::vector<std::uint32_t> remap(sg.n_nodes(), 0);
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < sg.n_nodes(); ++i)
        if (keep[i]) remap[i] = next++;
    std::vector<EntityId> nodes;
    std::vector<std::pair<int, int>> labels;
    nodes.reserve(next);
    labels.reserve(next);
    for (std::size_t i = 0; i < sg.n_nodes(); ++i) {
        if (!keep[i]) continue;
        nodes.push_back(sg.nodes[i]);
        labels.push_back(sg.labels[i]);
    }
    std::vector<LabeledSubgraph::Edge> edges;
    edges.reserve(sg.edges.size());
    for (const auto& e : sg.edges) {
        if (!keep[e.head] || !keep[e.tail]) continue;
        edges.push_back({remap[e.head], e.rel, remap[e.tail]});
    }
    sg.nodes = std::move(nodes);
    sg.labels = std::move(labels);
    sg.edges = std::move(edges);
}

}  // namespace

LabeledSubgraph extract_subgraph(const KnowledgeGraph& g, EntityId ei,
                                 EntityId ej, RelationId rk,
                                 const ExtractOptions& opts) {
    if (ei >= g.n_entities() || ej >= g.n_entities())
        throw DataError("subgraph endpoint out of range");
    if (rk >= g.n_relations()) throw DataError("subgraph relation out of range");
    if (ei == ej) throw DataError("subgraph endpoints must differ");
    if (opts.hops < 1) throw DataError("hop budget must be at least 1");
    if (opts.max_ball_nodes < 1) throw DataError("ball cap must be at least 1");

    LabeledSubgraph sg;
    sg.nodes.push_back(ei);
    sg.nodes.push_back(ej);
    std::unordered_map<EntityId, std::uint32_t> local;
    local.reserve(2 * opts.max_ball_nodes);
    local[ei] = 0;
    local[ej] = 1;
    for (EntityId center : {ei, ej}) {
        for (EntityId u : ball(g, center, opts.hops, ei, ej, rk, opts.max_ball_nodes)) {
            if (local.emplace(u, static_cast<std::uint32_t>(sg.nodes.size())).second)
                sg.nodes.push_back(u);
        }
    }

    for (std::uint32_t lu = 0; lu < sg.n_nodes(); ++lu) {
        EntityId u = sg.nodes[lu];
        for (const auto& [rel, v] : g.out_adj[u]) {
            if (u == ei && rel == rk && v == ej) continue;
            auto it = local.find(v);
            if (it != local.end()) sg.edges.push_back({lu, rel, it->second});
        }
    }
    return sg;
}

void label_nodes(LabeledSubgraph& sg, int hops, LabelingMode mode) {
    if (sg.n_nodes() < 2) throw DataError("labeling needs both endpoints present");
    const bool avoid_other = mode == LabelingMode::Improved;
    std::vector<int> from_head = distances(sg, 0, avoid_other ? 1 : -1, hops);
    std::vector<int> from_tail = distances(sg, 1, avoid_other ? 0 : -1, hops);
    sg.labels.resize(sg.n_nodes());
    for (std::size_t i = 0; i < sg.n_nodes(); ++i)
        sg.labels[i] = {from_head[i], from_tail[i]};
    sg.labels[0] = {0, 1};
    sg.labels[1] = {1, 0};

    std::vector<char> keep(sg.n_nodes(), 0);
    keep[0] = keep[1] = 1;
    bool drop_any = false;
    for (std::size_t i = 2; i < sg.n_nodes(); ++i) {
        const auto& [dh, dt] = sg.labels[i];
        bool out = (mode == LabelingMode::Pruned) ? (dh == -1 || dt == -1)
                                                  : (dh == -1 && dt == -1);
        keep[i] = !out;
        drop_any = drop_any || out;
    }
    if (drop_any) keep_nodes(sg, keep);
}

Tensor encode_labels(const LabeledSubgraph& sg, int hops) {
    if (sg.labels.size() != sg.n_nodes())
        throw DataError("subgraph has no labels to encode");
    const std::size_t block = static_cast<std::size_t>(hops) + 1;
    Tensor out(sg.n_nodes(), 2 * block);
    for (std::size_t i = 0; i < sg.n_nodes(); ++i) {
        const auto& [dh, dt] = sg.labels[i];
        if (dh > hops || dt > hops || dh < -1 || dt < -1)
            throw DataError("node label out of range for one-hot encoding");
        if (dh >= 0) out.at(i, static_cast<std::size_t>(dh)) = 1.0;
        if (dt >= 0) out.at(i, block + static_cast<std::size_t>(dt)) = 1.0;
    }
    return out;
}

void export_subgraph(const LabeledSubgraph& sg, const Vocabulary& vocab,
                     std::ostream& out) {
    for (std::size_t i = 0; i < sg.n_nodes(); ++i) {
        out << "node " << i << ' ' << vocab.entity_token(sg.nodes[i]);
        if (i < sg.labels.size())
            out << ' ' << sg.labels[i].first << ' ' << sg.labels[i].second;
        out << '\n';
    }
    for (const auto& e : sg.edges) {
        out << "edge " << vocab.entity_token(sg.nodes[e.head]) << ' '
            << vocab.relation_token(e.rel) << ' '
            << vocab.entity_token(sg.nodes[e.tail]) << '\n';
    }
}

}  // namespace dekg
