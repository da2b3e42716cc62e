// Microbenchmarks for the hot paths: neighbourhood extraction, labeling,
// message passing, and end-to-end triple scoring / ranking.
#include <benchmark/benchmark.h>

#include "dekg/eval.hpp"
#include "dekg/kg.hpp"
#include "dekg/model.hpp"
#include "dekg/subgraph.hpp"
#include "dekg/synthetic.hpp"

namespace {

using namespace dekg;

struct Fixture {
    SyntheticDataset ds = make_synthetic({});
    KnowledgeGraph g;
    TrainConfig cfg;
    Model model;
    ScoringContext ctx;
    Triple candidate;       // a bridging link, absent from the graph
    LabeledSubgraph ready;  // extracted + labeled + cached

    static Fixture& instance() {
        static Fixture f;
        return f;
    }

  private:
    Fixture()
        : g(combined()),
          cfg(config()),
          model(Model::init(cfg, g.n_relations())),
          ctx(g, cfg.direction_aware),
          candidate(ds.bridging.front()),
          ready(make_subgraph(g, candidate, cfg)) {}

    KnowledgeGraph combined() {
        std::vector<Triple> support = ds.train;
        support.insert(support.end(), ds.emerging.begin(), ds.emerging.end());
        return build_graph(ds.vocab, support);
    }

    static TrainConfig config() {
        TrainConfig cfg;
        cfg.d = 32;
        cfg.hops = 2;
        cfg.layers = 2;
        cfg.max_ball_nodes = 200;
        return cfg;
    }
};

void BM_ExtractSubgraph(benchmark::State& state) {
    Fixture& f = Fixture::instance();
    ExtractOptions opts{static_cast<int>(state.range(0)),
                        f.cfg.max_ball_nodes};
    for (auto _ : state) {
        LabeledSubgraph sg = extract_subgraph(
            f.g, f.candidate.head, f.candidate.tail, f.candidate.rel, opts);
        benchmark::DoNotOptimize(sg.nodes.data());
    }
}
BENCHMARK(BM_ExtractSubgraph)->Arg(1)->Arg(2)->Arg(3);

void BM_LabelNodes(benchmark::State& state) {
    Fixture& f = Fixture::instance();
    LabeledSubgraph base =
        extract_subgraph(f.g, f.candidate.head, f.candidate.tail,
                         f.candidate.rel, {f.cfg.hops, f.cfg.max_ball_nodes});
    for (auto _ : state) {
        LabeledSubgraph sg = base;  // labeling prunes in place
        label_nodes(sg, f.cfg.hops, LabelingMode::Improved);
        benchmark::DoNotOptimize(sg.labels.data());
    }
}
BENCHMARK(BM_LabelNodes);

void BM_MessagePassing(benchmark::State& state) {
    Fixture& f = Fixture::instance();
    Tensor features = encode_labels(f.ready, f.cfg.hops);
    for (auto _ : state) {
        Graph tape(&f.model.store);
        Graph::Value score = topological_score_value(
            tape, f.model, f.ready, f.candidate.rel, false, nullptr);
        benchmark::DoNotOptimize(tape.value(score).item());
    }
    state.counters["nodes"] = static_cast<double>(f.ready.n_nodes());
    benchmark::DoNotOptimize(features.data.data());
}
BENCHMARK(BM_MessagePassing);

void BM_FusedEmbedding(benchmark::State& state) {
    Fixture& f = Fixture::instance();
    for (auto _ : state) {
        Tensor e = fused_embedding(f.model, f.ctx, f.candidate.head);
        benchmark::DoNotOptimize(e.data.data());
    }
}
BENCHMARK(BM_FusedEmbedding);

void BM_ScoreTriple(benchmark::State& state) {
    Fixture& f = Fixture::instance();
    for (auto _ : state)
        benchmark::DoNotOptimize(score_triple(f.model, f.ctx, f.candidate));
}
BENCHMARK(BM_ScoreTriple);

void BM_FilteredRank(benchmark::State& state) {
    Fixture& f = Fixture::instance();
    TripleSet known(f.g.triples.begin(), f.g.triples.end());
    known.insert(f.ds.bridging.begin(), f.ds.bridging.end());
    Query q{QueryPattern::Tail, f.candidate, LinkClass::Bridging};
    for (auto _ : state) {
        RankResult r = filtered_rank(f.model, f.ctx, q, known,
                                     TieMode::Average);
        benchmark::DoNotOptimize(r.rank);
    }
}
BENCHMARK(BM_FilteredRank);

}  // namespace

BENCHMARK_MAIN();
