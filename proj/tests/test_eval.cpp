#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dekg/error.hpp"
#include "dekg/eval.hpp"
#include "dekg/kg.hpp"
#include "dekg/model.hpp"
#include "doctest.h"

using namespace dekg;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

KnowledgeGraph ring_graph() {
    std::ostringstream text;
    for (int i = 0; i < 8; ++i)
        text << "e" << i << "\tr" << (i % 2) << "\te" << ((i + 1) % 8) << '\n';
    for (int i : {0, 2, 4})
        text << "e" << i << "\tr0\te" << ((i + 3) % 8) << '\n';
    return parse_triples(text.str());
}

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.d = 6;
    cfg.d_att = 3;
    cfg.hops = 1;
    cfg.layers = 1;
    cfg.max_ball_nodes = 32;
    cfg.workers = 1;
    cfg.seed = 21;
    return cfg;
}

TripleSet known_set(const KnowledgeGraph& g,
                    const std::vector<std::vector<Triple>>& pools) {
    TripleSet known(g.triples.begin(), g.triples.end());
    for (const auto& pool : pools) known.insert(pool.begin(), pool.end());
    return known;
}

// Candidate enumeration, filtering and tie handling redone from scratch; the
// only shared machinery is the single-triple scorer.
double oracle_rank(Model& m, const ScoringContext& ctx, const Query& q,
                   const TripleSet& known, TieMode tie) {
    const KnowledgeGraph& g = ctx.graph();
    std::vector<double> others;
    double truth_score = 0.0;
    if (q.pattern == QueryPattern::Relation) {
        for (RelationId r = 0; r < g.n_relations(); ++r) {
            Triple cand{q.truth.head, r, q.truth.tail};
            if (r != q.truth.rel && known.count(cand)) continue;
            double s = score_triple(m, ctx, cand);
            (r == q.truth.rel ? truth_score : others.emplace_back()) = s;
        }
    } else {
        const bool corrupt_tail = q.pattern == QueryPattern::Tail;
        const EntityId fixed = corrupt_tail ? q.truth.head : q.truth.tail;
        const EntityId answer = corrupt_tail ? q.truth.tail : q.truth.head;
        for (EntityId e = 0; e < g.n_entities(); ++e) {
            Triple cand = q.truth;
            (corrupt_tail ? cand.tail : cand.head) = e;
            if (e != answer && known.count(cand)) continue;
            double s = e == fixed ? -kInf : score_triple(m, ctx, cand);
            (e == answer ? truth_score : others.emplace_back()) = s;
        }
    }
    std::size_t higher = 0, tied = 0;
    for (double s : others) {
        if (s > truth_score) ++higher;
        if (s == truth_score) ++tied;
    }
    double h = static_cast<double>(higher);
    double t = static_cast<double>(tied);
    if (tie == TieMode::Average) return h + 1.0 + t / 2.0;
    if (tie == TieMode::Pessimistic) return h + t + 1.0;
    return h + 1.0;
}

}  // namespace

TEST_CASE("rank_from_scores counts strictly-higher scores plus ties") {
    SUBCASE("truth on top") {
        std::vector<double> others = {1.0, 2.0, 3.0};
        for (TieMode tie : {TieMode::Average, TieMode::Pessimistic,
                            TieMode::Optimistic})
            CHECK(rank_from_scores(5.0, others, tie) == 1.0);
    }
    SUBCASE("one candidate above") {
        std::vector<double> others = {3.0, 1.0};
        for (TieMode tie : {TieMode::Average, TieMode::Pessimistic,
                            TieMode::Optimistic})
            CHECK(rank_from_scores(2.0, others, tie) == 2.0);
    }
    SUBCASE("one exact tie") {
        std::vector<double> others = {2.0, 1.0};
        CHECK(rank_from_scores(2.0, others, TieMode::Average) == 1.5);
        CHECK(rank_from_scores(2.0, others, TieMode::Pessimistic) == 2.0);
        CHECK(rank_from_scores(2.0, others, TieMode::Optimistic) == 1.0);
    }
    SUBCASE("minus infinity never outranks a finite truth") {
        std::vector<double> others = {-kInf, -kInf, 0.5};
        CHECK(rank_from_scores(1.0, others, TieMode::Pessimistic) == 1.0);
    }
    SUBCASE("invariant under a monotone transform") {
        std::vector<double> others = {0.3, -1.2, 7.0, 0.3, 2.5};
        std::vector<double> mapped;
        for (double s : others) mapped.push_back(2.0 * s + 1.0);
        for (TieMode tie : {TieMode::Average, TieMode::Pessimistic,
                            TieMode::Optimistic})
            CHECK(rank_from_scores(0.3, others, tie) ==
                  rank_from_scores(2.0 * 0.3 + 1.0, mapped, tie));
    }
}

TEST_CASE("mrr and hits handle fractional ranks") {
    auto results = [](std::initializer_list<double> ranks) {
        std::vector<RankResult> out;
        for (double r : ranks) {
            RankResult res;
            res.rank = r;
            out.push_back(res);
        }
        return out;
    };
    CHECK(mrr(results({1.0, 2.0, 4.0})) == doctest::Approx(7.0 / 12.0));
    CHECK(hits_at(results({1.5, 10.0, 10.5}), 1.0) == doctest::Approx(0.0));
    CHECK(hits_at(results({1.5, 10.0, 10.5}), 10.0) ==
          doctest::Approx(2.0 / 3.0));
    CHECK(hits_at(results({1.0, 1.5}), 1.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(mrr({}), DataError);
    CHECK_THROWS_AS(hits_at({}, 10.0), DataError);
}

TEST_CASE("filtered_rank agrees with a brute-force oracle") {
    KnowledgeGraph g = ring_graph();
    TrainConfig cfg = small_config();
    Model m = Model::init(cfg, g.n_relations());
    ScoringContext ctx(g, cfg.direction_aware);

    std::vector<Triple> links = {
        {0, 0, 2},  // e0 r0 e2
        {5, 1, 1},  // e5 r1 e1
        {7, 0, 4},  // e7 r0 e4
    };
    for (const Triple& t : links) REQUIRE(!g.has_triple(t));
    TripleSet known = known_set(g, {links});

    for (const Triple& t : links) {
        for (QueryPattern p : {QueryPattern::Head, QueryPattern::Relation,
                               QueryPattern::Tail}) {
            for (TieMode tie : {TieMode::Average, TieMode::Pessimistic,
                                TieMode::Optimistic}) {
                Query q{p, t, LinkClass::Enclosing};
                RankResult res = filtered_rank(m, ctx, q, known, tie);
                CHECK(res.rank ==
                      doctest::Approx(oracle_rank(m, ctx, q, known, tie))
                          .epsilon(1e-12));
                CHECK(res.rank >= 1.0);
                std::size_t pool = p == QueryPattern::Relation
                                       ? g.n_relations()
                                       : g.n_entities();
                CHECK(res.n_candidates >= 1);
                CHECK(res.n_candidates <= pool);
            }
        }
    }
}

TEST_CASE("an all-zero model ties every scorable candidate") {
    KnowledgeGraph g = ring_graph();
    TrainConfig cfg = small_config();
    Model m = Model::init(cfg, g.n_relations());
    for (ParameterStore::SlotId s = 0; s < m.store.size(); ++s) {
        std::size_t rows = m.store.value(s).rows;
        std::size_t cols = m.store.value(s).cols;
        m.store.mutable_value(s) = Tensor(rows, cols);
    }

    ScoringContext ctx(g, cfg.direction_aware);
    Triple link{0, 0, 2};
    TripleSet known = known_set(g, {{link}});
    Query q{QueryPattern::Head, link, LinkClass::Enclosing};

    RankResult res = filtered_rank(m, ctx, q, known, TieMode::Average);
    // One survivor (the fixed tail itself) sits at -inf; every other
    // candidate scores exactly zero.
    double finite = static_cast<double>(res.n_candidates - 1);
    CHECK(res.rank == doctest::Approx(1.0 + (finite - 1.0) / 2.0));
    CHECK(filtered_rank(m, ctx, q, known, TieMode::Pessimistic).rank ==
          doctest::Approx(finite));
    CHECK(filtered_rank(m, ctx, q, known, TieMode::Optimistic).rank == 1.0);
}

TEST_CASE("filtering a stronger candidate improves the rank") {
    KnowledgeGraph g = ring_graph();
    TrainConfig cfg = small_config();
    Model m = Model::init(cfg, g.n_relations());
    ScoringContext ctx(g, cfg.direction_aware);

    // Find a query whose truth is outranked by some candidate head, then
    // declare that candidate known and watch the rank improve.
    std::vector<Triple> links = {{0, 0, 2}, {1, 1, 3}, {5, 0, 7}, {6, 1, 2}};
    bool exercised = false;
    for (const Triple& link : links) {
        REQUIRE(!g.has_triple(link));
        TripleSet known = known_set(g, {{link}});
        double truth_score = score_triple(m, ctx, link);
        EntityId stronger = g.n_entities();
        for (EntityId e = 0; e < g.n_entities(); ++e) {
            if (e == link.head || e == link.tail) continue;
            Triple cand{e, link.rel, link.tail};
            if (known.count(cand)) continue;
            if (score_triple(m, ctx, cand) > truth_score) {
                stronger = e;
                break;
            }
        }
        if (stronger == g.n_entities()) continue;  // truth already on top

        Query q{QueryPattern::Head, link, LinkClass::Enclosing};
        RankResult base = filtered_rank(m, ctx, q, known, TieMode::Average);
        known.insert(Triple{stronger, link.rel, link.tail});
        RankResult filtered = filtered_rank(m, ctx, q, known, TieMode::Average);
        CHECK(filtered.rank < base.rank);
        CHECK(filtered.n_candidates == base.n_candidates - 1);
        exercised = true;
    }
    CHECK(exercised);
}

TEST_CASE("filtered_rank rejects self-pair truths") {
    KnowledgeGraph g = ring_graph();
    TrainConfig cfg = small_config();
    Model m = Model::init(cfg, g.n_relations());
    ScoringContext ctx(g, cfg.direction_aware);
    Query q{QueryPattern::Head, Triple{3, 0, 3}, LinkClass::Enclosing};
    CHECK_THROWS_AS(filtered_rank(m, ctx, q, {}, TieMode::Average), DataError);
}

namespace {

struct EvalFixture {
    KnowledgeGraph g = ring_graph();
    TrainConfig cfg = small_config();
    Model m = Model::init(cfg, g.n_relations());
    ScoringContext ctx{g, cfg.direction_aware};
    std::vector<Triple> enclosing = {{0, 0, 2}, {1, 1, 3}, {2, 0, 4},
                                     {3, 0, 5}, {4, 1, 6}, {5, 0, 7}};
    std::vector<Triple> bridging = {{1, 0, 4}, {6, 1, 0}, {7, 0, 2}};
    TripleSet known = known_set(g, {enclosing, bridging});

    EvalFixture() {
        for (const Triple& t : enclosing) REQUIRE(!g.has_triple(t));
        for (const Triple& t : bridging) REQUIRE(!g.has_triple(t));
    }

    EvalReport run(EvalOptions opts) {
        return evaluate(m, ctx, enclosing, bridging, known, opts);
    }
};

}  // namespace

TEST_CASE("evaluate emits twelve rows in a fixed order") {
    EvalFixture fx;
    EvalReport report = fx.run({.seeds = {1}});
    REQUIRE(report.rows.size() == 12);
    const char* splits[3] = {"all", "enclosing", "bridging"};
    const char* patterns[4] = {"all", "head", "relation", "tail"};
    for (int s = 0; s < 3; ++s) {
        for (int p = 0; p < 4; ++p) {
            const MetricRow& row = report.rows[s * 4 + p];
            CHECK(row.split == splits[s]);
            CHECK(row.pattern == patterns[p]);
        }
    }
}

TEST_CASE("evaluate pools queries per split and pattern") {
    EvalFixture fx;
    EvalReport report = fx.run({.seeds = {1, 2}});

    // EQ ratio over pools of 6 and 3 selects 3 + 3 links per seed.
    const std::size_t links = 3, seeds = 2;
    for (const char* split : {"enclosing", "bridging"}) {
        for (const char* pattern : {"head", "relation", "tail"})
            CHECK(report.row(split, pattern).n_queries == links * seeds);
        CHECK(report.row(split, "all").n_queries == 3 * links * seeds);
    }
    CHECK(report.row("all", "all").n_queries == 2 * 3 * links * seeds);
    for (const MetricRow& row : report.rows) CHECK(row.seeds == seeds);

    // Every "all" cell is the query-weighted pool of its parts.
    auto pooled = [&](const char* pattern) {
        const MetricRow& enc = report.row("enclosing", pattern);
        const MetricRow& brg = report.row("bridging", pattern);
        const MetricRow& all = report.row("all", pattern);
        double n = static_cast<double>(all.n_queries);
        CHECK(all.n_queries == enc.n_queries + brg.n_queries);
        CHECK(all.mrr * n ==
              doctest::Approx(enc.mrr * enc.n_queries + brg.mrr * brg.n_queries)
                  .epsilon(1e-9));
        CHECK(all.hits10 * n ==
              doctest::Approx(enc.hits10 * enc.n_queries +
                              brg.hits10 * brg.n_queries)
                  .epsilon(1e-9));
    };
    pooled("head");
    pooled("relation");
    pooled("tail");
    pooled("all");

    // Relation queries rank over two relations only, so every rank is <= 2
    // and Hits@5 is saturated.
    CHECK(report.row("all", "relation").hits5 == 1.0);
}

TEST_CASE("evaluate is deterministic and worker-count independent") {
    EvalFixture fx;
    EvalOptions opts{.seeds = {7, 8}, .workers = 1};
    std::string once = report_csv(fx.run(opts));
    std::string twice = report_csv(fx.run(opts));
    CHECK(once == twice);

    opts.workers = 4;
    CHECK(report_csv(fx.run(opts)) == once);
}

TEST_CASE("different seeds re-mix the evaluation set") {
    EvalFixture fx;
    // The enclosing pool (6 links) is subsampled to 3, so the seed matters.
    EvalSet a = build_eval_set(fx.enclosing, fx.bridging, MixRatio::EQ, 1);
    EvalSet b = build_eval_set(fx.enclosing, fx.bridging, MixRatio::EQ, 2);
    REQUIRE(a.enclosing != b.enclosing);
    CHECK(report_csv(fx.run({.seeds = {1}})) !=
          report_csv(fx.run({.seeds = {2}})));
}

TEST_CASE("evaluate validates its options and inputs") {
    EvalFixture fx;
    CHECK_THROWS_AS(fx.run({.seeds = {}}), DataError);

    EvalFixture bad;
    bad.enclosing = {Triple{3, 0, 3}};  // the only pick, so always selected
    CHECK_THROWS_AS(
        evaluate(bad.m, bad.ctx, bad.enclosing, bad.bridging, bad.known,
                 {.seeds = {1}}),
        DataError);
}

TEST_CASE("report CSV format") {
    EvalFixture fx;
    EvalReport report = fx.run({.seeds = {1}});
    std::string csv = report_csv(report);
    std::istringstream lines(csv);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "split,pattern,MRR,Hits@1,Hits@5,Hits@10,n_queries,seeds");
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 7);
    }
    CHECK(rows == 12);
    CHECK(csv.substr(csv.find('\n') + 1, 8) == "all,all,");  // first data row
}

TEST_CASE("row lookup names missing cells") {
    EvalReport empty;
    CHECK_THROWS_WITH_AS(empty.row("all", "head"),
                         doctest::Contains("no report row"), DataError);
}

TEST_CASE("print_report walks all rows with aligned columns") {
    EvalFixture fx;
    EvalReport report = fx.run({.seeds = {1}});
    std::ostringstream out;
    print_report(report, out);
    std::istringstream lines(out.str());
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line.substr(0, 5) == "split");
    std::size_t rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 12);
}
