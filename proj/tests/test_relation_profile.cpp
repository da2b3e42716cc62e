#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "dekg/error.hpp"
#include "dekg/kg.hpp"
#include "dekg/relation_profile.hpp"
#include "dekg/rng.hpp"
#include "doctest.h"

using namespace dekg;

namespace {

Tensor fuse_now(const RelationComponentTable& table, const Tensor& features) {
    Graph g;
    return g.value(fuse(g, table, g.constant(features)));
}

RelationComponentTable random_table(Rng& rng, std::size_t n_axes) {
    std::size_t size = 1 + rng.below(n_axes);
    std::vector<RelationComponentTable::Entry> entries;
    std::vector<RelationId> axes(n_axes);
    for (std::size_t i = 0; i < n_axes; ++i) axes[i] = static_cast<RelationId>(i);
    for (std::size_t i = 0; i < size; ++i) {
        std::size_t j = i + rng.below(n_axes - i);
        std::swap(axes[i], axes[j]);
        entries.push_back({axes[i], static_cast<std::uint32_t>(1 + rng.below(9))});
    }
    return RelationComponentTable(std::move(entries));
}

}  // namespace

TEST_CASE("tables count incident triples per relation") {
    KnowledgeGraph g = parse_triples("e\tr0\tx\ny\tr0\te\ne\tr1\tz\n");
    EntityId e = *g.vocab.entity("e");
    RelationComponentTable t = build_table(g, e);
    CHECK(t.entries() == std::vector<RelationComponentTable::Entry>{{0, 2}, {1, 1}});
    CHECK(t.count(0) == 2);
    CHECK(t.count(1) == 1);
    CHECK(t.count(7) == 0);
    CHECK(t.support_size() == 2);
    CHECK(t.total() == 3);
    CHECK(mean_count(t) == 1.5);

    // x participates once, as a tail.
    CHECK(build_table(g, *g.vocab.entity("x")).entries() ==
          std::vector<RelationComponentTable::Entry>{{0, 1}});
    CHECK_THROWS_AS((void)build_table(g, 99), DataError);
}

TEST_CASE("direction-aware axes split head and tail roles") {
    KnowledgeGraph g = parse_triples("e\tr0\tx\ny\tr0\te\ne\tr1\tz\n");
    EntityId e = *g.vocab.entity("e");
    RelationComponentTable t = build_table(g, e, true);
    // axis 2r = as-head, 2r+1 = as-tail
    CHECK(t.entries() ==
          std::vector<RelationComponentTable::Entry>{{0, 1}, {1, 1}, {2, 1}});
    CHECK(relation_axis_count(3, false) == 3);
    CHECK(relation_axis_count(3, true) == 6);
    CHECK(relation_axis_name(g.vocab, 0, true) == "r0#head");
    CHECK(relation_axis_name(g.vocab, 1, true) == "r0#tail");
    CHECK(relation_axis_name(g.vocab, 1, false) == "r1");
}

TEST_CASE("a self-loop counts once agnostic, twice direction-aware") {
    KnowledgeGraph g = parse_triples("e\tr0\te\n");
    CHECK(build_table(g, 0).entries() ==
          std::vector<RelationComponentTable::Entry>{{0, 1}});
    CHECK(build_table(g, 0, true).entries() ==
          std::vector<RelationComponentTable::Entry>{{0, 1}, {1, 1}});
}

TEST_CASE("table mutation keeps entries sorted and positive") {
    RelationComponentTable t;
    CHECK(t.empty());
    t.set(5, 2);
    t.set(1, 7);
    CHECK(t.entries() == std::vector<RelationComponentTable::Entry>{{1, 7}, {5, 2}});
    t.set(5, 0);  // erase
    CHECK(t.support() == std::vector<RelationId>{1});
    CHECK_THROWS_AS(RelationComponentTable({{0, 0}}), DataError);
    CHECK_THROWS_AS(RelationComponentTable({{0, 1}, {0, 2}}), DataError);
    CHECK_THROWS_AS((void)mean_count(RelationComponentTable{}), NumericError);

    RelationComponentTable a({{0, 1}, {2, 5}});
    RelationComponentTable b({{0, 9}, {2, 1}});
    RelationComponentTable c({{0, 1}, {3, 5}});
    CHECK(a.same_support(b));
    CHECK_FALSE(a.same_support(c));
}

TEST_CASE("fusion is the count-weighted feature average") {
    Tensor features = Tensor::from_rows({{3.0, 9.0}, {6.0, 0.0}, {100.0, 100.0}});
    RelationComponentTable t({{0, 2}, {1, 1}});
    Tensor fused = fuse_now(t, features);
    // (2*f0 + 1*f1) / 3
    CHECK(fused.at(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(fused.at(0, 1) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)fuse_now(RelationComponentTable{}, features),
                    NumericError);
}

TEST_CASE("fusion ignores the absolute scale of the counts") {
    Rng rng(31);
    Tensor features(8, 4);
    for (double& v : features.data) v = rng.uniform(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        RelationComponentTable t = random_table(rng, 8);
        std::uint32_t c = static_cast<std::uint32_t>(2 + rng.below(6));
        RelationComponentTable scaled = t;
        for (const auto& [axis, count] : t.entries()) scaled.set(axis, count * c);
        Tensor a = fuse_now(t, features);
        Tensor b = fuse_now(scaled, features);
        for (std::size_t i = 0; i < a.numel(); ++i)
            CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("fusion depends on the table alone, not the entity behind it") {
    // Two graphs, different entity ids and tokens, same incident counts.
    KnowledgeGraph g1 = parse_triples("p\tr0\tq\np\tr0\ts\np\tr1\tq\n");
    KnowledgeGraph g2 = parse_triples("zz\tr0\tp2\nyy\tr0\tp2\np2\tr1\tww\n");
    RelationComponentTable t1 = build_table(g1, *g1.vocab.entity("p"));
    RelationComponentTable t2 = build_table(g2, *g2.vocab.entity("p2"));
    REQUIRE(t1 == t2);
    Tensor features(2, 3);
    Rng rng(4);
    for (double& v : features.data) v = rng.uniform(-1.0, 1.0);
    CHECK(fuse_now(t1, features) == fuse_now(t2, features));
}

TEST_CASE("count variation keeps the support and stays in range") {
    Rng rng(77);
    const double theta = 2.0;
    for (int trial = 0; trial < 200; ++trial) {
        RelationComponentTable t = random_table(rng, 8);
        auto cap = static_cast<std::uint32_t>(std::ceil(mean_count(t) * theta));
        RelationComponentTable v = op_variation(t, rng, theta);
        CHECK(v.same_support(t));
        std::size_t changed = 0;
        for (const auto& [axis, count] : v.entries()) {
            if (count != t.count(axis)) {
                ++changed;
                CHECK(count >= 1);
                CHECK(count <= cap);
            }
        }
        CHECK(changed <= 1);  // redraw may land on the old value
    }
}

TEST_CASE("relation addition grows the support by one fresh axis") {
    Rng rng(78);
    const double theta = 2.0;
    const std::size_t n_axes = 8;
    for (int trial = 0; trial < 200; ++trial) {
        RelationComponentTable t = random_table(rng, n_axes);
        if (t.support_size() == n_axes) {
            CHECK_THROWS_AS((void)op_addition(t, rng, theta, n_axes), DataError);
            continue;
        }
        auto cap = static_cast<std::uint32_t>(std::ceil(mean_count(t) * theta));
        RelationComponentTable a = op_addition(t, rng, theta, n_axes);
        CHECK(a.support_size() == t.support_size() + 1);
        for (const auto& [axis, count] : t.entries()) CHECK(a.count(axis) == count);
        for (const auto& [axis, count] : a.entries()) {
            CHECK(axis < n_axes);
            if (t.count(axis) == 0) {
                CHECK(count >= 1);
                CHECK(count <= cap);
            }
        }
    }
}

TEST_CASE("relation deletion removes one axis and needs support of two") {
    Rng rng(79);
    for (int trial = 0; trial < 200; ++trial) {
        RelationComponentTable t = random_table(rng, 8);
        if (t.support_size() < 2) {
            CHECK_THROWS_AS((void)op_deletion(t, rng), DataError);
            continue;
        }
        RelationComponentTable d = op_deletion(t, rng);
        CHECK(d.support_size() == t.support_size() - 1);
        for (const auto& [axis, count] : d.entries()) CHECK(t.count(axis) == count);
    }
}

TEST_CASE("contrastive pairs: positive keeps the support, negative changes it") {
    Rng rng(80);
    const std::size_t n_axes = 8;
    for (int trial = 0; trial < 200; ++trial) {
        RelationComponentTable t = random_table(rng, n_axes);
        std::size_t len_pos = 1 + rng.below(3);
        std::size_t len_neg = 1 + rng.below(3);
        ContrastivePair pair = sample_pair(t, rng, 2.0, len_pos, len_neg, n_axes);
        CHECK(pair.anchor == t);
        CHECK(pair.positive.same_support(t));
        CHECK_FALSE(pair.negative.same_support(t));
    }

    // Deterministic under a fixed stream.
    RelationComponentTable t({{0, 3}, {4, 1}});
    Rng r1(5), r2(5);
    ContrastivePair a = sample_pair(t, r1, 2.0, 2, 2, 8);
    ContrastivePair b = sample_pair(t, r2, 2.0, 2, 2, 8);
    CHECK(a.positive == b.positive);
    CHECK(a.negative == b.negative);

    // A single-axis table over a single-axis space can change nothing.
    RelationComponentTable stuck({{0, 2}});
    Rng r3(6);
    CHECK_THROWS_AS((void)sample_pair(stuck, r3, 2.0, 1, 1, 1), DataError);
}

TEST_CASE("euclidean distance and the contrastive hinge") {
    Graph g;
    auto origin = g.constant(Tensor::row({0.0, 0.0}));
    auto p34 = g.constant(Tensor::row({3.0, 4.0}));
    auto p68 = g.constant(Tensor::row({6.0, 8.0}));
    CHECK(g.value(euclidean_distance(g, origin, p34)).item() == 5.0);

    // d_pos = 5, d_neg = 10: margin 1 is satisfied, margin 6 leaks 1.
    CHECK(g.value(contrastive_loss(g, origin, p34, p68, 1.0)).item() == 0.0);
    CHECK(g.value(contrastive_loss(g, origin, p34, p68, 6.0)).item() == 1.0);
}

TEST_CASE("semantic score is a symmetric three-way product") {
    Graph g;
    auto ei = g.constant(Tensor::row({1.0, 2.0}));
    auto ej = g.constant(Tensor::row({5.0, 6.0}));
    auto rels = g.constant(Tensor::from_rows({{9.0, 9.0}, {3.0, 4.0}}));
    CHECK(g.value(semantic_score(g, ei, 1, ej, rels)).item() == 63.0);
    CHECK(g.value(semantic_score(g, ej, 1, ei, rels)).item() == 63.0);
}

TEST_CASE("gradients flow through fusion, scoring and the hinge") {
    Rng rng(21);
    ParameterStore store;
    store.add_uniform("features", 6, 4, rng, 0.9);
    store.add_uniform("rels", 3, 4, rng, 0.9);
    RelationComponentTable ta({{0, 2}, {3, 1}});
    RelationComponentTable tb({{1, 4}, {2, 1}, {5, 2}});
    RelationComponentTable tc({{0, 2}, {4, 3}});

    auto expr = [&](Graph& g) {
        auto bank = g.param("features");
        auto ea = fuse(g, ta, bank);
        auto eb = fuse(g, tb, bank);
        auto ec = fuse(g, tc, bank);
        auto score = semantic_score(g, ea, 2, eb, g.param("rels"));
        return g.add(score, contrastive_loss(g, ea, eb, ec, 1.0));
    };
    GradCheckReport report = grad_check(expr, store, 1e-4);
    CHECK(report.pass);
    CHECK_FALSE(report.kink);
}

TEST_CASE("table export lists nonzero counts as CSV") {
    KnowledgeGraph g = parse_triples("e\tr0\tx\ny\tr0\te\ne\tr1\tz\n");
    auto path = std::filesystem::temp_directory_path() /
                ("dekg-tables-" + std::to_string(::getpid()) + ".csv");
    export_tables_csv(g, false, path.string());
    std::ifstream in(path);
    std::stringstream body;
    body << in.rdbuf();
    std::filesystem::remove(path);
    CHECK(body.str() ==
          "entity,relation,count\n"
          "e,r0,2\n"
          "e,r1,1\n"
          "x,r0,1\n"
          "y,r0,1\n"
          "z,r1,1\n");
}
