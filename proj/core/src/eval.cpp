#include "dekg/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "dekg/error.hpp"
#include "dekg/worker_pool.hpp"

namespace dekg {

const char* pattern_name(QueryPattern p) {
    switch (p) {
        case QueryPattern::Head: return "head";
        case QueryPattern::Relation: return "relation";
        case QueryPattern::Tail: return "tail";
    }
    throw DataError("unknown query pattern");
}

double rank_from_scores(double truth_score, const std::vector<double>& others,
                        TieMode tie) {
    std::size_t higher = 0;
    std::size_t tied = 0;
    for (double s : others) {
        if (s > truth_score)
            ++higher;
        else if (s == truth_score)
            ++tied;
    }
    switch (tie) {
        case TieMode::Average:
            return static_cast<double>(higher) + 1.0 +
                   static_cast<double>(tied) / 2.0;
        case TieMode::Pessimistic:
            return static_cast<double>(higher + tied) + 1.0;
        case TieMode::Optimistic:
            return static_cast<double>(higher) + 1.0;
    }
    throw DataError("unknown tie mode");
}

RankResult filtered_rank(Model& m, const ScoringContext& ctx, const Query& q,
                         const TripleSet& known, TieMode tie) {
    const KnowledgeGraph& g = ctx.graph();
    const Triple& truth = q.truth;
    if (truth.head == truth.tail)
        throw DataError("evaluation link with identical endpoints");

    std::vector<double> others;
    double truth_score = 0.0;
    if (q.pattern == QueryPattern::Relation) {
        // One extraction serves all candidate relations: none of the
        // candidate edges exist in the graph, so target-edge removal is a
        // no-op regardless of the relation.
        LabeledSubgraph sg = make_subgraph(g, truth, m.cfg);
        others.reserve(g.n_relations());
        for (RelationId r = 0; r < g.n_relations(); ++r) {
            Triple cand{truth.head, r, truth.tail};
            if (r != truth.rel && known.count(cand)) continue;
            Graph tape(&m.store);
            double s = tape.value(combined_score_value(tape, m, ctx, cand, sg,
                                                       false, nullptr))
                           .item();
            if (r == truth.rel)
                truth_score = s;
            else
                others.push_back(s);
        }
    } else {
        const bool corrupt_tail = q.pattern == QueryPattern::Tail;
        const EntityId fixed = corrupt_tail ? truth.head : truth.tail;
        const EntityId answer = corrupt_tail ? truth.tail : truth.head;
        others.reserve(g.n_entities());
        for (EntityId e = 0; e < g.n_entities(); ++e) {
            Triple cand = truth;
            (corrupt_tail ? cand.tail : cand.head) = e;
            if (e != answer && known.count(cand)) continue;
            double s;
            if (e == fixed)
                s = -std::numeric_limits<double>::infinity();
            else
                s = score_triple(m, ctx, cand);
            if (e == answer)
                truth_score = s;
            else
                others.push_back(s);
        }
    }

    RankResult res;
    res.query = q;
    res.rank = rank_from_scores(truth_score, others, tie);
    res.n_candidates = others.size() + 1;
    return res;
}

double mrr(const std::vector<RankResult>& results) {
    if (results.empty()) throw DataError("mrr of an empty result set");
    double sum = 0.0;
    for (const RankResult& r : results) sum += 1.0 / r.rank;
    return sum / static_cast<double>(results.size());
}

double hits_at(const std::vector<RankResult>& results, double n) {
    if (results.empty()) throw DataError("hits@n of an empty result set");
    std::size_t hits = 0;
    for (const RankResult& r : results)
        if (r.rank <= n) ++hits;
    return static_cast<double>(hits) / static_cast<double>(results.size());
}

namespace {

struct Cell {
    double reciprocal_sum = 0.0;
    std::size_t hits1 = 0, hits5 = 0, hits10 = 0;
    std::size_t n = 0;

    void add(double rank) {
        reciprocal_sum += 1.0 / rank;
        if (rank <= 1.0) ++hits1;
        if (rank <= 5.0) ++hits5;
        if (rank <= 10.0) ++hits10;
        ++n;
    }
    void add(const Cell& o) {
        reciprocal_sum += o.reciprocal_sum;
        hits1 += o.hits1;
        hits5 += o.hits5;
        hits10 += o.hits10;
        n += o.n;
    }
};

MetricRow to_row(const std::string& split, const std::string& pattern,
                 const Cell& c, std::size_t seeds) {
    MetricRow row;
    row.split = split;
    row.pattern = pattern;
    row.n_queries = c.n;
    row.seeds = seeds;
    if (c.n > 0) {
        double n = static_cast<double>(c.n);
        row.mrr = c.reciprocal_sum / n;
        row.hits1 = static_cast<double>(c.hits1) / n;
        row.hits5 = static_cast<double>(c.hits5) / n;
        row.hits10 = static_cast<double>(c.hits10) / n;
    }
    return row;
}

}  // namespace

const MetricRow& EvalReport::row(const std::string& split,
                                 const std::string& pattern) const {
    for (const MetricRow& r : rows)
        if (r.split == split && r.pattern == pattern) return r;
    throw DataError("no report row for " + split + "/" + pattern);
}

EvalReport evaluate(Model& m, const ScoringContext& ctx,
                    const std::vector<Triple>& enclosing_pool,
                    const std::vector<Triple>& bridging_pool,
                    const TripleSet& known, const EvalOptions& opts) {
    if (opts.seeds.empty()) throw DataError("evaluation needs at least one seed");

    // cells[class 0=enclosing,1=bridging][pattern 0=head,1=relation,2=tail]
    Cell cells[2][3];
    for (std::uint64_t seed : opts.seeds) {
        EvalSet set = build_eval_set(enclosing_pool, bridging_pool, opts.ratio,
                                     seed);
        std::vector<Query> queries;
        queries.reserve(3 * (set.enclosing.size() + set.bridging.size()));
        auto push = [&](const std::vector<Triple>& links, LinkClass cls) {
            for (const Triple& t : links)
                for (QueryPattern p : {QueryPattern::Head, QueryPattern::Relation,
                                       QueryPattern::Tail})
                    queries.push_back({p, t, cls});
        };
        push(set.enclosing, LinkClass::Enclosing);
        push(set.bridging, LinkClass::Bridging);

        std::vector<RankResult> results(queries.size());
        parallel_for(queries.size(), opts.workers, [&](std::size_t i) {
            results[i] = filtered_rank(m, ctx, queries[i], known, opts.tie);
        });
        for (const RankResult& r : results) {
            int cls = r.query.cls == LinkClass::Enclosing ? 0 : 1;
            int pat = r.query.pattern == QueryPattern::Head     ? 0
                      : r.query.pattern == QueryPattern::Relation ? 1
                                                                  : 2;
            cells[cls][pat].add(r.rank);
        }
    }

    const std::size_t n_seeds = opts.seeds.size();
    EvalReport report;
    const char* patterns[3] = {"head", "relation", "tail"};
    auto emit_split = [&](const std::string& split, const Cell* row_cells) {
        Cell pooled;
        for (int p = 0; p < 3; ++p) pooled.add(row_cells[p]);
        report.rows.push_back(to_row(split, "all", pooled, n_seeds));
        for (int p = 0; p < 3; ++p)
            report.rows.push_back(to_row(split, patterns[p], row_cells[p],
                                         n_seeds));
    };
    Cell overall[3];
    for (int p = 0; p < 3; ++p) {
        overall[p].add(cells[0][p]);
        overall[p].add(cells[1][p]);
    }
    emit_split("all", overall);
    emit_split("enclosing", cells[0]);
    emit_split("bridging", cells[1]);
    return report;
}

namespace {

std::string metric(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

}  // namespace

std::string report_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "split,pattern,MRR,Hits@1,Hits@5,Hits@10,n_queries,seeds\n";
    for (const MetricRow& r : report.rows) {
        out << r.split << ',' << r.pattern << ',' << metric(r.mrr) << ','
            << metric(r.hits1) << ',' << metric(r.hits5) << ','
            << metric(r.hits10) << ',' << r.n_queries << ',' << r.seeds << '\n';
    }
    return out.str();
}

void print_report(const EvalReport& report, std::ostream& out) {
    out << std::left << std::setw(11) << "split" << std::setw(10) << "pattern"
        << std::right << std::setw(10) << "MRR" << std::setw(10) << "Hits@1"
        << std::setw(10) << "Hits@5" << std::setw(10) << "Hits@10"
        << std::setw(11) << "n_queries" << std::setw(7) << "seeds" << '\n';
    for (const MetricRow& r : report.rows) {
        out << std::left << std::setw(11) << r.split << std::setw(10)
            << r.pattern << std::right << std::setw(10) << metric(r.mrr)
            << std::setw(10) << metric(r.hits1) << std::setw(10)
            << metric(r.hits5) << std::setw(10) << metric(r.hits10)
            << std::setw(11) << r.n_queries << std::setw(7) << r.seeds << '\n';
    }
}

}  // namespace dekg
