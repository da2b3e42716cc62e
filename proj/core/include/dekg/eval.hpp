#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_set>
#include <vector>

#include "dekg/kg.hpp"
#include "dekg/model.hpp"

namespace dekg {

using TripleSet = std::unordered_set<Triple, TripleHash>;

enum class QueryPattern { Head, Relation, Tail };

const char* pattern_name(QueryPattern p);

// How tied candidate scores contribute to the rank of the true answer.
// Average assigns the mean of the tied positions (the reported default);
// Pessimistic counts all ties as ranked above the truth, Optimistic none.
enum class TieMode { Average, Pessimistic, Optimistic };

struct Query {
    QueryPattern pattern;
    Triple truth;
    LinkClass cls;
};

struct RankResult {
    Query query;
    double rank = 0.0;  // >= 1; fractional under average-tie
    std::size_t n_candidates = 0;  // survivors incl. truth, after filtering
};

// Rank of `truth_score` among survivor scores: 1 + #strictly-higher, plus the
// tie contribution per `tie`.
double rank_from_scores(double truth_score, const std::vector<double>& others,
                        TieMode tie);

// Scores every completion of the query with the combined model score, drops
// candidates that form a known triple other than the truth, and ranks the
// truth. Endpoint queries rank over all entities; a candidate equal to the
// fixed endpoint cannot form a scorable link and is kept with the lowest
// possible score. Relation queries rank over all relations and reuse one
// subgraph extraction, since the candidate edge is absent from the graph
// either way.
RankResult filtered_rank(Model& m, const ScoringContext& ctx, const Query& q,
                         const TripleSet& known, TieMode tie);

double mrr(const std::vector<RankResult>& results);
double hits_at(const std::vector<RankResult>& results, double n);

struct MetricRow {
    std::string split;    // all | enclosing | bridging
    std::string pattern;  // all | head | relation | tail
    double mrr = 0.0;
    double hits1 = 0.0;
    double hits5 = 0.0;
    double hits10 = 0.0;
    std::size_t n_queries = 0;  // pooled over all seeds
    std::size_t seeds = 0;
};

struct EvalReport {
    std::vector<MetricRow> rows;  // 3 splits x 4 patterns, fixed order

    const MetricRow& row(const std::string& split,
                         const std::string& pattern) const;
};

struct EvalOptions {
    std::vector<std::uint64_t> seeds;  // one eval-set re-mix per entry
    MixRatio ratio = MixRatio::EQ;
    TieMode tie = TieMode::Average;
    std::size_t workers = 1;
};

// Full protocol: per seed, re-mix the evaluation set from the two link pools
// at the requested ratio, expand every link into the three query patterns,
// rank each query (in parallel across opts.workers), and pool the results
// into per-split, per-pattern metrics.
EvalReport evaluate(Model& m, const ScoringContext& ctx,
                    const std::vector<Triple>& enclosing_pool,
                    const std::vector<Triple>& bridging_pool,
                    const TripleSet& known, const EvalOptions& opts);

std::string report_csv(const EvalReport& report);
void print_report(const EvalReport& report, std::ostream& out);

}  // namespace dekg
