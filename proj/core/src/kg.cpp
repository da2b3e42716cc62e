#include "dekg/kg.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "dekg/error.hpp"

namespace dekg {

// ---------------------------------------------------------------------------
// Vocabulary

EntityId Vocabulary::add_entity(const std::string& token) {
    auto it = entity_ids_.find(token);
    if (it != entity_ids_.end()) return it->second;
    EntityId id = static_cast<EntityId>(entities_.size());
    entities_.push_back(token);
    entity_ids_.emplace(token, id);
    return id;
}

RelationId Vocabulary::add_relation(const std::string& token) {
    auto it = relation_ids_.find(token);
    if (it != relation_ids_.end()) return it->second;
    RelationId id = static_cast<RelationId>(relations_.size());
    relations_.push_back(token);
    relation_ids_.emplace(token, id);
    return id;
}

std::optional<EntityId> Vocabulary::entity(const std::string& token) const {
    auto it = entity_ids_.find(token);
    if (it == entity_ids_.end()) return std::nullopt;
    return it->second;
}

std::optional<RelationId> Vocabulary::relation(const std::string& token) const {
    auto it = relation_ids_.find(token);
    if (it == relation_ids_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// Graph construction

bool KnowledgeGraph::has_triple(const Triple& t) const {
    if (t.head >= out_adj.size()) return false;
    for (const auto& [r, tail] : out_adj[t.head])
        if (r == t.rel && tail == t.tail) return true;
    return false;
}

KnowledgeGraph build_graph(Vocabulary vocab, std::vector<Triple> triples) {
    KnowledgeGraph g;
    g.vocab = std::move(vocab);
    g.triples = std::move(triples);
    g.out_adj.resize(g.vocab.n_entities());
    g.in_adj.resize(g.vocab.n_entities());
    for (const Triple& t : g.triples) {
        g.out_adj[t.head].emplace_back(t.rel, t.tail);
        g.in_adj[t.tail].emplace_back(t.rel, t.head);
    }
    return g;
}

namespace {

KnowledgeGraph parse_stream(std::istream& in, const std::optional<Vocabulary>& base,
                            const std::string& origin) {
    Vocabulary vocab = base.value_or(Vocabulary{});
    const bool extending = base.has_value();

    std::vector<Triple> triples;
    std::unordered_set<Triple, TripleHash> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string::npos ? std::string::npos
                                                    : line.find('\t', tab1 + 1);
        const auto tab3 = tab2 == std::string::npos ? std::string::npos
                                                    : line.find('\t', tab2 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos ||
            tab3 != std::string::npos) {
            throw DataError(origin + ":" + std::to_string(lineno) +
                            ": expected head<TAB>relation<TAB>tail");
        }
        const std::string h = line.substr(0, tab1);
        const std::string r = line.substr(tab1 + 1, tab2 - tab1 - 1);
        const std::string t = line.substr(tab2 + 1);
        if (h.empty() || r.empty() || t.empty()) {
            throw DataError(origin + ":" + std::to_string(lineno) + ": empty field");
        }

        Triple triple;
        triple.head = vocab.add_entity(h);
        if (extending) {
            auto rel = vocab.relation(r);
            if (!rel) {
                throw DataError(origin + ":" + std::to_string(lineno) +
                                ": relation '" + r +
                                "' absent from the base vocabulary");
            }
            triple.rel = *rel;
        } else {
            triple.rel = vocab.add_relation(r);
        }
        triple.tail = vocab.add_entity(t);

        if (!seen.insert(triple).second) {
            throw DataError(origin + ":" + std::to_string(lineno) +
                            ": duplicate triple " + h + " " + r + " " + t);
        }
        triples.push_back(triple);
    }

    if (!extending) vocab.seal_entity_boundary();
    return build_graph(std::move(vocab), std::move(triples));
}

}  // namespace

KnowledgeGraph load_triples(const std::string& path,
                            const std::optional<Vocabulary>& base) {
    std::ifstream in(path);
    if (!in.is_open()) throw FileError("cannot open triple file: " + path);
    return parse_stream(in, base, path);
}

KnowledgeGraph parse_triples(const std::string& text,
                             const std::optional<Vocabulary>& base,
                             const std::string& origin) {
    std::istringstream in(text);
    return parse_stream(in, base, origin);
}

void save_triples(const KnowledgeGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out.is_open()) throw FileError("cannot write triple file: " + path);
    for (const Triple& t : g.triples) {
        out << g.vocab.entity_token(t.head) << '\t' << g.vocab.relation_token(t.rel)
            << '\t' << g.vocab.entity_token(t.tail) << '\n';
    }
}

void save_entity_vocab(const Vocabulary& v, const std::string& path) {
    std::ofstream out(path);
    if (!out.is_open()) throw FileError("cannot write vocab file: " + path);
    for (std::size_t i = 0; i < v.n_entities(); ++i)
        out << v.entity_token(static_cast<EntityId>(i)) << '\t' << i << '\n';
}

void save_relation_vocab(const Vocabulary& v, const std::string& path) {
    std::ofstream out(path);
    if (!out.is_open()) throw FileError("cannot write vocab file: " + path);
    for (std::size_t i = 0; i < v.n_relations(); ++i)
        out << v.relation_token(static_cast<RelationId>(i)) << '\t' << i << '\n';
}

KnowledgeGraph union_graph(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    if (b.vocab.n_entities() < a.vocab.n_entities() ||
        b.vocab.n_relations() != a.vocab.n_relations()) {
        throw DataError("union_graph: second vocabulary does not extend the first");
    }
    std::vector<Triple> triples = a.triples;
    std::unordered_set<Triple, TripleHash> seen(triples.begin(), triples.end());
    for (const Triple& t : b.triples) {
        if (!seen.insert(t).second)
            throw DataError("union_graph: duplicate triple across inputs");
        triples.push_back(t);
    }
    return build_graph(b.vocab, std::move(triples));
}

LinkClass classify_link(const KnowledgeGraph& g_orig, const Triple& t) {
    const std::size_t boundary = g_orig.vocab.seen_entity_boundary();
    const auto known = [&](EntityId e) { return e < boundary; };
    // Endpoints must at least exist in some extended vocabulary; ids are
    // dense, so anything at or above the boundary is a DEKG entity.
    const bool h_seen = known(t.head);
    const bool t_seen = known(t.tail);
    if (h_seen && t_seen) return LinkClass::Transductive;
    if (!h_seen && !t_seen) return LinkClass::Enclosing;
    return LinkClass::Bridging;
}

MixRatio parse_ratio(const std::string& s) {
    if (s == "EQ") return MixRatio::EQ;
    if (s == "MB") return MixRatio::MB;
    if (s == "ME") return MixRatio::ME;
    throw ConfigError("unknown ratio tag '" + s + "' (expected EQ, MB or ME)");
}

std::string ratio_name(MixRatio r) {
    switch (r) {
        case MixRatio::EQ: return "EQ";
        case MixRatio::MB: return "MB";
        case MixRatio::ME: return "ME";
    }
    return "?";
}

namespace {

std::vector<Triple> subsample(const std::vector<Triple>& pool, std::size_t k, Rng& rng) {
    // Fisher-Yates prefix; deterministic given the rng state.
    std::vector<Triple> v = pool;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(v.size() - i));
        std::swap(v[i], v[j]);
    }
    v.resize(k);
    return v;
}

}  // namespace

EvalSet build_eval_set(const std::vector<Triple>& enclosing,
                       const std::vector<Triple>& bridging, MixRatio ratio,
                       std::uint64_t seed) {
    std::size_t n_enc = 0, n_brg = 0;
    switch (ratio) {
        case MixRatio::EQ:
            n_enc = n_brg = std::min(enclosing.size(), bridging.size());
            break;
        case MixRatio::MB:  // enclosing : bridging = 1 : 2
            n_enc = std::min(enclosing.size(), bridging.size() / 2);
            n_brg = 2 * n_enc;
            break;
        case MixRatio::ME:  // enclosing : bridging = 2 : 1
            n_brg = std::min(bridging.size(), enclosing.size() / 2);
            n_enc = 2 * n_brg;
            break;
    }
    if (n_enc == 0 || n_brg == 0) {
        throw DataError("build_eval_set: not enough links to realize ratio " +
                        ratio_name(ratio) + " (" + std::to_string(enclosing.size()) +
                        " enclosing, " + std::to_string(bridging.size()) +
                        " bridging)");
    }

    Rng rng = Rng(seed).stream("eval-set-mix");
    EvalSet s;
    s.enclosing = subsample(enclosing, n_enc, rng);
    s.bridging = subsample(bridging, n_brg, rng);
    s.ratio_tag = ratio;
    s.seed = seed;
    return s;
}

void save_eval_manifest(const EvalSet& s, const std::string& path) {
    std::ofstream out(path);
    if (!out.is_open()) throw FileError("cannot write manifest: " + path);
    out << "ratio=" << ratio_name(s.ratio_tag) << '\n'
        << "seed=" << s.seed << '\n'
        << "n_enclosing=" << s.enclosing.size() << '\n'
        << "n_bridging=" << s.bridging.size() << '\n';
}

}  // namespace dekg
