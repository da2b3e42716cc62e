#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dekg/rng.hpp"

namespace dekg {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
    EntityId head;
    RelationId rel;
    EntityId tail;

    bool operator==(const Triple&) const = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const {
        std::uint64_t h = t.head;
        h = h * 0x9e3779b97f4a7c15ULL + t.rel;
        h = h * 0x9e3779b97f4a7c15ULL + t.tail;
        return static_cast<std::size_t>(h ^ (h >> 32));
    }
};

// Dense token<->id maps for entities and relations. Entity ids are assigned
// in first-seen order; ids below seen_entity_boundary() belong to the
// original KG, ids at or above it to entities first seen in later splits.
class Vocabulary {
public:
    EntityId add_entity(const std::string& token);      // get-or-create
    RelationId add_relation(const std::string& token);  // get-or-create

    std::optional<EntityId> entity(const std::string& token) const;
    std::optional<RelationId> relation(const std::string& token) const;

    const std::string& entity_token(EntityId id) const { return entities_[id]; }
    const std::string& relation_token(RelationId id) const { return relations_[id]; }

    std::size_t n_entities() const { return entities_.size(); }
    std::size_t n_relations() const { return relations_.size(); }

    // Entities with id < boundary were present when the boundary was sealed
    // (i.e. belong to the original KG).
    void seal_entity_boundary() { boundary_ = entities_.size(); }
    std::size_t seen_entity_boundary() const { return boundary_; }

    bool operator==(const Vocabulary&) const = default;

private:
    std::vector<std::string> entities_;
    std::vector<std::string> relations_;
    std::unordered_map<std::string, EntityId> entity_ids_;
    std::unordered_map<std::string, RelationId> relation_ids_;
    std::size_t boundary_ = 0;
};

// Immutable after construction; adjacency is consistent with the triple list.
struct KnowledgeGraph {
    Vocabulary vocab;
    std::vector<Triple> triples;
    // Indexed by entity id: out_adj[h] holds (rel, tail), in_adj[t] holds (rel, head).
    std::vector<std::vector<std::pair<RelationId, EntityId>>> out_adj;
    std::vector<std::vector<std::pair<RelationId, EntityId>>> in_adj;

    std::size_t n_entities() const { return vocab.n_entities(); }
    std::size_t n_relations() const { return vocab.n_relations(); }
    bool has_triple(const Triple& t) const;
};

KnowledgeGraph build_graph(Vocabulary vocab, std::vector<Triple> triples);

// Reads tab-separated `head<TAB>relation<TAB>tail` lines. Without a base
// vocabulary, entities and relations are assigned ids in first-seen order and
// the entity boundary is sealed at the end. With a base, its ids are reused,
// only the entity vocabulary may grow, and an unknown relation is an error.
// Duplicate triples within one file are rejected.
KnowledgeGraph load_triples(const std::string& path,
                            const std::optional<Vocabulary>& base = std::nullopt);

// Same parser over in-memory text (used by tests and synthetic data).
KnowledgeGraph parse_triples(const std::string& text,
                             const std::optional<Vocabulary>& base = std::nullopt,
                             const std::string& origin = "<memory>");

void save_triples(const KnowledgeGraph& g, const std::string& path);

// `token<TAB>id` lines.
void save_entity_vocab(const Vocabulary& v, const std::string& path);
void save_relation_vocab(const Vocabulary& v, const std::string& path);

// Merge two graphs that share a vocabulary lineage (b's vocabulary extends
// a's). Duplicate triples across the inputs are rejected.
KnowledgeGraph union_graph(const KnowledgeGraph& a, const KnowledgeGraph& b);

enum class LinkClass { Enclosing, Bridging, Transductive };

// Enclosing: both endpoints unseen. Bridging: exactly one unseen.
// Transductive: both seen. "Seen" is an id-range test against the original
// graph's entity boundary.
LinkClass classify_link(const KnowledgeGraph& g_orig, const Triple& t);

enum class MixRatio { EQ, MB, ME };

MixRatio parse_ratio(const std::string& s);
std::string ratio_name(MixRatio r);

struct EvalSet {
    std::vector<Triple> enclosing;
    std::vector<Triple> bridging;
    MixRatio ratio_tag = MixRatio::EQ;
    std::uint64_t seed = 0;
};

// Deterministic subsample realizing enclosing:bridging = 1:1 (EQ), 1:2 (MB)
// or 2:1 (ME). Surplus links are dropped uniformly at random given the seed.
// Throws DataError when either class cannot meet the ratio.
EvalSet build_eval_set(const std::vector<Triple>& enclosing,
                       const std::vector<Triple>& bridging, MixRatio ratio,
                       std::uint64_t seed);

// Key-value manifest: ratio tag, seed and per-class counts.
void save_eval_manifest(const EvalSet& s, const std::string& path);

}  // namespace dekg
