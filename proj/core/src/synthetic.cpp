#include "dekg/synthetic.hpp"

#include <string>
#include <unordered_set>

#include "dekg/error.hpp"
#include "dekg/rng.hpp"

namespace dekg {

namespace {

constexpr std::size_t kT = kSyntheticTypes;
constexpr std::size_t kR = kSyntheticRelations;

// Destination type of relation `rel` for its i-th source type (r+i) mod 10.
std::size_t rule_dst(std::size_t rel, std::size_t i) {
    return (rel + 4 + ((i + rel) % 4)) % kT;
}

// -1 when `head_type` is not a source of `rel`.
int source_index(std::size_t head_type, std::size_t rel) {
    std::size_t offset = (head_type + kT - rel) % kT;
    return offset < 4 ? static_cast<int>(offset) : -1;
}

void shuffle_indices(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

bool synthetic_rule(std::size_t head_type, std::size_t rel,
                    std::size_t tail_type) {
    if (rel >= kR || head_type >= kT || tail_type >= kT) return false;
    int i = source_index(head_type, rel);
    return i >= 0 && rule_dst(rel, static_cast<std::size_t>(i)) == tail_type;
}

SyntheticDataset make_synthetic(const SyntheticSpec& spec) {
    const std::size_t k = spec.entities_per_type;
    if (k < 2) throw DataError("synthetic benchmark needs >= 2 entities per type");

    SyntheticDataset ds;
    auto add_component = [&](char tag) {
        for (std::size_t type = 0; type < kT; ++type)
            for (std::size_t i = 0; i < k; ++i) {
                std::string token = std::string(1, tag) + ":t" +
                                    std::to_string(type) + ":" +
                                    std::to_string(i);
                ds.vocab.add_entity(token);
                if (tag == 'a') ds.train_vocab.add_entity(token);
            }
    };
    add_component('a');
    ds.vocab.seal_entity_boundary();
    ds.train_vocab.seal_entity_boundary();
    add_component('b');
    for (std::size_t r = 0; r < kR; ++r) {
        ds.vocab.add_relation("r" + std::to_string(r));
        ds.train_vocab.add_relation("r" + std::to_string(r));
    }

    auto entity = [&](std::size_t comp, std::size_t type, std::size_t i) {
        return static_cast<EntityId>(comp * kT * k + type * k + i);
    };

    Rng root(spec.seed);
    // Support edges: per (component, relation, source type), each source
    // entity points at `degree` destinations drawn from a shuffled
    // round-robin, so every destination entity also receives exactly `degree`
    // edges of that rule. The emerging component uses three edges instead of
    // two for odd relations (when the type population allows it): the relation
    // mix per entity keeps the same support but shifted count ratios, the kind
    // of distribution shift an unseen graph brings.
    auto build_edges = [&](std::size_t comp, std::vector<Triple>& out) {
        Rng comp_rng = root.stream(comp == 0 ? "edges-a" : "edges-b");
        for (std::size_t r = 0; r < kR; ++r) {
            std::size_t degree = (comp == 1 && k >= 3 && r % 2 == 1) ? 3 : 2;
            for (std::size_t si = 0; si < 4; ++si) {
                std::size_t src_type = (r + si) % kT;
                std::size_t dst_type = rule_dst(r, si);
                std::vector<std::size_t> perm(k);
                for (std::size_t i = 0; i < k; ++i) perm[i] = i;
                Rng rule_rng = comp_rng.stream(r * 4 + si);
                shuffle_indices(perm, rule_rng);
                for (std::size_t i = 0; i < k; ++i) {
                    for (std::size_t step = 0; step < degree; ++step) {
                        std::size_t j = (degree * i + step) % k;
                        out.push_back({entity(comp, src_type, i),
                                       static_cast<RelationId>(r),
                                       entity(comp, dst_type, perm[j])});
                    }
                }
            }
        }
    };
    build_edges(0, ds.train);
    build_edges(1, ds.emerging);

    std::unordered_set<Triple, TripleHash> support(ds.train.begin(),
                                                   ds.train.end());
    support.insert(ds.emerging.begin(), ds.emerging.end());

    // Held-out pools: all remaining rule-true links of the requested kind,
    // subsampled without replacement.
    auto collect = [&](bool cross, std::vector<Triple>& out, const char* tag) {
        std::vector<Triple> all;
        for (std::size_t r = 0; r < kR; ++r)
            for (std::size_t si = 0; si < 4; ++si) {
                std::size_t src_type = (r + si) % kT;
                std::size_t dst_type = rule_dst(r, si);
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) {
                        if (cross) {
                            all.push_back({entity(0, src_type, i),
                                           static_cast<RelationId>(r),
                                           entity(1, dst_type, j)});
                            all.push_back({entity(1, src_type, i),
                                           static_cast<RelationId>(r),
                                           entity(0, dst_type, j)});
                        } else {
                            Triple t{entity(1, src_type, i),
                                     static_cast<RelationId>(r),
                                     entity(1, dst_type, j)};
                            if (!support.count(t)) all.push_back(t);
                        }
                    }
            }
        if (all.size() < spec.eval_per_class)
            throw DataError(std::string("not enough held-out ") + tag +
                            " links for the requested pool size");
        Rng pool_rng = root.stream(tag);
        for (std::size_t i = 0; i < spec.eval_per_class; ++i) {
            std::size_t j = i + pool_rng.below(all.size() - i);
            std::swap(all[i], all[j]);
            out.push_back(all[i]);
        }
    };
    collect(false, ds.enclosing, "enclosing");
    collect(true, ds.bridging, "bridging");
    return ds;
}

}  // namespace dekg
