#pragma once

#include <cstdint>
#include <vector>

#include "dekg/kg.hpp"

namespace dekg {

// Deterministic two-component benchmark where link truth is a pure function
// of entity types and relation co-occurrence. The schema has 10 entity types
// and 8 relations; relation r connects the four source types {r..r+3} (mod
// 10) to the four destination types {r+4..r+7} (mod 10) under a per-relation
// bijection. Every type ends up with a distinct set of incident relations,
// so relation-profile scoring can identify types globally, while no single
// (relation, destination-type) preference suffices: the valid destination
// type depends jointly on the head's type, which defeats scorers that rank
// tail candidates by a per-relation structural preference alone.
//
// Component "a" plays the original graph, component "b" the emerging one;
// they share the relation vocabulary and no edge crosses between them. Edge
// multiplicity is two per (source entity, relation) in component a; component
// b raises it to three for odd relations (population permitting), so emerging
// entities repeat each type's relation support with shifted count ratios.
struct SyntheticSpec {
    std::size_t entities_per_type = 5;  // 10 types => 50 entities per component
    std::size_t eval_per_class = 20;    // enclosing and bridging pool sizes
    std::uint64_t seed = 7;
};

struct SyntheticDataset {
    Vocabulary vocab;        // component a, then component b; boundary sealed
    Vocabulary train_vocab;  // component a only; same ids, boundary sealed
    std::vector<Triple> train;      // support edges within component a
    std::vector<Triple> emerging;   // support edges within component b
    std::vector<Triple> enclosing;  // held-out true links inside component b
    std::vector<Triple> bridging;   // held-out true links across components
};

inline constexpr std::size_t kSyntheticTypes = 10;
inline constexpr std::size_t kSyntheticRelations = 8;

// The schema's rule set: true_link(head_type, r, tail_type)?
bool synthetic_rule(std::size_t head_type, std::size_t rel,
                    std::size_t tail_type);

SyntheticDataset make_synthetic(const SyntheticSpec& spec);

}  // namespace dekg
