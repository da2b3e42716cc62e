#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dekg/kg.hpp"
#include "dekg/model.hpp"
#include "dekg/relation_profile.hpp"
#include "dekg/rng.hpp"

namespace dekg {

// Endpoint corruption with filtering: each negative replaces the head or the
// tail (fair coin) of `positive` with a uniformly drawn entity; draws that
// reproduce a triple of g, collapse to a self-pair (the subgraph scorer needs
// distinct endpoints), or leave the triple unchanged are rejected and
// redrawn. Throws DataError when a graph is so dense that no corruption
// survives the retry budget.
std::vector<Triple> sample_negatives(const KnowledgeGraph& g,
                                     const Triple& positive, std::size_t k,
                                     Rng& rng);

// One SGD step's worth of work: positives with their negatives, plus
// contrastive table pairs for every entity the positives touch.
struct Batch {
    std::vector<Triple> positives;
    std::vector<Triple> negatives;  // negatives_per_positive per positive
    std::vector<EntityId> contrastive_entities;  // first-appearance order
    std::vector<std::vector<ContrastivePair>> contrastive_pairs;  // per entity
};

// Draws negatives and, unless the contrastive loss is disabled (or there is
// only one relation axis, which cannot change support), contrastive pairs
// for the entities appearing in `positives`. Edit-sequence lengths are
// uniform in {1,2,3} capped by the anchor's support size.
Batch assemble_batch(const KnowledgeGraph& g, const ScoringContext& ctx,
                     std::vector<Triple> positives, const TrainConfig& cfg,
                     Rng& neg_rng, Rng& con_rng);

// [gamma - phi_pos + phi_neg]_+ on the tape.
Graph::Value margin_loss(Graph& g, Graph::Value phi_pos, Graph::Value phi_neg,
                         double gamma_rank);

struct LossValues {
    Graph::Value total;        // rank + sigma * contrastive
    Graph::Value rank;         // sum of margin losses over all pos/neg pairs
    Graph::Value contrastive;  // sum over entities of their mean pair loss
};

// Builds the full batch loss on one tape: the mean margin violation over all
// (positive, negative) pairs plus sigma times the mean over entities of each
// entity's mean contrastive hinge. `pos_sg`/`neg_sg` are the prepared
// subgraphs, parallel to batch.positives/batch.negatives.
LossValues total_loss_value(Graph& tape, const Model& m,
                            const ScoringContext& ctx, const Batch& batch,
                            const std::vector<const LabeledSubgraph*>& pos_sg,
                            const std::vector<const LabeledSubgraph*>& neg_sg,
                            bool training, Rng* dropout_rng);

struct EpochLoss {
    double total = 0.0;
    double rank = 0.0;
    double contrastive = 0.0;  // unweighted sum; total includes sigma * this
};

struct TrainResult {
    std::vector<EpochLoss> losses;  // one entry per epoch
};

using EpochCallback =
    std::function<void(std::size_t epoch, const EpochLoss& loss)>;

// Runs the training loop on g: per epoch, shuffle the triples, cut them into
// batches, assemble negatives and contrastive pairs, build the loss, run
// backward, and take one SGD step per batch. Positive subgraphs are extracted
// once (in parallel across cfg.workers) and reused across epochs; negatives
// are re-extracted per epoch. All randomness derives from named streams of
// cfg.seed, so a rerun with the same seed is bit-identical. A non-finite
// value anywhere aborts with a NumericError naming the epoch and batch plus
// a per-slot magnitude dump.
TrainResult train(Model& m, const KnowledgeGraph& g,
                  const EpochCallback& on_epoch = {});

// CSV with columns epoch,loss_total,loss_rank,loss_contrastive.
void write_loss_csv(const std::vector<EpochLoss>& losses,
                    const std::string& path);

}  // namespace dekg
