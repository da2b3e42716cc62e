#include "dekg/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "dekg/error.hpp"
#include "dekg/worker_pool.hpp"

namespace dekg {

std::vector<Triple> sample_negatives(const KnowledgeGraph& g,
                                     const Triple& positive, std::size_t k,
                                     Rng& rng) {
    if (g.n_entities() < 2)
        throw DataError("negative sampling needs at least two entities");
    std::vector<Triple> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        bool found = false;
        for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
            Triple neg = positive;
            EntityId e = static_cast<EntityId>(rng.below(g.n_entities()));
            if (rng.coin())
                neg.head = e;
            else
                neg.tail = e;
            if (neg == positive || neg.head == neg.tail || g.has_triple(neg))
                continue;
            out.push_back(neg);
            found = true;
        }
        if (!found)
            throw DataError(
                "could not corrupt a triple into an unknown one; graph too dense");
    }
    return out;
}

Batch assemble_batch(const KnowledgeGraph& g, const ScoringContext& ctx,
                     std::vector<Triple> positives, const TrainConfig& cfg,
                     Rng& neg_rng, Rng& con_rng) {
    Batch batch;
    batch.positives = std::move(positives);
    batch.negatives.reserve(batch.positives.size() *
                            cfg.negatives_per_positive);
    for (const Triple& pos : batch.positives) {
        std::vector<Triple> negs =
            sample_negatives(g, pos, cfg.negatives_per_positive, neg_rng);
        batch.negatives.insert(batch.negatives.end(), negs.begin(), negs.end());
    }

    const std::size_t n_axes =
        relation_axis_count(g.n_relations(), cfg.direction_aware);
    if (cfg.disable_contrastive || cfg.sigma == 0.0 ||
        cfg.contrastive_samples == 0 || n_axes < 2)
        return batch;

    std::unordered_set<EntityId> seen;
    for (const Triple& pos : batch.positives) {
        for (EntityId e : {pos.head, pos.tail}) {
            if (!seen.insert(e).second) continue;
            batch.contrastive_entities.push_back(e);
        }
    }
    for (EntityId e : batch.contrastive_entities) {
        const RelationComponentTable& anchor = ctx.table(e);
        std::vector<ContrastivePair> pairs;
        pairs.reserve(cfg.contrastive_samples);
        for (std::size_t s = 0; s < cfg.contrastive_samples; ++s) {
            auto draw_len = [&] {
                return std::min<std::size_t>(1 + con_rng.below(3),
                                             anchor.support_size());
            };
            std::size_t len_pos = draw_len();
            std::size_t len_neg = draw_len();
            pairs.push_back(
                sample_pair(anchor, con_rng, cfg.theta, len_pos, len_neg, n_axes));
        }
        batch.contrastive_pairs.push_back(std::move(pairs));
    }
    return batch;
}

Graph::Value margin_loss(Graph& g, Graph::Value phi_pos, Graph::Value phi_neg,
                         double gamma_rank) {
    return g.hinge(g.add(g.sub(g.scalar(gamma_rank), phi_pos), phi_neg));
}

LossValues total_loss_value(Graph& tape, const Model& m,
                            const ScoringContext& ctx, const Batch& batch,
                            const std::vector<const LabeledSubgraph*>& pos_sg,
                            const std::vector<const LabeledSubgraph*>& neg_sg,
                            bool training, Rng* dropout_rng) {
    if (pos_sg.size() != batch.positives.size() ||
        neg_sg.size() != batch.negatives.size())
        throw DataError("batch subgraphs do not match batch triples");
    const std::size_t per_pos = batch.positives.empty()
                                    ? 0
                                    : batch.negatives.size() /
                                          batch.positives.size();

    // Both terms are means, so the gradient scale (and with it a usable
    // learning rate) does not depend on batch size or negative count.
    LossValues lv;
    lv.rank = tape.scalar(0.0);
    for (std::size_t i = 0; i < batch.positives.size(); ++i) {
        Graph::Value phi_pos =
            combined_score_value(tape, m, ctx, batch.positives[i], *pos_sg[i],
                                 training, dropout_rng);
        for (std::size_t j = 0; j < per_pos; ++j) {
            std::size_t ni = i * per_pos + j;
            Graph::Value phi_neg =
                combined_score_value(tape, m, ctx, batch.negatives[ni],
                                     *neg_sg[ni], training, dropout_rng);
            lv.rank = tape.add(lv.rank,
                               margin_loss(tape, phi_pos, phi_neg,
                                           m.cfg.gamma_rank));
        }
    }
    if (!batch.negatives.empty())
        lv.rank = tape.scale(
            lv.rank, 1.0 / static_cast<double>(batch.negatives.size()));

    lv.contrastive = tape.scalar(0.0);
    Graph::Value bank = tape.param(m.feature_bank);
    std::size_t entities_with_pairs = 0;
    for (const auto& pairs : batch.contrastive_pairs) {
        if (pairs.empty()) continue;
        ++entities_with_pairs;
        Graph::Value entity_sum = tape.scalar(0.0);
        for (const ContrastivePair& pair : pairs) {
            Graph::Value anchor = fuse(tape, pair.anchor, bank);
            Graph::Value pos = fuse(tape, pair.positive, bank);
            Graph::Value neg = fuse(tape, pair.negative, bank);
            entity_sum = tape.add(
                entity_sum, contrastive_loss(tape, anchor, pos, neg,
                                             m.cfg.gamma_c));
        }
        lv.contrastive = tape.add(
            lv.contrastive,
            tape.scale(entity_sum, 1.0 / static_cast<double>(pairs.size())));
    }
    if (entities_with_pairs > 0)
        lv.contrastive = tape.scale(
            lv.contrastive, 1.0 / static_cast<double>(entities_with_pairs));

    lv.total = tape.add(lv.rank, tape.scale(lv.contrastive, m.cfg.sigma));
    return lv;
}

namespace {

void shuffle(std::vector<std::size_t>& order, Rng& rng) {
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
}

std::string store_magnitudes(const ParameterStore& store) {
    std::ostringstream out;
    for (ParameterStore::SlotId s = 0; s < store.size(); ++s) {
        double max_abs = 0.0;
        for (double v : store.value(s).data)
            max_abs = std::max(max_abs, std::abs(v));
        out << "  " << store.name(s) << " max|value|=" << max_abs << '\n';
    }
    return out.str();
}

}  // namespace

TrainResult train(Model& m, const KnowledgeGraph& g,
                  const EpochCallback& on_epoch) {
    if (g.triples.empty()) throw DataError("training graph has no triples");
    for (const Triple& t : g.triples)
        if (t.head == t.tail)
            throw DataError("training triple " + g.vocab.entity_token(t.head) +
                            " -> itself cannot be scored: the subgraph "
                            "labeling needs distinct endpoints");
    const TrainConfig& cfg = m.cfg;
    if (g.n_relations() > m.n_relations)
        throw DataError("graph has more relations than the model");

    ScoringContext ctx(g, cfg.direction_aware);

    // One-time positive subgraph extraction, reused every epoch (dropout is
    // applied at forward time, not here).
    std::vector<LabeledSubgraph> pos_cache(g.triples.size());
    parallel_for(g.triples.size(), cfg.workers, [&](std::size_t i) {
        pos_cache[i] = make_subgraph(g, g.triples[i], cfg);
    });

    std::vector<std::size_t> order(g.triples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Rng base = Rng(cfg.seed).stream("train");
    TrainResult result;
    result.losses.reserve(cfg.epochs);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng ep = base.stream(epoch);
        Rng shuffle_rng = ep.stream("shuffle");
        Rng neg_rng = ep.stream("negatives");
        Rng con_rng = ep.stream("contrastive");
        Rng drop_rng = ep.stream("dropout");
        shuffle(order, shuffle_rng);

        EpochLoss sums;
        const std::size_t n_batches =
            (order.size() + cfg.batch_size - 1) / cfg.batch_size;
        for (std::size_t b = 0; b < n_batches; ++b) {
            try {
                std::size_t begin = b * cfg.batch_size;
                std::size_t end = std::min(begin + cfg.batch_size, order.size());
                std::vector<Triple> positives;
                std::vector<const LabeledSubgraph*> pos_sg;
                positives.reserve(end - begin);
                pos_sg.reserve(end - begin);
                for (std::size_t k = begin; k < end; ++k) {
                    positives.push_back(g.triples[order[k]]);
                    pos_sg.push_back(&pos_cache[order[k]]);
                }
                Batch batch =
                    assemble_batch(g, ctx, std::move(positives), cfg, neg_rng,
                                   con_rng);

                std::vector<LabeledSubgraph> neg_cache(batch.negatives.size());
                parallel_for(batch.negatives.size(), cfg.workers,
                             [&](std::size_t i) {
                                 neg_cache[i] =
                                     make_subgraph(g, batch.negatives[i], cfg);
                             });
                std::vector<const LabeledSubgraph*> neg_sg;
                neg_sg.reserve(neg_cache.size());
                for (const auto& sg : neg_cache) neg_sg.push_back(&sg);

                Graph tape(&m.store);
                LossValues lv = total_loss_value(tape, m, ctx, batch, pos_sg,
                                                 neg_sg, /*training=*/true,
                                                 &drop_rng);
                sums.total += tape.value(lv.total).item();
                sums.rank += tape.value(lv.rank).item();
                sums.contrastive += tape.value(lv.contrastive).item();
                tape.backward(lv.total);
                m.store.sgd_step(cfg.lr);
            } catch (const NumericError& e) {
                throw NumericError(
                    "training diverged in epoch " + std::to_string(epoch) +
                    ", batch " + std::to_string(b + 1) + ": " + e.what() +
                    "\nparameter magnitudes:\n" + store_magnitudes(m.store));
            }
        }
        result.losses.push_back(sums);
        if (on_epoch) on_epoch(epoch, sums);
    }
    return result;
}

void write_loss_csv(const std::vector<EpochLoss>& losses,
                    const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write " + path);
    out << "epoch,loss_total,loss_rank,loss_contrastive\n";
    out.precision(17);
    for (std::size_t i = 0; i < losses.size(); ++i) {
        out << (i + 1) << ',' << losses[i].total << ',' << losses[i].rank << ','
            << losses[i].contrastive << '\n';
    }
    if (!out.flush()) throw FileError("short write to " + path);
}

}  // namespace dekg
