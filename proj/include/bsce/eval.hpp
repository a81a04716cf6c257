#pragma once

#include <string>
#include <vector>

#include "bsce/data.hpp"
#include "bsce/losses.hpp"
#include "bsce/model.hpp"
#include "bsce/trainer.hpp"
#include "bsce/tta.hpp"

namespace bsce {

struct SweepRow {
    std::string label;
    std::string split;
    Real mean_top1_error = 0.0;
    std::size_t n = 0;
    std::string seed;  // run seed, "mean" for aggregates, "-" when not seeded
};

struct SweepReport {
    std::vector<SweepRow> rows;
    std::vector<std::string> footnotes;

    std::string to_csv() const;   // footnotes become '#' comment lines
    std::string to_text() const;  // aligned table for stdout
};

// Fraction of positions where prediction != label.
Real mean_top1_error(const std::vector<ClassIndex>& predictions,
                     const std::vector<ClassIndex>& labels);

// Plurality vote over per-model distributions for one sample. Ties break by
// the higher probability mass summed across models, then the lower index.
ClassIndex top1_vote(const std::vector<ProbabilityVector>& model_probs);

// Mean top-1 error of a voted ensemble on a split. Each model predicts via
// tta_predict when `tta` is given, otherwise via a plain center-crop forward.
Real evaluate_ensemble(const std::vector<ModelParams>& models,
                       const std::vector<LabeledImage>& split,
                       const TtaConfig* tta = nullptr);

// Trains one model per (loss kind, seed) with everything else fixed and
// reports per-seed and per-kind-mean val/test errors.
SweepReport loss_sweep(const Dataset& data, const ModelSpec& model,
                       const TrainConfig& base,
                       const std::vector<LossKind>& kinds,
                       const std::vector<std::uint64_t>& seeds);

// One row per single resize side plus one row for the combined configuration.
SweepReport tta_sweep(const ModelParams& model,
                      const std::vector<LabeledImage>& split,
                      const std::string& split_name, const TtaConfig& cfg);

// Compact per-kind mean-test-error summary (one column per loss kind).
std::string loss_summary_table(const SweepReport& report,
                               const std::vector<LossKind>& kinds);

}  // namespace bsce
