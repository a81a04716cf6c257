#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "bsce/data.hpp"
#include "bsce/losses.hpp"
#include "bsce/model.hpp"

namespace bsce {

struct TrainConfig {
    LossConfig loss;
    Real initial_lr = 0.01;
    Real lr_factor = 0.1;       // multiplier applied on plateau
    std::size_t patience = 3;   // epochs without improvement before a cut
    Real min_delta = 1e-4;      // smaller improvements count as none
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    Real train_loss = 0.0;
    Real val_error = 0.0;
    Real lr = 0.0;  // learning rate in effect after this epoch's plateau step

    bool operator==(const EpochStats&) const = default;
};

struct TrainState {
    ModelParams params;
    Real current_lr = 0.0;
    Real best_val_error = std::numeric_limits<Real>::infinity();
    std::size_t epochs_since_improvement = 0;
    std::vector<EpochStats> history;

    bool operator==(const TrainState&) const = default;
};

// One training sample, already center-cropped to the model input and
// flattened.
struct TrainExample {
    std::vector<Real> x;
    ClassIndex label = 0;
};

std::vector<TrainExample> make_examples(const std::vector<LabeledImage>& split,
                                        std::size_t input_side,
                                        bool use_observed_labels);

// Arithmetic mean of per-sample losses at p = softmax of the model's logits.
Real batch_mean_loss(const ModelParams& m,
                     const std::vector<TrainExample>& batch,
                     const LossConfig& loss, const ClassWeights* weights);

// Plain SGD over seeded-shuffled mini-batches; evaluates mean top-1 error on
// the val split after every epoch and applies the plateau schedule. Fully
// deterministic in (dataset, init, cfg).
TrainState train(const Dataset& data, ModelParams init, const TrainConfig& cfg);

// Continues a state produced by train()/load_checkpoint() up to cfg.epochs;
// the trajectory matches uninterrupted training exactly.
TrainState resume_train(const Dataset& data, TrainState state,
                        const TrainConfig& cfg);

// Improvement beyond min_delta resets the stagnation counter; once the
// counter reaches patience the learning rate is multiplied by lr_factor.
void plateau_step(TrainState& state, Real new_val_error,
                  const TrainConfig& cfg);

struct Checkpoint {
    TrainConfig config;
    TrainState state;
};

void save_checkpoint(const TrainState& state, const TrainConfig& cfg,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace bsce
