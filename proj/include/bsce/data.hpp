#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bsce/grid.hpp"
#include "bsce/prob.hpp"

namespace bsce {

struct LabeledImage {
    Grid pixels;
    ClassIndex true_label = 0;
    ClassIndex observed_label = 0;

    bool operator==(const LabeledImage&) const = default;
};

enum class NoiseModel { Symmetric, Pairwise };

// Parameters for a synthetic long-tailed, noisily-labeled dataset.
struct DatasetSpec {
    std::size_t classes = 2;        // K
    Count head_count = 100;         // largest class size
    Real imbalance_ratio = 1.0;     // head/tail size ratio, >= 1
    Real noise_rate = 0.0;          // eta, probability of a corrupted label
    NoiseModel noise_model = NoiseModel::Symmetric;
    std::size_t image_side = 32;    // square images
    Real pixel_noise = 0.08;        // sigma of the per-pixel perturbation
    std::size_t val_per_class = 10;
    std::size_t test_per_class = 10;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

// val and test carry clean labels only; train may carry noise.
struct Dataset {
    std::vector<LabeledImage> train;
    std::vector<LabeledImage> val;
    std::vector<LabeledImage> test;
    std::size_t classes = 0;

    std::size_t image_side() const;

    bool operator==(const Dataset&) const = default;
};

// Train count profile n(k) = round(head_count * ratio^(-k / (K-1))).
// Throws ConfigError when any class would round below one sample.
std::vector<Count> long_tail_counts(const DatasetSpec& spec);

// Deterministic synthetic dataset: one smooth random prototype per class,
// samples are the prototype plus clipped Gaussian pixel noise. Train follows
// the long-tail profile and carries label noise at spec.noise_rate; val and
// test are class-balanced and clean.
Dataset synth_dataset(const DatasetSpec& spec);

// With probability eta, replaces each train sample's observed label by a
// wrong class (uniform over the K-1 others, or the next class for Pairwise).
// val/test are untouched. Deterministic given seed.
Dataset inject_noise(Dataset d, Real eta, std::uint64_t seed,
                     NoiseModel model = NoiseModel::Symmetric);

// Tally of observed train labels, length K. May contain zeros.
std::vector<Count> class_counts(const Dataset& d);

void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace bsce
