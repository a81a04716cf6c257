#pragma once

#include <vector>

#include "bsce/grid.hpp"
#include "bsce/model.hpp"
#include "bsce/prob.hpp"

namespace bsce {

enum class TtaMode { AverageFeatures, AverageProbs };

// Multi-scale resize + center-crop inference configuration.
struct TtaConfig {
    std::vector<std::size_t> resize_sides;
    std::size_t crop_side = 0;
    TtaMode mode = TtaMode::AverageFeatures;

    void validate() const;  // throws ConfigError

    // Full-scale side list 384/412/424/436/464 cropped to 331.
    static TtaConfig paper_scales();
    // Desk-scale analogue for 32-pixel images cropped to 24.
    static TtaConfig desk_default();
};

// Corner-aligned bilinear interpolation of a square grid. Requires source and
// target sides >= 2. Identity when the sides match.
Grid bilinear_resize(const Grid& image, std::size_t target_side);

// Window of size crop_side starting at floor((H-c)/2), floor((W-c)/2).
Grid center_crop(const Grid& image, std::size_t crop_side);

// Predict by resizing the image to every configured side, center-cropping to
// the model input, and averaging either pre-head features or per-view softmax
// outputs. Views are reduced in side-list order.
ProbabilityVector tta_predict(const ModelParams& m, const Grid& image,
                              const TtaConfig& cfg);

}  // namespace bsce
