#include "bsce/tta.hpp"

#include <cmath>

namespace bsce {

void TtaConfig::validate() const {
    if (resize_sides.empty())
        throw ConfigError("tta config: resize side list must not be empty");
    if (crop_side < 1)
        throw ConfigError("tta config: crop_side must be >= 1");
    for (std::size_t s : resize_sides) {
        if (s < 2) throw ConfigError("tta config: resize sides must be >= 2");
        if (s < crop_side)
            throw ConfigError(
                "tta config: every resize side must be >= crop_side");
    }
}

TtaConfig TtaConfig::paper_scales() {
    return TtaConfig{{384, 412, 424, 436, 464}, 331, TtaMode::AverageFeatures};
}

TtaConfig TtaConfig::desk_default() {
    return TtaConfig{{26, 28, 30, 32, 36}, 24, TtaMode::AverageFeatures};
}

Grid bilinear_resize(const Grid& image, std::size_t target_side) {
    if (!image.is_square() || image.rows < 2)
        throw InvalidInputError(
            "bilinear_resize: input must be square with side >= 2");
    if (target_side < 2)
        throw InvalidInputError("bilinear_resize: target side must be >= 2");
    const std::size_t src = image.rows;
    if (target_side == src) return image;

    Grid out(target_side, target_side);
    const double src_span = static_cast<double>(src - 1);
    const double dst_span = static_cast<double>(target_side - 1);
    for (std::size_t r = 0; r < target_side; ++r) {
        const double sr = static_cast<double>(r) * src_span / dst_span;
        const std::size_t r0 = static_cast<std::size_t>(sr);
        const std::size_t r1 = std::min(r0 + 1, src - 1);
        const double fr = sr - static_cast<double>(r0);
        for (std::size_t c = 0; c < target_side; ++c) {
            const double sc = static_cast<double>(c) * src_span / dst_span;
            const std::size_t c0 = static_cast<std::size_t>(sc);
            const std::size_t c1 = std::min(c0 + 1, src - 1);
            const double fc = sc - static_cast<double>(c0);
            const double v = (1.0 - fr) * (1.0 - fc) * image.at(r0, c0) +
                             (1.0 - fr) * fc * image.at(r0, c1) +
                             fr * (1.0 - fc) * image.at(r1, c0) +
                             fr * fc * image.at(r1, c1);
            out.at(r, c) = static_cast<float>(v);
        }
    }
    return out;
}

Grid center_crop(const Grid& image, std::size_t crop_side) {
    if (crop_side < 1)
        throw InvalidInputError("center_crop: crop side must be >= 1");
    if (crop_side > image.rows || crop_side > image.cols)
        throw InvalidInputError("center_crop: crop larger than image");
    const std::size_t r0 = (image.rows - crop_side) / 2;
    const std::size_t c0 = (image.cols - crop_side) / 2;
    Grid out(crop_side, crop_side);
    for (std::size_t r = 0; r < crop_side; ++r)
        for (std::size_t c = 0; c < crop_side; ++c)
            out.at(r, c) = image.at(r0 + r, c0 + c);
    return out;
}

ProbabilityVector tta_predict(const ModelParams& m, const Grid& image,
                              const TtaConfig& cfg) {
    cfg.validate();
    if (cfg.crop_side != m.input_side)
        throw ConfigError("tta config: crop_side must equal model input side");

    const double n_views = static_cast<double>(cfg.resize_sides.size());
    if (cfg.mode == TtaMode::AverageFeatures) {
        std::vector<Real> acc(m.feature_dim(), 0.0);
        for (std::size_t s : cfg.resize_sides) {
            const Grid view = center_crop(bilinear_resize(image, s), cfg.crop_side);
            const ForwardResult fr = forward(m, view);
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += fr.features[j];
        }
        for (Real& v : acc) v /= n_views;
        return softmax(head_logits(m, acc));
    }

    std::vector<Real> acc(m.num_classes(), 0.0);
    for (std::size_t s : cfg.resize_sides) {
        const Grid view = center_crop(bilinear_resize(image, s), cfg.crop_side);
        const ProbabilityVector p = softmax(forward(m, view).logits);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += p[j];
    }
    for (Real& v : acc) v /= n_views;
    return ProbabilityVector(std::move(acc));
}

}  // namespace bsce
