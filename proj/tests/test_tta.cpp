#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "bsce/rng.hpp"
#include "bsce/tta.hpp"
#include "doctest.h"

using namespace bsce;

namespace {

Grid random_grid(Rng& rng, std::size_t rows, std::size_t cols) {
    Grid g(rows, cols);
    for (float& v : g.pix) v = static_cast<float>(rng.uniform());
    return g;
}

}  // namespace

TEST_CASE("resize to the source side is the identity") {
    Rng rng(501);
    for (std::size_t side : {2u, 3u, 5u, 8u}) {
        const Grid g = random_grid(rng, side, side);
        CHECK(bilinear_resize(g, side) == g);
    }
}

TEST_CASE("resize of a constant image is constant") {
    const Grid g(4, 4, 0.37f);
    for (std::size_t target : {2u, 3u, 7u, 9u}) {
        const Grid out = bilinear_resize(g, target);
        CHECK(out.rows == target);
        for (float v : out.pix) CHECK(v == 0.37f);
    }
}

TEST_CASE("2x2 to 3x3 interpolates the middle column to one half") {
    Grid g(2, 2);
    g.at(0, 0) = 0.0f;
    g.at(0, 1) = 1.0f;
    g.at(1, 0) = 0.0f;
    g.at(1, 1) = 1.0f;
    const Grid out = bilinear_resize(g, 3);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(out.at(r, 0) == 0.0f);
        CHECK(out.at(r, 1) == 0.5f);
        CHECK(out.at(r, 2) == 1.0f);
    }
}

TEST_CASE("resize stays within the input range") {
    Rng rng(502);
    for (int it = 0; it < 50; ++it) {
        const std::size_t side = 2 + rng.below(12);
        const Grid g = random_grid(rng, side, side);
        const float lo = *std::min_element(g.pix.begin(), g.pix.end());
        const float hi = *std::max_element(g.pix.begin(), g.pix.end());
        const Grid out = bilinear_resize(g, 2 + rng.below(20));
        for (float v : out.pix) {
            CHECK(v >= lo);
            CHECK(v <= hi);
        }
    }
}

TEST_CASE("resize rejects degenerate shapes") {
    CHECK_THROWS_AS(bilinear_resize(Grid(1, 1, 0.5f), 4), InvalidInputError);
    CHECK_THROWS_AS(bilinear_resize(Grid(4, 4, 0.5f), 1), InvalidInputError);
    CHECK_THROWS_AS(bilinear_resize(Grid(3, 4, 0.5f), 4), InvalidInputError);
}

TEST_CASE("center_crop offsets follow the floor rule") {
    // 6x6 crop 4 starts at (1, 1); 5x5 crop 4 starts at (0, 0).
    Grid g(6, 6);
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = 0; c < 6; ++c)
            g.at(r, c) = static_cast<float>(r * 10 + c);
    const Grid out = center_crop(g, 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c)
            CHECK(out.at(r, c) == static_cast<float>((r + 1) * 10 + (c + 1)));

    Grid g5(5, 5);
    for (std::size_t i = 0; i < 25; ++i) g5.pix[i] = static_cast<float>(i);
    const Grid out5 = center_crop(g5, 4);
    CHECK(out5.at(0, 0) == 0.0f);
    CHECK(out5.at(3, 3) == 18.0f);
}

TEST_CASE("center_crop exhaustive offsets for H, W <= 16") {
    Rng rng(503);
    for (std::size_t rows = 1; rows <= 16; ++rows) {
        for (std::size_t cols = 1; cols <= 16; ++cols) {
            const Grid g = random_grid(rng, rows, cols);
            for (std::size_t crop = 1; crop <= std::min(rows, cols); ++crop) {
                const Grid out = center_crop(g, crop);
                const std::size_t r0 = (rows - crop) / 2;
                const std::size_t c0 = (cols - crop) / 2;
                for (std::size_t r = 0; r < crop; ++r)
                    for (std::size_t c = 0; c < crop; ++c)
                        CHECK(out.at(r, c) == g.at(r0 + r, c0 + c));
            }
        }
    }
}

TEST_CASE("full-frame crop is the identity") {
    Rng rng(504);
    const Grid g = random_grid(rng, 7, 7);
    CHECK(center_crop(g, 7) == g);
}

TEST_CASE("crop larger than the image is rejected") {
    CHECK_THROWS_AS(center_crop(Grid(4, 4, 0.5f), 5), InvalidInputError);
    CHECK_THROWS_AS(center_crop(Grid(4, 4, 0.5f), 0), InvalidInputError);
}

TEST_CASE("resize then crop of a constant image is constant") {
    const Grid g(8, 8, 0.61f);
    const Grid out = center_crop(bilinear_resize(g, 11), 6);
    for (float v : out.pix) CHECK(v == 0.61f);
}

TEST_CASE("tta config validation") {
    TtaConfig cfg{{8, 10}, 8, TtaMode::AverageFeatures};
    CHECK_NOTHROW(cfg.validate());
    cfg.resize_sides = {};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.resize_sides = {6};
    cfg.crop_side = 8;  // side < crop
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(TtaConfig::paper_scales().crop_side == 331);
    CHECK(TtaConfig::paper_scales().resize_sides ==
          std::vector<std::size_t>{384, 412, 424, 436, 464});
    CHECK_NOTHROW(TtaConfig::paper_scales().validate());
    CHECK_NOTHROW(TtaConfig::desk_default().validate());
}

TEST_CASE("single identity view equals plain inference exactly") {
    Rng rng(505);
    const ModelParams m = init_model(8, 4, 5, 2);
    const Grid img = random_grid(rng, 8, 8);
    const ProbabilityVector plain = softmax(forward(m, img).logits);
    for (TtaMode mode : {TtaMode::AverageFeatures, TtaMode::AverageProbs}) {
        const TtaConfig cfg{{8}, 8, mode};
        const ProbabilityVector p = tta_predict(m, img, cfg);
        for (std::size_t k = 0; k < p.size(); ++k) CHECK(p[k] == plain[k]);
    }
}

TEST_CASE("single view on a larger image matches resize+crop+forward") {
    Rng rng(506);
    const ModelParams m = init_model(6, 0, 4, 3);
    const Grid img = random_grid(rng, 10, 10);
    const TtaConfig cfg{{8}, 6, TtaMode::AverageProbs};
    const ProbabilityVector p = tta_predict(m, img, cfg);
    const ProbabilityVector expect =
        softmax(forward(m, center_crop(bilinear_resize(img, 8), 6)).logits);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(p[k] == expect[k]);
}

TEST_CASE("repeated identical sides equal the single view") {
    Rng rng(507);
    const ModelParams m = init_model(6, 3, 4, 4);
    const Grid img = random_grid(rng, 9, 9);
    for (TtaMode mode : {TtaMode::AverageFeatures, TtaMode::AverageProbs}) {
        const TtaConfig one{{7}, 6, mode};
        const TtaConfig three{{7, 7, 7}, 6, mode};
        const ProbabilityVector a = tta_predict(m, img, one);
        const ProbabilityVector b = tta_predict(m, img, three);
        for (std::size_t k = 0; k < a.size(); ++k)
            CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-14));
    }
}

TEST_CASE("average_probs matches the per-view recomputation oracle") {
    Rng rng(508);
    const ModelParams m = init_model(6, 0, 4, 5);
    const Grid img = random_grid(rng, 12, 12);
    const TtaConfig cfg{{6, 9, 12}, 6, TtaMode::AverageProbs};
    const ProbabilityVector p = tta_predict(m, img, cfg);

    std::vector<Real> mean(4, 0.0);
    for (std::size_t side : cfg.resize_sides) {
        const ProbabilityVector view =
            softmax(forward(m, center_crop(bilinear_resize(img, side), 6)).logits);
        for (std::size_t k = 0; k < 4; ++k) mean[k] += view[k];
    }
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(p[k] == doctest::Approx(mean[k] / 3.0).epsilon(1e-15));
}

TEST_CASE("view order does not matter") {
    Rng rng(509);
    const ModelParams m = init_model(6, 4, 5, 6);
    const Grid img = random_grid(rng, 12, 12);
    for (TtaMode mode : {TtaMode::AverageFeatures, TtaMode::AverageProbs}) {
        const TtaConfig fwd{{6, 8, 10, 12}, 6, mode};
        const TtaConfig rev{{12, 10, 8, 6}, 6, mode};
        const ProbabilityVector a = tta_predict(m, img, fwd);
        const ProbabilityVector b = tta_predict(m, img, rev);
        for (std::size_t k = 0; k < a.size(); ++k)
            CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-12));
    }
}

TEST_CASE("tta output is a valid distribution in both modes") {
    Rng rng(510);
    for (int it = 0; it < 20; ++it) {
        const ModelParams m = init_model(5, it % 2 ? 6 : 0, 3, it);
        const std::size_t side = 5 + rng.below(8);
        const Grid sq = random_grid(rng, side, side);
        const TtaConfig cfg{{5, 6, 9}, 5,
                            it % 2 ? TtaMode::AverageProbs
                                   : TtaMode::AverageFeatures};
        // the ProbabilityVector constructor enforces the invariants
        CHECK_NOTHROW(tta_predict(m, sq, cfg));
    }
}

TEST_CASE("tta rejects a crop that disagrees with the model input") {
    const ModelParams m = init_model(6, 0, 3, 1);
    const Grid img(8, 8, 0.5f);
    const TtaConfig cfg{{8}, 7, TtaMode::AverageFeatures};
    CHECK_THROWS_AS(tta_predict(m, img, cfg), ConfigError);
}
