#pragma once

#include <cstddef>
#include <vector>

#include "bsce/error.hpp"

namespace bsce {

// Row-major single-channel image buffer. Dataset images keep values in [0, 1];
// the buffer itself does not enforce that.
struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> pix;

    Grid() = default;
    Grid(std::size_t r, std::size_t c, float fill = 0.0f)
        : rows(r), cols(c), pix(r * c, fill) {}

    float at(std::size_t r, std::size_t c) const { return pix[r * cols + c]; }
    float& at(std::size_t r, std::size_t c) { return pix[r * cols + c]; }

    bool is_square() const { return rows == cols; }
    std::size_t side() const {
        if (!is_square()) throw InvalidInputError("grid is not square");
        return rows;
    }

    bool operator==(const Grid&) const = default;
};

}  // namespace bsce
