#pragma once

#include <cstdint>
#include <vector>

#include "bsce/grid.hpp"
#include "bsce/prob.hpp"

namespace bsce {

// Dense row-major matrix of Real, sized at construction.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Real> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    Real at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    Real& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }

    bool operator==(const Matrix&) const = default;
};

// Architecture knobs that are fixed before training starts.
struct ModelSpec {
    std::size_t input_side = 24;
    std::size_t hidden_dim = 0;  // 0 = linear softmax head on raw pixels
};

// Flatten-or-one-hidden-layer classifier. With hidden_dim == 0 the feature
// vector is the flattened crop itself; otherwise features are
// relu(feature_w^T x + feature_b). Logits are head_w^T f + head_b.
struct ModelParams {
    std::size_t input_side = 0;
    std::size_t hidden_dim = 0;
    Matrix feature_w;             // [input_dim x hidden_dim] when hidden
    std::vector<Real> feature_b;  // [hidden_dim]
    Matrix head_w;                // [feature_dim x K]
    std::vector<Real> head_b;     // [K]

    std::size_t input_dim() const { return input_side * input_side; }
    std::size_t feature_dim() const {
        return hidden_dim > 0 ? hidden_dim : input_dim();
    }
    std::size_t num_classes() const { return head_b.size(); }

    bool operator==(const ModelParams&) const = default;
};

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
ModelParams init_model(std::size_t input_side, std::size_t hidden_dim,
                       std::size_t k_classes, std::uint64_t seed);

std::vector<Real> flatten(const Grid& g);

// Everything a backward pass needs from one forward evaluation.
struct Activations {
    std::vector<Real> input;       // flattened crop
    std::vector<Real> pre_hidden;  // empty when hidden_dim == 0
    std::vector<Real> features;
    std::vector<Real> logits;
};

Activations forward_activations(const ModelParams& m, std::vector<Real> x);

// Classifier head alone; used when averaging features across views.
LogitVector head_logits(const ModelParams& m, const std::vector<Real>& features);

struct ForwardResult {
    std::vector<Real> features;
    LogitVector logits;
};

// Full forward pass on a crop whose side equals the model input side.
ForwardResult forward(const ModelParams& m, const Grid& crop);

}  // namespace bsce
