#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bsce/error.hpp"

namespace bsce {

using Real = double;
using ClassIndex = std::size_t;
using Count = std::uint64_t;

// Distribution over K classes. Entries are nonnegative and sum to 1 within
// 1e-9; both predicted and target distributions are carried as this type.
class ProbabilityVector {
public:
    explicit ProbabilityVector(std::vector<Real> probs);

    std::size_t size() const { return probs_.size(); }
    Real operator[](std::size_t k) const { return probs_[k]; }
    const std::vector<Real>& values() const { return probs_; }

private:
    std::vector<Real> probs_;
};

// Pre-softmax scores; every entry must be finite.
class LogitVector {
public:
    explicit LogitVector(std::vector<Real> logits);

    std::size_t size() const { return logits_.size(); }
    Real operator[](std::size_t k) const { return logits_[k]; }
    const std::vector<Real>& values() const { return logits_; }

private:
    std::vector<Real> logits_;
};

// Numerically stable softmax (max subtraction, no epsilon). Requires K >= 2.
ProbabilityVector softmax(const LogitVector& z);

// Indicator distribution: entry y is 1, all others 0. Requires y < k_classes.
ProbabilityVector one_hot(ClassIndex y, std::size_t k_classes);

// Argmax class; ties resolve to the lowest index.
ClassIndex top1(const ProbabilityVector& p);

// ln(q) with a finite floor: returns clamp_floor whenever q <= exp(clamp_floor).
// Requires q in [0, 1] and clamp_floor < 0.
Real clamped_log(Real q, Real clamp_floor);

}  // namespace bsce
