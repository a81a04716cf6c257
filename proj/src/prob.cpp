#include "bsce/prob.hpp"

#include <algorithm>
#include <cmath>

namespace bsce {

namespace {
constexpr Real kSumTolerance = 1e-9;
}

ProbabilityVector::ProbabilityVector(std::vector<Real> probs)
    : probs_(std::move(probs)) {
    if (probs_.empty())
        throw InvalidInputError("probability vector must not be empty");
    Real sum = 0.0;
    for (Real v : probs_) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kSumTolerance)
            throw InvalidInputError("probability entry outside [0, 1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
        throw InvalidInputError("probabilities must sum to 1");
}

LogitVector::LogitVector(std::vector<Real> logits) : logits_(std::move(logits)) {
    if (logits_.empty())
        throw InvalidInputError("logit vector must not be empty");
    for (Real v : logits_)
        if (!std::isfinite(v))
            throw InvalidInputError("logit entries must be finite");
}

ProbabilityVector softmax(const LogitVector& z) {
    const std::size_t k = z.size();
    if (k < 2) throw InvalidInputError("softmax requires at least 2 classes");
    const Real zmax = *std::max_element(z.values().begin(), z.values().end());
    std::vector<Real> out(k);
    Real denom = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = std::exp(z[i] - zmax);
        denom += out[i];
    }
    for (Real& v : out) v /= denom;
    return ProbabilityVector(std::move(out));
}

ProbabilityVector one_hot(ClassIndex y, std::size_t k_classes) {
    if (y >= k_classes)
        throw InvalidInputError("one_hot: class index out of range");
    std::vector<Real> out(k_classes, 0.0);
    out[y] = 1.0;
    return ProbabilityVector(std::move(out));
}

ClassIndex top1(const ProbabilityVector& p) {
    ClassIndex best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best]) best = i;
    return best;
}

Real clamped_log(Real q, Real clamp_floor) {
    if (!std::isfinite(q) || q < 0.0 || q > 1.0)
        throw InvalidInputError("clamped_log: q must lie in [0, 1]");
    if (!std::isfinite(clamp_floor) || clamp_floor >= 0.0)
        throw InvalidInputError("clamped_log: clamp floor must be negative");
    return q > std::exp(clamp_floor) ? std::log(q) : clamp_floor;
}

}  // namespace bsce
