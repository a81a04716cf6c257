#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>

#include "bsce/losses.hpp"
#include "bsce/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bsce;

namespace {

LossConfig make_cfg(LossKind kind, Real alpha = 0.4, Real beta = 0.7,
                    Real floor = -4.0) {
    LossConfig cfg;
    cfg.kind = kind;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.clamp_floor = floor;
    return cfg;
}

}  // namespace

TEST_CASE("class_weights balanced counts give unit weights") {
    const ClassWeights w = class_weights({25, 25, 25, 25});
    for (Real v : w.weights()) CHECK(v == 1.0);
    CHECK(w.total() == 100);
}

TEST_CASE("class_weights long-tail example") {
    const ClassWeights w = class_weights({70, 10, 10, 10});
    CHECK(w.weights()[0] == 100.0 / (4.0 * 70.0));  // 5/14
    CHECK(w.weights()[0] == doctest::Approx(0.35714285714285715).epsilon(1e-15));
    CHECK(w.weights()[1] == 2.5);
    CHECK(w.weights()[2] == 2.5);
    CHECK(w.weights()[3] == 2.5);
}

TEST_CASE("class_weights rejects zero counts and tiny K") {
    CHECK_THROWS_AS(class_weights({10, 0, 5}), InvalidInputError);
    CHECK_THROWS_AS(class_weights({10}), InvalidInputError);
}

TEST_CASE("weight-mass identity holds exactly for random counts") {
    Rng rng(201);
    for (int it = 0; it < 50; ++it) {
        const std::size_t k = 2 + rng.below(12);
        const std::vector<Count> counts =
            testutil::random_counts(rng, k, 1, 500);
        CHECK(testutil::weight_mass_identity_exact(counts));
        // The double-precision weights reproduce the identity to rounding.
        const ClassWeights w = class_weights(counts);
        Real sum = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            sum += static_cast<Real>(counts[i]) * w.weights()[i];
        CHECK(sum == doctest::Approx(static_cast<Real>(w.total()))
                         .epsilon(1e-12));
    }
}

TEST_CASE("ce of a perfect one-hot prediction is zero") {
    const ProbabilityVector p = one_hot(1, 3);
    CHECK(ce(p, one_hot(1, 3)) == 0.0);
}

TEST_CASE("ce matches the direct summation oracle") {
    const ProbabilityVector p({0.7, 0.2, 0.1});
    CHECK(ce(p, one_hot(0, 3)) ==
          doctest::Approx(0.35667494393873245).epsilon(1e-15));

    const ProbabilityVector soft({0.5, 0.5, 0.0});
    CHECK(ce(soft, ProbabilityVector({0.5, 0.5, 0.0})) ==
          doctest::Approx(0.6931471805599453).epsilon(1e-15));

    Rng rng(202);
    for (int it = 0; it < 200; ++it) {
        const std::size_t k = 2 + rng.below(6);
        const ProbabilityVector pp = testutil::random_prob(rng, k);
        const ProbabilityVector qq = testutil::random_soft_target(rng, k);
        Real expect = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            expect -= qq[i] * std::log(pp[i]);
        CHECK(ce(pp, qq) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("ce reports infinite loss instead of clamping") {
    const ProbabilityVector p({0.0, 0.5, 0.5});
    CHECK_THROWS_AS(ce(p, one_hot(0, 3)), InvalidInputError);
    // Zero prediction off the target support is fine.
    CHECK_NOTHROW(ce(p, one_hot(1, 3)));
}

TEST_CASE("ce shape mismatch") {
    CHECK_THROWS_AS(ce(ProbabilityVector({0.5, 0.5}), one_hot(0, 3)),
                    InvalidInputError);
}

TEST_CASE("bce reduces to ce under unit weights") {
    Rng rng(203);
    const ClassWeights w = class_weights({40, 40, 40, 40});
    for (int it = 0; it < 100; ++it) {
        const ProbabilityVector p = testutil::random_prob(rng, 4);
        const ProbabilityVector q = testutil::random_soft_target(rng, 4);
        CHECK(bce(p, q, w) == ce(p, q));
    }
}

TEST_CASE("bce weighted example") {
    const ProbabilityVector p({0.7, 0.2, 0.1});
    const std::vector<Real> w = {2.0, 1.0, 1.0};
    CHECK(bce(p, one_hot(0, 3), w) ==
          doctest::Approx(0.7133498878774649).epsilon(1e-15));
}

TEST_CASE("bce factorizes for one-hot targets") {
    Rng rng(204);
    for (int it = 0; it < 200; ++it) {
        const std::size_t k = 2 + rng.below(6);
        const ProbabilityVector p = testutil::random_prob(rng, k);
        const ClassIndex y = rng.below(k);
        const ClassWeights w =
            class_weights(testutil::random_counts(rng, k, 1, 90));
        const ProbabilityVector q = one_hot(y, k);
        CHECK(bce(p, q, w) ==
              doctest::Approx(w.weights()[y] * ce(p, q)).epsilon(1e-12));
    }
}

TEST_CASE("bce shape errors") {
    const ProbabilityVector p({0.5, 0.5});
    const std::vector<Real> w3 = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS(bce(p, ProbabilityVector({0.5, 0.5}), w3),
                    InvalidInputError);
}

TEST_CASE("rce values and closed form") {
    CHECK(rce(one_hot(1, 3), one_hot(1, 3), -4.0) == 0.0);

    const ProbabilityVector p({0.7, 0.2, 0.1});
    CHECK(rce(p, one_hot(0, 3), -4.0) == doctest::Approx(1.2).epsilon(1e-12));

    const ProbabilityVector uniform({0.25, 0.25, 0.25, 0.25});
    CHECK(rce(uniform, one_hot(2, 4), -4.0) ==
          doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("rce one-hot closed form and bounds on random inputs") {
    Rng rng(205);
    for (int it = 0; it < 1000; ++it) {
        const std::size_t k = 2 + rng.below(8);
        const ProbabilityVector p = testutil::random_prob(rng, k);
        const ClassIndex y = rng.below(k);
        const Real a = -rng.uniform(0.5, 8.0);
        const Real r = rce(p, one_hot(y, k), a);
        CHECK(r == doctest::Approx(-a * (1.0 - p[y])).epsilon(1e-12));
        CHECK(r >= 0.0);
        CHECK(r <= -a);
    }
}

TEST_CASE("sce and bsce degenerate weightings") {
    Rng rng(206);
    const ClassWeights w = class_weights({30, 10, 20});
    for (int it = 0; it < 100; ++it) {
        const ProbabilityVector p = testutil::random_prob(rng, 3);
        const ProbabilityVector q = testutil::random_soft_target(rng, 3);
        CHECK(sce(p, q, 1.0, 0.0, -4.0) == ce(p, q));
        CHECK(sce(p, q, 0.0, 1.0, -4.0) == rce(p, q, -4.0));
        CHECK(bsce::bsce(p, q, w, 0.7, 0.0, -4.0) ==
              doctest::Approx(0.7 * bce(p, q, w)).epsilon(1e-15));
    }
}

TEST_CASE("sce and bsce worked examples") {
    const ProbabilityVector p({0.7, 0.2, 0.1});
    const ProbabilityVector q = one_hot(0, 3);
    CHECK(sce(p, q, 0.4, 0.7, -4.0) ==
          doctest::Approx(0.982670).epsilon(1e-6));
    const std::vector<Real> w = {2.0, 1.0, 1.0};
    CHECK(bsce::bsce(p, q, w, 0.4, 0.7, -4.0) ==
          doctest::Approx(1.125340).epsilon(1e-6));
    // Same numbers from the linear-combination oracle.
    CHECK(sce(p, q, 0.4, 0.7, -4.0) ==
          doctest::Approx(0.4 * ce(p, q) + 0.7 * rce(p, q, -4.0))
              .epsilon(1e-15));
    CHECK(bsce::bsce(p, q, w, 0.4, 0.7, -4.0) ==
          doctest::Approx(0.4 * bce(p, q, w) + 0.7 * rce(p, q, -4.0))
              .epsilon(1e-15));
}

TEST_CASE("linearity of the symmetric combinations") {
    Rng rng(207);
    for (int it = 0; it < 300; ++it) {
        const std::size_t k = 2 + rng.below(6);
        const ProbabilityVector p = testutil::random_prob(rng, k);
        const ProbabilityVector q = testutil::random_soft_target(rng, k);
        const ClassWeights w =
            class_weights(testutil::random_counts(rng, k, 1, 60));
        const Real alpha = rng.uniform(0.1, 2.0);
        const Real beta = rng.uniform(0.1, 2.0);
        const Real a = -rng.uniform(0.5, 8.0);
        CHECK(sce(p, q, alpha, beta, a) ==
              doctest::Approx(alpha * ce(p, q) + beta * rce(p, q, a))
                  .epsilon(1e-12));
        CHECK(bsce::bsce(p, q, w, alpha, beta, a) ==
              doctest::Approx(alpha * bce(p, q, w) + beta * rce(p, q, a))
                  .epsilon(1e-12));
    }
}

TEST_CASE("balanced reduction chain: bce == ce and bsce == sce") {
    Rng rng(208);
    for (int it = 0; it < 1000; ++it) {
        const std::size_t k = 2 + rng.below(6);
        const Count per_class = 1 + rng.below(50);
        const ClassWeights w =
            class_weights(std::vector<Count>(k, per_class));
        const ProbabilityVector p = testutil::random_prob(rng, k);
        const ProbabilityVector q = testutil::random_soft_target(rng, k);
        const Real alpha = rng.uniform(0.1, 2.0);
        const Real beta = rng.uniform(0.1, 2.0);
        CHECK(std::abs(bce(p, q, w) - ce(p, q)) <= 1e-12);
        CHECK(std::abs(bsce::bsce(p, q, w, alpha, beta, -4.0) -
                       sce(p, q, alpha, beta, -4.0)) <= 1e-12);
    }
}

TEST_CASE("loss config validation") {
    CHECK_NOTHROW(make_cfg(LossKind::BSCE).validate());
    CHECK_THROWS_AS(make_cfg(LossKind::SCE, 0.0, 0.0).validate(), ConfigError);
    CHECK_THROWS_AS(make_cfg(LossKind::CE, -1.0).validate(), ConfigError);
    CHECK_THROWS_AS(make_cfg(LossKind::CE, 0.4, 0.7, 0.5).validate(),
                    ConfigError);
    CHECK_THROWS_AS(loss_kind_from_string("focal"), ConfigError);
    CHECK(loss_kind_from_string("bsce") == LossKind::BSCE);
}

TEST_CASE("loss_with_grad: ce gradient is p - e_y for one-hot targets") {
    Rng rng(209);
    for (int it = 0; it < 200; ++it) {
        const std::size_t k = 2 + rng.below(8);
        const std::vector<Real> z = testutil::random_logits(rng, k);
        const ClassIndex y = rng.below(k);
        const LossResult res = loss_with_grad(make_cfg(LossKind::CE),
                                              LogitVector(z), one_hot(y, k));
        const ProbabilityVector p = softmax(LogitVector(z));
        for (std::size_t j = 0; j < k; ++j) {
            const Real expect = p[j] - (j == y ? 1.0 : 0.0);
            CHECK(res.grad_logits[j] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("loss_with_grad: rce gradient closed form for one-hot targets") {
    Rng rng(210);
    for (int it = 0; it < 200; ++it) {
        const std::size_t k = 2 + rng.below(8);
        const std::vector<Real> z = testutil::random_logits(rng, k);
        const ClassIndex y = rng.below(k);
        const Real a = -4.0;
        const LossResult res = loss_with_grad(make_cfg(LossKind::RCE),
                                              LogitVector(z), one_hot(y, k));
        const ProbabilityVector p = softmax(LogitVector(z));
        for (std::size_t j = 0; j < k; ++j) {
            const Real expect = a * p[y] * ((j == y ? 1.0 : 0.0) - p[j]);
            CHECK(res.grad_logits[j] ==
                  doctest::Approx(expect).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("loss_with_grad: ce gradient vanishes where p equals the target") {
    Rng rng(211);
    const std::vector<Real> z = testutil::random_logits(rng, 5);
    const ProbabilityVector q = softmax(LogitVector(z));
    const LossResult res =
        loss_with_grad(make_cfg(LossKind::CE), LogitVector(z), q);
    for (Real g : res.grad_logits) CHECK(std::abs(g) <= 1e-15);
}

TEST_CASE("loss_with_grad input checking") {
    const std::vector<Real> z = {0.1, 0.2, 0.3};
    CHECK_THROWS_AS(loss_with_grad(make_cfg(LossKind::BCE), LogitVector(z),
                                   one_hot(0, 3), nullptr),
                    ConfigError);
    CHECK_THROWS_AS(loss_with_grad(make_cfg(LossKind::CE), LogitVector(z),
                                   one_hot(0, 4)),
                    InvalidInputError);
    const ClassWeights w2 = class_weights({5, 5});
    CHECK_THROWS_AS(loss_with_grad(make_cfg(LossKind::BSCE), LogitVector(z),
                                   one_hot(0, 3), &w2),
                    InvalidInputError);
    LossConfig bad = make_cfg(LossKind::CE);
    bad.kind = static_cast<LossKind>(99);
    CHECK_THROWS_AS(loss_with_grad(bad, LogitVector(z), one_hot(0, 3)),
                    ConfigError);
}

TEST_CASE("analytic gradients match central finite differences") {
    // 100 random cases per loss kind; mirrors the acceptance gradient oracle.
    Rng rng(212);
    for (LossKind kind : {LossKind::CE, LossKind::BCE, LossKind::RCE,
                          LossKind::SCE, LossKind::BSCE}) {
        for (int it = 0; it < 100; ++it) {
            const std::size_t k = 2 + rng.below(8);
            const std::vector<Real> z = testutil::random_logits(rng, k);
            const ProbabilityVector q = (it % 2 == 0)
                                            ? one_hot(rng.below(k), k)
                                            : testutil::random_soft_target(rng, k);
            const ClassWeights w =
                class_weights(testutil::random_counts(rng, k, 1, 50));
            LossConfig cfg = make_cfg(kind, rng.uniform(0.1, 2.0),
                                      rng.uniform(0.1, 2.0),
                                      -rng.uniform(1.0, 6.0));

            const LossResult res =
                loss_with_grad(cfg, LogitVector(z), q, &w);
            const auto value_at = [&](const std::vector<Real>& zz) {
                return loss_with_grad(cfg, LogitVector(zz), q, &w).value;
            };
            const std::vector<Real> fd = testutil::fd_gradient(value_at, z);
            CHECK(testutil::rel_error(res.grad_logits, fd) < 1e-6);
        }
    }
}
