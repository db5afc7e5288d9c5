#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "embounds/bounds.hpp"
#include "embounds/discrete_opt.hpp"
#include "test_util.hpp"

using namespace embounds;
using testutil::naive_enumerate;
using testutil::random_scenario;

namespace {

double rescore(const ScenarioModel& m, const Objective& obj,
               const ControlVector& v) {
    return obj.score(transfer(m, encode(v, m)).h);
}

}  // namespace

TEST_SUITE("discrete") {

TEST_CASE("single port enumeration is the max of the two configurations") {
    const ScenarioModel m = random_scenario(2, 2, 1, 0.4, 501);
    const Objective obj = frobenius_objective();
    ControlVector lo = ControlVector::zeros(1);
    ControlVector hi = ControlVector::zeros(1);
    hi.bits[0] = 1;
    const double want = std::max(rescore(m, obj, lo), rescore(m, obj, hi));
    const OptResult r = exhaustive_search(m, obj);
    CHECK(r.evaluations == 2);
    CHECK(r.value == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("gray-code walk agrees with plain enumeration") {
    for (int trial = 0; trial < 4; ++trial) {
        const int n_s = 3 + trial;
        const ScenarioModel m =
            random_scenario(2, 2, n_s, trial % 2 ? 0.6 : 0.0, 510 + trial);
        const Objective obj = frobenius_objective();
        const auto naive = naive_enumerate(
            m, [&](const CMatrix& h) { return obj.score(h); });
        const OptResult r = exhaustive_search(m, obj);
        CHECK(r.evaluations == (1LL << n_s));
        CHECK(std::abs(r.value - naive.value) <=
              1e-10 * (1.0 + std::abs(naive.value)));
        CHECK(r.best.bits == naive.v.bits);
    }
}

TEST_CASE("enumeration agrees for the fidelity objective too") {
    const ScenarioModel m = random_scenario(2, 2, 4, 0.3, 514);
    const TransferMatrix h_des = target_operator(TargetKind::dft, 2);
    const Objective obj = fidelity_objective(h_des);
    const auto naive = naive_enumerate(
        m, [&](const CMatrix& h) { return fidelity(TransferMatrix{h}, h_des); });
    const OptResult r = exhaustive_search(m, obj);
    CHECK(std::abs(r.value - naive.value) <= 1e-10);
    CHECK(r.best.bits == naive.v.bits);
}

TEST_CASE("enumeration refuses oversized port counts") {
    const ScenarioModel m = random_scenario(2, 2, 5, 0.2, 515);
    EsOptions opts;
    opts.max_ports = 4;
    CHECK_THROWS_AS(exhaustive_search(m, frobenius_objective(), opts),
                    ValidationError);
}

TEST_CASE("descent on a flat landscape keeps its starting point") {
    ScenarioModel m = random_scenario(2, 2, 5, 0.4, 517);
    m.a = CMatrix::Zero(2, 5);
    m.passive = false;
    const double want = m.h0.squaredNorm();
    const OptResult r = coordinate_descent(m, frobenius_objective(), 7);
    CHECK(r.value == doctest::Approx(want).epsilon(1e-12));
    CHECK(r.iterations == 0);  // no strictly improving flip exists
}

TEST_CASE("stall rule ends the genetic run on a flat landscape") {
    ScenarioModel m = random_scenario(2, 2, 5, 0.4, 518);
    m.a = CMatrix::Zero(2, 5);
    m.passive = false;
    GaOptions opts;
    opts.population = 40;
    const OptResult r = genetic_algorithm(m, frobenius_objective(), 7, opts);
    CHECK(r.value == doctest::Approx(m.h0.squaredNorm()).epsilon(1e-12));
    CHECK(r.iterations <= opts.stall_limit + 1);
}

TEST_CASE("heuristics never beat the enumeration") {
    for (int trial = 0; trial < 3; ++trial) {
        const ScenarioModel m = random_scenario(2, 2, 6, 0.5, 520 + trial);
        const Objective obj = frobenius_objective();
        const OptResult es = exhaustive_search(m, obj);
        for (std::uint64_t seed : {1ULL, 2ULL}) {
            const OptResult cd = coordinate_descent(m, obj, seed);
            const OptResult ga = genetic_algorithm(m, obj, seed);
            CHECK(cd.value <= es.value + 1e-10 * (1.0 + es.value));
            CHECK(ga.value <= es.value + 1e-10 * (1.0 + es.value));
        }
    }
}

TEST_CASE("reported values match a from-scratch re-evaluation") {
    const ScenarioModel m = random_scenario(3, 3, 7, 0.6, 523);
    const Objective obj = frobenius_objective();
    for (const OptResult& r : {exhaustive_search(m, obj),
                               coordinate_descent(m, obj, 3),
                               genetic_algorithm(m, obj, 3)}) {
        const double again = rescore(m, obj, r.best);
        CHECK(std::abs(r.value - again) <= 1e-10 * (1.0 + std::abs(again)));
    }
}

TEST_CASE("searches are reproducible for a fixed seed") {
    const ScenarioModel m = random_scenario(2, 2, 8, 0.5, 524);
    const Objective obj = frobenius_objective();
    for (std::uint64_t seed : {11ULL, 42ULL}) {
        const OptResult a = coordinate_descent(m, obj, seed);
        const OptResult b = coordinate_descent(m, obj, seed);
        CHECK(a.best.bits == b.best.bits);
        CHECK(a.value == b.value);
        CHECK(a.evaluations == b.evaluations);
        const OptResult g1 = genetic_algorithm(m, obj, seed);
        const OptResult g2 = genetic_algorithm(m, obj, seed);
        CHECK(g1.best.bits == g2.best.bits);
        CHECK(g1.value == g2.value);
        CHECK(g1.evaluations == g2.evaluations);
    }
}

TEST_CASE("rounding a rank-one moment block recovers the configuration") {
    Rng rng(527);
    const ScenarioModel m = random_scenario(2, 2, 4, 0.5, 527);
    const ControlVector v = testutil::random_bits(4, rng);
    const CMatrix x = element_response(m, encode(v, m));
    CVector y(x.size());
    for (Eigen::Index t = 0; t < x.cols(); ++t)
        for (Eigen::Index s = 0; s < x.rows(); ++s)
            y[t * x.rows() + s] = x(s, t);
    ComplexBlocks blocks;
    blocks.y_mat = y * y.adjoint();
    blocks.y_vec = y;
    blocks.sigma = 1.0;
    const Objective obj = frobenius_objective();
    const OptResult r = project_sdr(m, blocks, obj);
    CHECK(r.best.bits == v.bits);
    CHECK(r.value == doctest::Approx(rescore(m, obj, v)).epsilon(1e-12));
}

TEST_CASE("rounding breaks exact ties toward the first load") {
    ScenarioModel m = random_scenario(2, 2, 3, 0.3, 528);
    m.b = CMatrix::Zero(3, 2);
    m.passive = false;
    ComplexBlocks blocks;
    blocks.y_mat = CMatrix::Zero(6, 6);
    blocks.y_vec = CVector::Zero(6);
    blocks.sigma = 1.0;
    const OptResult r = project_sdr(m, blocks, frobenius_objective());
    CHECK(r.best.bits == std::vector<int>(3, 0));
}

TEST_CASE("rounded relaxations stay below their own bound") {
    const ScenarioModel m = random_scenario(2, 2, 5, 0.4, 529);
    const BoundResult bound = frob_sdr_bound(m);
    REQUIRE(bound.valid);
    REQUIRE(bound.blocks.has_value());
    const OptResult r = project_sdr(m, *bound.blocks, frobenius_objective());
    CHECK(r.value <= bound.value + 1e-6 * (1.0 + bound.value));
    const OptResult es = exhaustive_search(m, frobenius_objective());
    CHECK(r.value <= es.value + 1e-10 * (1.0 + es.value));
}

}  // TEST_SUITE
