#include <doctest.h>

#include <cmath>

#include "embounds/bounds.hpp"
#include "embounds/discrete_opt.hpp"
#include "test_util.hpp"

using namespace embounds;
using testutil::naive_enumerate;
using testutil::random_scenario;

TEST_SUITE("bounds") {

TEST_CASE("two-point problem is tight") {
    Rng rng(401);
    ScenarioModel m;
    m.n_t = m.n_r = m.n_s = 1;
    m.h0 = rng.cnormal_matrix(1, 1);
    m.a = rng.cnormal_matrix(1, 1);
    m.gamma = CMatrix::Zero(1, 1);
    m.b = rng.cnormal_matrix(1, 1);
    m.alpha = cxd(1.0, 0.0);
    m.beta = cxd(-1.0, 0.0);

    const double lo = std::norm(m.h0(0, 0) + m.alpha * m.a(0, 0) * m.b(0, 0));
    const double hi = std::norm(m.h0(0, 0) + m.beta * m.a(0, 0) * m.b(0, 0));
    const double best = std::max(lo, hi);

    const BoundResult r = frob_sdr_bound(m);
    REQUIRE(r.valid);
    CHECK(r.value >= best - 1e-6 * (1.0 + best));
    CHECK(r.value <= best + 1e-6 * (1.0 + best));
}

TEST_CASE("configuration-independent channel gives the exact constant") {
    ScenarioModel m = random_scenario(2, 2, 3, 0.4, 403);
    m.a = CMatrix::Zero(2, 3);
    m.passive = false;
    const double want = m.h0.squaredNorm();

    const BoundResult sdr = frob_sdr_bound(m);
    REQUIRE(sdr.valid);
    CHECK(std::abs(sdr.value - want) <= 1e-6 * (1.0 + want));

    const BoundResult ni = frob_ni_bound(m);
    REQUIRE(ni.valid);
    CHECK(ni.value == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("frobenius bounds dominate the exhaustive optimum") {
    for (int trial = 0; trial < 6; ++trial) {
        const double coupling = trial % 3 == 0 ? 0.0 : (trial % 3 == 1 ? 0.3 : 0.7);
        const ScenarioModel m = random_scenario(2, 2, 4, coupling, 410 + trial);
        const auto es = naive_enumerate(
            m, [](const CMatrix& h) { return h.squaredNorm(); });

        const BoundResult sdr = frob_sdr_bound(m);
        REQUIRE(sdr.valid);
        CHECK(sdr.value >= es.value - 1e-6 * (1.0 + es.value));

        const BoundResult ni = frob_ni_bound(m);
        REQUIRE(ni.valid);
        CHECK(ni.value >= es.value - 1e-9 * (1.0 + es.value));

        const BoundResult nio = frob_nio_bound(m);
        REQUIRE(nio.valid);
        CHECK(nio.value <= ni.value + 1e-9 * (1.0 + ni.value));
        CHECK(nio.value >= es.value - 1e-6 * (1.0 + es.value));
    }
}

TEST_CASE("norm-inequality bound on a pinned example") {
    ScenarioModel m;
    m.n_t = m.n_r = m.n_s = 1;
    m.h0 = CMatrix::Zero(1, 1);
    m.a = CMatrix::Constant(1, 1, cxd(1.0, 0.0));
    m.gamma = CMatrix::Zero(1, 1);
    m.b = CMatrix::Constant(1, 1, cxd(1.0, 0.0));
    m.alpha = cxd(1.0, 0.0);
    m.beta = cxd(-1.0, 0.0);
    const BoundResult ni = frob_ni_bound(m);
    REQUIRE(ni.valid);
    CHECK(ni.value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("norm-inequality bound reports invalid when the margin closes") {
    ScenarioModel m = random_scenario(2, 2, 3, 0.8, 421);
    m.alpha = cxd(2.0, 0.0);  // gamma_load * coupling norm > 1
    m.passive = false;
    const BoundResult ni = frob_ni_bound(m);
    CHECK_FALSE(ni.valid);
    CHECK_FALSE(ni.note.empty());
    const BoundResult nio = frob_nio_bound(m);
    CHECK_FALSE(nio.valid);
}

TEST_CASE("zero-iteration gauge search reproduces the plain bound exactly") {
    const ScenarioModel m = random_scenario(2, 2, 4, 0.5, 423);
    NioOptions opts;
    opts.max_iterations = 0;
    const BoundResult ni = frob_ni_bound(m);
    const BoundResult nio = frob_nio_bound(m, opts);
    REQUIRE(ni.valid);
    REQUIRE(nio.valid);
    CHECK(nio.value == ni.value);
}

TEST_CASE("gauge search strictly helps an imbalanced model") {
    ScenarioModel m = random_scenario(2, 2, 4, 0.3, 427);
    m.b *= 10.0;
    m.passive = false;
    const BoundResult ni = frob_ni_bound(m);
    const BoundResult nio = frob_nio_bound(m);
    REQUIRE(ni.valid);
    REQUIRE(nio.valid);
    CHECK(nio.value < ni.value * (1.0 - 1e-6));
    CHECK(nio.gauge.has_value());
}

TEST_CASE("sdr bound carries diagnostics") {
    const ScenarioModel m = random_scenario(2, 2, 3, 0.4, 431);
    const BoundResult r = frob_sdr_bound(m);
    REQUIRE(r.valid);
    REQUIRE(r.sigma.has_value());
    CHECK(std::abs(*r.sigma - 1.0) <= 1e-5);
    CHECK(r.blocks.has_value());
    CHECK(r.eff_rank.has_value());
    CHECK(*r.eff_rank >= 1.0 - 1e-9);
    CHECK(r.iterations > 0);
}

TEST_CASE("sdr bound is gauge invariant") {
    Rng rng(433);
    const ScenarioModel m = random_scenario(2, 2, 3, 0.5, 433);
    const BoundResult base = frob_sdr_bound(m);
    REQUIRE(base.valid);
    for (int t = 0; t < 3; ++t) {
        CVector d(3);
        for (int i = 0; i < 3; ++i)
            d[i] = std::exp(cxd(0.3 * rng.normal(), rng.normal()));
        const BoundResult gauged = frob_sdr_bound(apply_gauge(m, d));
        REQUIRE(gauged.valid);
        CHECK(std::abs(gauged.value - base.value) <=
              1e-5 * (1.0 + std::abs(base.value)));
    }
}

TEST_CASE("self-target fidelity bound reaches one") {
    Rng rng(439);
    const ScenarioModel m = random_scenario(2, 2, 3, 0.3, 439);
    const ControlVector v = testutil::random_bits(3, rng);
    const TransferMatrix h_des = transfer(m, encode(v, m));
    const BoundResult r = fid_sdr_bound(m, h_des);
    REQUIRE(r.valid);
    CHECK(r.value <= 1.0);
    CHECK(r.value >= 1.0 - 1e-6);
    REQUIRE(r.raw_value.has_value());
    CHECK(*r.raw_value >= 1.0 - 1e-6);
}

TEST_CASE("fidelity bound dominates the exhaustive fidelity optimum") {
    for (int trial = 0; trial < 4; ++trial) {
        const ScenarioModel m =
            random_scenario(2, 2, 4, trial % 2 ? 0.5 : 0.0, 440 + trial);
        const TransferMatrix h_des = target_operator(
            trial % 2 ? TargetKind::dft : TargetKind::identity, 2);
        const auto es = naive_enumerate(m, [&](const CMatrix& h) {
            return fidelity(TransferMatrix{h}, h_des);
        });
        const BoundResult r = fid_sdr_bound(m, h_des);
        REQUIRE(r.valid);
        CHECK(r.value >= es.value - 1e-6);
        CHECK(r.value <= 1.0);
    }
}

TEST_CASE("unreachable target pins the fidelity bound at zero") {
    // gamma = 0, h0 = 0, one element: every attainable channel lies on the
    // E11 direction; the target sits on E22, orthogonal to all of them.
    ScenarioModel m;
    m.n_t = m.n_r = 2;
    m.n_s = 1;
    m.h0 = CMatrix::Zero(2, 2);
    m.a = CMatrix::Zero(2, 1);
    m.a(0, 0) = 1.0;
    m.gamma = CMatrix::Zero(1, 1);
    m.b = CMatrix::Zero(1, 2);
    m.b(0, 0) = 1.0;
    m.alpha = cxd(1.0, 0.0);
    m.beta = cxd(-1.0, 0.0);

    TransferMatrix h_des{CMatrix::Zero(2, 2)};
    h_des.h(1, 1) = 1.0;

    const auto es = naive_enumerate(m, [&](const CMatrix& h) {
        return fidelity(TransferMatrix{h}, h_des);
    });
    CHECK(es.value <= 1e-12);

    const BoundResult r = fid_sdr_bound(m, h_des);
    REQUIRE(r.valid);
    CHECK(r.value <= 1e-6);
}

TEST_CASE("bisection bound brackets the achievable fidelity") {
    Rng rng(443);
    const ScenarioModel m = random_scenario(2, 2, 3, 0.3, 443);
    const TransferMatrix self = transfer(m, encode(testutil::random_bits(3, rng), m));
    const BoundResult reach = fid_bisection_bound(m, self);
    REQUIRE(reach.valid);
    CHECK(reach.value >= 1.0 - 1e-3);

    const TransferMatrix h_des = target_operator(TargetKind::identity, 2);
    const BoundResult bis = fid_bisection_bound(m, h_des);
    const BoundResult cc = fid_sdr_bound(m, h_des);
    REQUIRE(bis.valid);
    REQUIRE(cc.valid);
    CHECK(std::abs(bis.value - cc.value) <= 5e-3);
}

TEST_CASE("effective rank on pinned spectra") {
    CHECK(effective_rank(CMatrix::Identity(4, 4)) ==
          doctest::Approx(4.0).epsilon(1e-12));
    CVector v(3);
    v << cxd(1.0, 0.0), cxd(0.5, 0.5), cxd(-0.25, 0.0);
    const CMatrix rank1 = v * v.adjoint();
    CHECK(effective_rank(rank1) == doctest::Approx(1.0).epsilon(1e-9));
    CMatrix diag = CMatrix::Zero(3, 3);
    diag(0, 0) = 1.0;
    diag(1, 1) = 1.0;
    CHECK(effective_rank(diag) == doctest::Approx(2.0).epsilon(1e-12));

    CMatrix indef = CMatrix::Identity(2, 2);
    indef(1, 1) = -1.0;
    CHECK_THROWS_AS(effective_rank(indef), ValidationError);
    CHECK_THROWS_AS(effective_rank(CMatrix::Zero(2, 2)), ValidationError);
}

TEST_CASE("bound kind strings round trip") {
    for (BoundKind k :
         {BoundKind::frob_sdr, BoundKind::frob_ni, BoundKind::frob_nio,
          BoundKind::fid_sdr, BoundKind::fid_sdr_raw, BoundKind::fid_bisection})
        CHECK(bound_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(bound_kind_from_string("nope"), ValidationError);
}

}  // TEST_SUITE
