#include <doctest.h>

#include <cmath>

#include "embounds/flip_evaluator.hpp"
#include "embounds/scenario.hpp"
#include "test_util.hpp"

using namespace embounds;
using testutil::random_bits;
using testutil::random_scenario;
using testutil::transfer_oracle;

namespace {

ScenarioModel tiny_model(int n_t, int n_r, int n_s) {
    ScenarioModel m;
    m.n_t = n_t;
    m.n_r = n_r;
    m.n_s = n_s;
    m.h0 = CMatrix::Zero(n_r, n_t);
    m.a = CMatrix::Zero(n_r, n_s);
    m.gamma = CMatrix::Zero(n_s, n_s);
    m.b = CMatrix::Zero(n_s, n_t);
    m.alpha = cxd(1.0, 0.0);
    m.beta = cxd(-1.0, 0.0);
    return m;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("encode maps bits to the two load states") {
    ScenarioModel m = tiny_model(1, 1, 3);
    m.alpha = cxd(0.9, 0.0);
    m.beta = cxd(-0.8, 0.0);

    ControlVector v = ControlVector::zeros(3);
    LoadVector r = encode(v, m);
    for (int i = 0; i < 3; ++i) CHECK(r.loads[i] == m.alpha);

    v.bits = {1, 1, 1};
    r = encode(v, m);
    for (int i = 0; i < 3; ++i) CHECK(r.loads[i] == m.beta);

    v.bits = {0, 1, 0};
    r = encode(v, m);
    CHECK(r.loads[0] == cxd(0.9, 0.0));
    CHECK(r.loads[1] == cxd(-0.8, 0.0));
    CHECK(r.loads[2] == cxd(0.9, 0.0));
}

TEST_CASE("control vector string round trip") {
    ControlVector v;
    v.bits = {1, 0, 0, 1, 1};
    CHECK(ControlVector::from_string(v.to_string()).bits == v.bits);
    CHECK_THROWS_AS(ControlVector::from_string("01x"), ValidationError);
}

TEST_CASE("transfer with zero coupling is h0 + a diag(r) b") {
    Rng rng(7);
    ScenarioModel m = tiny_model(2, 2, 3);
    m.h0 = rng.cnormal_matrix(2, 2);
    m.a = rng.cnormal_matrix(2, 3);
    m.b = rng.cnormal_matrix(3, 2);
    const LoadVector r = encode(random_bits(3, rng), m);

    const CMatrix expect =
        m.h0 + m.a * CMatrix(r.loads.asDiagonal()) * m.b;
    CHECK((transfer(m, r).h - expect).norm() <= 1e-14 * expect.norm());
}

TEST_CASE("alpha = 0 and all-zero bits leave only the direct path") {
    Rng rng(9);
    ScenarioModel m = tiny_model(2, 2, 4);
    m.alpha = cxd(0.0, 0.0);
    m.beta = cxd(1.0, 0.0);
    m.h0 = rng.cnormal_matrix(2, 2);
    m.a = rng.cnormal_matrix(2, 4);
    m.gamma = 0.2 * rng.cnormal_matrix(4, 4);
    m.b = rng.cnormal_matrix(4, 2);
    const TransferMatrix h = transfer(m, encode(ControlVector::zeros(4), m));
    CHECK((h.h - m.h0).norm() == 0.0);
}

TEST_CASE("transfer matches the independent dense oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        ScenarioModel m = random_scenario(2, 2, 3, 0.5, 100 + trial);
        const LoadVector r = encode(random_bits(3, rng), m);
        const CMatrix got = transfer(m, r).h;
        const CMatrix want = transfer_oracle(m, r);
        CHECK((got - want).norm() <= 1e-12 * (1.0 + want.norm()));
    }
}

TEST_CASE("near-resonant configuration raises a numerical error") {
    ScenarioModel m = tiny_model(1, 1, 1);
    m.h0 = CMatrix::Constant(1, 1, cxd(0.1, 0.0));
    m.a = CMatrix::Constant(1, 1, cxd(1.0, 0.0));
    m.b = CMatrix::Constant(1, 1, cxd(1.0, 0.0));
    m.gamma = CMatrix::Constant(1, 1, cxd(1.0, 0.0));
    m.alpha = cxd(1.0, 0.0);  // 1 - phi*gamma == 0: singular resolvent
    m.beta = cxd(-1.0, 0.0);
    const LoadVector r = encode(ControlVector::zeros(1), m);
    CHECK_THROWS_AS(transfer(m, r), NumericalError);
}

TEST_CASE("validate rejects inconsistent blocks and equal loads") {
    ScenarioModel m = tiny_model(2, 2, 3);
    CHECK_NOTHROW(m.validate());

    ScenarioModel bad = m;
    bad.b = CMatrix::Zero(2, 2);
    CHECK_THROWS_AS(bad.validate(), DimensionError);

    bad = m;
    bad.beta = bad.alpha;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = m;
    bad.passive = true;
    bad.alpha = cxd(1.5, 0.0);
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("passive flag enforces the assembled scattering norm") {
    ScenarioModel m = tiny_model(1, 1, 1);
    m.h0 = CMatrix::Constant(1, 1, cxd(2.0, 0.0));
    m.passive = true;
    CHECK_THROWS_AS(m.validate(), ValidationError);
    ScenarioModel ok = random_scenario(2, 2, 3, 0.3, 5);
    ok.passive = true;
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("reduce_fixed with all elements used returns the model unchanged") {
    ScenarioModel m = random_scenario(2, 2, 4, 0.4, 21);
    const ScenarioModel r = reduce_fixed(m, {0, 1, 2, 3});
    CHECK((r.gamma - m.gamma).norm() == 0.0);
    CHECK((r.h0 - m.h0).norm() == 0.0);
    CHECK((r.a - m.a).norm() == 0.0);
    CHECK((r.b - m.b).norm() == 0.0);
}

TEST_CASE("reduce_fixed with zero coupling just absorbs the fixed columns") {
    Rng rng(31);
    ScenarioModel m = tiny_model(2, 2, 4);
    m.h0 = rng.cnormal_matrix(2, 2);
    m.a = rng.cnormal_matrix(2, 4);
    m.b = rng.cnormal_matrix(4, 2);
    m.alpha = cxd(0.7, 0.1);
    m.beta = cxd(-0.7, 0.0);
    const ScenarioModel r = reduce_fixed(m, {0, 1});
    CHECK((r.gamma - CMatrix::Zero(2, 2)).norm() == 0.0);
    CHECK((r.a - m.a.leftCols(2)).norm() == 0.0);
    CHECK((r.b - m.b.topRows(2)).norm() == 0.0);
    const CMatrix absorbed =
        m.h0 + m.alpha * m.a.rightCols(2) * m.b.bottomRows(2);
    CHECK((r.h0 - absorbed).norm() <= 1e-14 * (1.0 + absorbed.norm()));
}

TEST_CASE("reduced transfer equals the full model with fixed loads") {
    Rng rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        ScenarioModel m = random_scenario(2, 2, 6, 0.5, 300 + trial);
        const ScenarioModel red = reduce_fixed(m, {0, 1, 2});

        const ControlVector v3 = random_bits(3, rng);
        ControlVector v6 = ControlVector::zeros(6);
        for (int i = 0; i < 3; ++i) v6.bits[i] = v3.bits[i];

        const CMatrix full = transfer(m, encode(v6, m)).h;
        const CMatrix part = transfer(red, encode(v3, red)).h;
        CHECK((full - part).norm() <= 1e-12 * (1.0 + full.norm()));
    }
}

TEST_CASE("reduce_fixed rejects bad index sets") {
    ScenarioModel m = random_scenario(1, 1, 3, 0.2, 1);
    CHECK_THROWS_AS(reduce_fixed(m, {2, 1}), ValidationError);
    CHECK_THROWS_AS(reduce_fixed(m, {0, 3}), DimensionError);
    CHECK_THROWS_AS(reduce_fixed(m, {-1}), DimensionError);
}

TEST_CASE("reduce_fixed with no used elements is the all-fixed channel") {
    ScenarioModel m = random_scenario(2, 2, 3, 0.4, 23);
    const ScenarioModel r = reduce_fixed(m, {});
    CHECK(r.n_s == 0);
    const CMatrix full =
        transfer(m, encode(ControlVector::zeros(3), m)).h;
    const CMatrix absorbed = transfer(r, LoadVector{CVector(0)}).h;
    CHECK((full - absorbed).norm() <= 1e-12 * (1.0 + full.norm()));
}

TEST_CASE("frobenius_sq on pinned values") {
    TransferMatrix h;
    h.h = CMatrix::Identity(2, 2);
    CHECK(frobenius_sq(h) == doctest::Approx(2.0).epsilon(1e-15));
    h.h = CMatrix::Zero(3, 3);
    CHECK(frobenius_sq(h) == 0.0);
    h.h = CMatrix(1, 2);
    h.h << cxd(3.0, 0.0), cxd(4.0, 0.0);
    CHECK(frobenius_sq(h) == doctest::Approx(25.0).epsilon(1e-15));
}

TEST_CASE("fidelity basics") {
    Rng rng(41);
    TransferMatrix h;
    h.h = rng.cnormal_matrix(3, 3);
    CHECK(fidelity(h, h) == doctest::Approx(1.0).epsilon(1e-12));

    TransferMatrix e11, e22;
    e11.h = CMatrix::Zero(2, 2);
    e11.h(0, 0) = 1.0;
    e22.h = CMatrix::Zero(2, 2);
    e22.h(1, 1) = 1.0;
    CHECK(fidelity(e11, e22) == 0.0);

    TransferMatrix des;
    des.h = rng.cnormal_matrix(3, 3);
    TransferMatrix scaled;
    scaled.h = cxd(2.0, 3.0) * h.h;
    CHECK(std::abs(fidelity(scaled, des) - fidelity(h, des)) <= 1e-14);

    TransferMatrix zero;
    zero.h = CMatrix::Zero(2, 2);
    CHECK_THROWS_AS(fidelity(zero, des), ValidationError);
    CHECK_THROWS_AS(fidelity(h, TransferMatrix{CMatrix::Zero(3, 3)}),
                    ValidationError);
}

TEST_CASE("fidelity stays within [0, 1] on random pairs") {
    Rng rng(43);
    for (int t = 0; t < 50; ++t) {
        TransferMatrix a{rng.cnormal_matrix(2, 2)};
        TransferMatrix b{rng.cnormal_matrix(2, 2)};
        const double f = fidelity(a, b);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0 + 1e-12);
    }
}

TEST_CASE("transfer is invariant under the diagonal gauge") {
    Rng rng(47);
    for (int t = 0; t < 10; ++t) {
        ScenarioModel m = random_scenario(2, 2, 4, 0.5, 500 + t);
        CVector d(4);
        for (int i = 0; i < 4; ++i)
            d[i] = std::exp(cxd(0.5 * rng.normal(), rng.normal()));
        const ScenarioModel g = apply_gauge(m, d);
        const LoadVector r = encode(random_bits(4, rng), m);
        const CMatrix h1 = transfer(m, r).h;
        const CMatrix h2 = transfer(g, r).h;
        CHECK((h1 - h2).norm() <= 1e-11 * (1.0 + h1.norm()));
    }
}

TEST_CASE("single-bit difference is a rank-one channel change when gamma=0") {
    Rng rng(53);
    ScenarioModel m = tiny_model(2, 2, 4);
    m.h0 = rng.cnormal_matrix(2, 2);
    m.a = rng.cnormal_matrix(2, 4);
    m.b = rng.cnormal_matrix(4, 2);
    ControlVector v1 = random_bits(4, rng);
    ControlVector v2 = v1;
    v2.bits[2] ^= 1;
    const CMatrix diff =
        transfer(m, encode(v1, m)).h - transfer(m, encode(v2, m)).h;
    Eigen::JacobiSVD<CMatrix> svd(diff);
    CHECK(svd.singularValues()[1] <= 1e-12 * svd.singularValues()[0]);
}

}  // TEST_SUITE
