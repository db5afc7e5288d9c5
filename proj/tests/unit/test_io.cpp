#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "embounds/scenario_io.hpp"
#include "test_util.hpp"

using namespace embounds;
using testutil::random_scenario;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("embounds-io-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("scenario JSON round trip is bit exact") {
    const ScenarioModel m = random_scenario(2, 3, 4, 0.5, 12345);
    const ScenarioModel back = scenario_from_json_text(scenario_to_json_text(m));
    CHECK(back.n_t == m.n_t);
    CHECK(back.n_r == m.n_r);
    CHECK(back.n_s == m.n_s);
    CHECK((back.h0 - m.h0).norm() == 0.0);
    CHECK((back.a - m.a).norm() == 0.0);
    CHECK((back.gamma - m.gamma).norm() == 0.0);
    CHECK((back.b - m.b).norm() == 0.0);
    CHECK(back.alpha == m.alpha);
    CHECK(back.beta == m.beta);
    CHECK(back.passive == m.passive);
    CHECK(back.seed == m.seed);
    CHECK(back.tag == m.tag);
}

TEST_CASE("scenario file save and load") {
    TempDir tmp;
    const ScenarioModel m = random_scenario(1, 2, 3, 0.2, 9);
    save_scenario(m, tmp.file("s.json"));
    const ScenarioModel back = load_scenario(tmp.file("s.json"));
    CHECK((back.gamma - m.gamma).norm() == 0.0);
    CHECK(scenario_hash(back) == scenario_hash(m));
}

TEST_CASE("parser names the offending field") {
    const std::string good = scenario_to_json_text(random_scenario(1, 1, 2, 0.1, 3));
    CHECK_THROWS_AS(scenario_from_json_text("{"), ValidationError);
    CHECK_THROWS_AS(scenario_from_json_text("[1,2]"), ValidationError);

    std::string missing = good;
    const auto pos = missing.find("\"gamma\"");
    REQUIRE(pos != std::string::npos);
    missing.replace(pos, 7, "\"gumma\"");
    try {
        scenario_from_json_text(missing);
        CHECK(false);
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("gamma") != std::string::npos);
    }
}

TEST_CASE("spec JSON round trip") {
    ScenarioSpec sp;
    sp.n_t = 2;
    sp.n_r = 2;
    sp.n_s = 7;
    sp.coupling_strength = 0.35;
    sp.loss_factor = 0.92;
    sp.alpha = cxd(0.8, 0.1);
    sp.beta = cxd(-0.9, 0.0);
    sp.seed = 31337;
    sp.family = ScenarioFamily::free_space_like;
    const ScenarioSpec back = spec_from_json_text(spec_to_json_text(sp));
    CHECK(back.n_s == sp.n_s);
    CHECK(back.coupling_strength == sp.coupling_strength);
    CHECK(back.loss_factor == sp.loss_factor);
    CHECK(back.alpha == sp.alpha);
    CHECK(back.beta == sp.beta);
    CHECK(back.seed == sp.seed);
    CHECK(back.family == sp.family);
}

TEST_CASE("spec parser validates fields") {
    CHECK_THROWS_AS(
        spec_from_json_text(R"({"n_t":2,"n_r":2,"n_s":4,
            "coupling_strength":0.99,"loss_factor":0.9,
            "alpha":[1,0],"beta":[-1,0]})"),
        ValidationError);
    CHECK_THROWS_AS(
        spec_from_json_text(R"({"n_t":2,"n_r":2,
            "coupling_strength":0.1,"loss_factor":0.9,
            "alpha":[1,0],"beta":[-1,0]})"),
        ValidationError);
}

TEST_CASE("hash is stable and content sensitive") {
    const ScenarioModel m = random_scenario(2, 2, 3, 0.4, 55);
    const std::string h1 = scenario_hash(m);
    CHECK(h1 == scenario_hash(m));
    ScenarioModel other = m;
    other.h0(0, 0) += cxd(1e-9, 0.0);
    CHECK(scenario_hash(other) != h1);
}

TEST_CASE("generated file round trip preserves the matrices bitwise") {
    TempDir tmp;
    ScenarioSpec sp;
    sp.n_t = sp.n_r = 2;
    sp.n_s = 4;
    sp.coupling_strength = 0.0;
    sp.loss_factor = 0.9;
    sp.seed = 404;
    const ScenarioModel m = generate(sp);
    save_scenario(m, tmp.file("gen.json"));
    save_scenario(m, tmp.file("gen2.json"));

    std::ifstream f1(tmp.file("gen.json")), f2(tmp.file("gen2.json"));
    const std::string c1((std::istreambuf_iterator<char>(f1)), {});
    const std::string c2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(c1 == c2);

    const ScenarioModel back = load_scenario(tmp.file("gen.json"));
    CHECK((back.h0 - m.h0).norm() == 0.0);
    CHECK((back.a - m.a).norm() == 0.0);
    CHECK((back.gamma - m.gamma).norm() == 0.0);
    CHECK((back.b - m.b).norm() == 0.0);
}

}  // TEST_SUITE
