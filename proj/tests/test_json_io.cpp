#include <catch2/catch_amalgamated.hpp>

#include "bellbox/bellbox.hpp"
#include "test_helpers.hpp"

using namespace bellbox;
using test_helpers::box_max_diff;
using test_helpers::random_mixture_box;

TEST_CASE("box json round trip is exact", "[json]") {
    Rng rng(501);
    for (int i = 0; i < 50; ++i) {
        JointBox box = random_mixture_box(rng);
        JointBox back = box_from_json(box_to_json(box));
        CHECK(box_max_diff(box, back) == 0.0);
    }
}

TEST_CASE("compact array order is diag, off-diagonal row-major, marginals", "[json]") {
    JointBox box = product_box({0.9, 0.8, 0.7}, {0.6, 0.5, 0.4});
    nlohmann::json j = box_to_json(box);
    const auto& c = j.at("compact");
    REQUIRE(c.size() == 15);
    CHECK(c[0].get<double>() == Catch::Approx(0.9 * 0.6).margin(1e-15));  // q_XX
    CHECK(c[1].get<double>() == Catch::Approx(0.8 * 0.5).margin(1e-15));  // q_YY
    CHECK(c[2].get<double>() == Catch::Approx(0.7 * 0.4).margin(1e-15));  // q_ZZ
    CHECK(c[3].get<double>() == Catch::Approx(0.9 * 0.5).margin(1e-15));  // q_XY
    CHECK(c[4].get<double>() == Catch::Approx(0.9 * 0.4).margin(1e-15));  // q_XZ
    CHECK(c[5].get<double>() == Catch::Approx(0.8 * 0.6).margin(1e-15));  // q_YX
    CHECK(c[6].get<double>() == Catch::Approx(0.8 * 0.4).margin(1e-15));  // q_YZ
    CHECK(c[7].get<double>() == Catch::Approx(0.7 * 0.6).margin(1e-15));  // q_ZX
    CHECK(c[8].get<double>() == Catch::Approx(0.7 * 0.5).margin(1e-15));  // q_ZY
    CHECK(c[9].get<double>() == Catch::Approx(0.9).margin(1e-15));        // marg_a X
    CHECK(c[12].get<double>() == Catch::Approx(0.6).margin(1e-15));       // marg_b X
}

TEST_CASE("compact-only documents expand to the table", "[json]") {
    Rng rng(503);
    JointBox box = random_mixture_box(rng);
    nlohmann::json full = box_to_json(box);
    nlohmann::json compact_only = {{"compact", full.at("compact")}};
    JointBox back = box_from_json(compact_only);
    CHECK(box_max_diff(box, back) < 1e-15);

    nlohmann::json blocks_only = {{"blocks", full.at("blocks")}};
    CHECK(box_max_diff(box, box_from_json(blocks_only)) == 0.0);
}

TEST_CASE("disagreeing blocks and compact data are rejected", "[json]") {
    nlohmann::json j = box_to_json(JointBox::uniform());
    j["compact"][0] = 0.3;  // q_XX now inconsistent with the uniform blocks
    CHECK_THROWS_AS(box_from_json(j), BoxFormatError);
    // Within tolerance it is accepted.
    nlohmann::json j2 = box_to_json(JointBox::uniform());
    j2["compact"][0] = 0.25 + 1e-12;
    CHECK_NOTHROW(box_from_json(j2));
}

TEST_CASE("schema violations are rejected", "[json]") {
    CHECK_THROWS_AS(box_from_json(nlohmann::json::array()), BoxFormatError);
    CHECK_THROWS_AS(box_from_json(nlohmann::json::object()), BoxFormatError);

    nlohmann::json j = box_to_json(JointBox::uniform());
    j["blocks"].erase("YZ");
    CHECK_THROWS_AS(box_from_json(j), BoxFormatError);

    nlohmann::json short_compact = {{"compact", {0.1, 0.2}}};
    CHECK_THROWS_AS(box_from_json(short_compact), BoxFormatError);

    nlohmann::json bad_entry = box_to_json(JointBox::uniform());
    bad_entry["blocks"]["XX"].erase("pm");
    CHECK_THROWS_AS(box_from_json(bad_entry), BoxFormatError);
}

TEST_CASE("box files survive a save/load cycle", "[json]") {
    Rng rng(509);
    JointBox box = random_mixture_box(rng);
    const std::string path = "test_box_roundtrip.json";
    save_box_file(path, box);
    JointBox back = load_box_file(path);
    CHECK(box_max_diff(box, back) == 0.0);
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_box_file("does_not_exist_box.json"), BoxFormatError);
}
