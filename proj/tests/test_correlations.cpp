#include <catch2/catch_amalgamated.hpp>

#include "bellbox/bellbox.hpp"
#include "test_helpers.hpp"

using namespace bellbox;
using test_helpers::box_max_diff;
using test_helpers::random_mixture_box;

namespace {

Block correlated() { return {0.5, 0.0, 0.0, 0.5}; }
Block anticorrelated() { return {0.0, 0.5, 0.5, 0.0}; }

// Uniform-marginal box with E(XX) = E(XZ) = E(ZX) = 1, E(ZZ) = -1 and
// c_YY = 1; reaches CHSH 4 while keeping all four joint-measurement
// outcomes nonnegative.
JointBox pr_type_witness() {
    JointBox box = JointBox::uniform();
    box.block(Setting::X, Setting::X) = correlated();
    box.block(Setting::X, Setting::Z) = correlated();
    box.block(Setting::Z, Setting::X) = correlated();
    box.block(Setting::Z, Setting::Z) = anticorrelated();
    box.block(Setting::Y, Setting::Y) = correlated();
    return box;
}

JointBox all_parities_even() {
    JointBox box = JointBox::uniform();
    for (Setting w : kSettings) box.block(w, w) = correlated();
    return box;
}

}  // namespace

TEST_CASE("chsh_value basics", "[correlations]") {
    ChshSpec spec{Setting::X, Setting::Z, Setting::X, Setting::Z};

    JointBox perfect = JointBox::uniform();
    for (std::size_t i = 0; i < 9; ++i) perfect.block(i) = correlated();
    CHECK(chsh_value(perfect, spec) == Catch::Approx(2.0).margin(1e-12));

    CHECK(chsh_value(pr_type_witness(), spec) == Catch::Approx(4.0).margin(1e-12));

    CHECK_THROWS_AS(chsh_value(perfect, ChshSpec{Setting::X, Setting::X, Setting::X, Setting::Z}),
                    std::invalid_argument);
    CHECK(all_chsh_specs().size() == 36);
}

TEST_CASE("quantum boxes reach the operator bound", "[correlations]") {
    ChshSpec spec{Setting::X, Setting::Z, Setting::X, Setting::Z};
    quantum::ChshOperatorMax best = quantum::chsh_operator_max(spec);
    CHECK(best.value == Catch::Approx(2.0 * std::sqrt(2.0)).margin(1e-12));
    JointBox box = quantum::box_from_state(best.state);
    CHECK(chsh_value(box, spec) == Catch::Approx(2.0 * std::sqrt(2.0)).margin(1e-9));
}

TEST_CASE("membership levels on the reference boxes", "[correlations]") {
    CHECK(membership(JointBox::uniform(), 1).pass);
    CHECK(membership(JointBox::uniform(), 2).pass);
    CHECK(membership(JointBox::uniform(), 3).pass);

    MembershipReport even2 = membership(all_parities_even(), 2);
    CHECK_FALSE(even2.pass);
    REQUIRE(even2.bell.has_value());
    CHECK(even2.bell->p4 == Catch::Approx(-0.5).margin(1e-12));
    CHECK(membership(all_parities_even(), 1).pass);

    MembershipReport witness2 = membership(pr_type_witness(), 2);
    CHECK(witness2.pass);
    MembershipReport witness3 = membership(pr_type_witness(), 3);
    CHECK_FALSE(witness3.pass);
    bool steering_violation = false;
    for (const auto& v : witness3.violations)
        if (v.constraint.find("steered") != std::string::npos) steering_violation = true;
    CHECK(steering_violation);
}

TEST_CASE("steered moments of the witness leave the unit ball", "[correlations]") {
    auto m = steered_moments_a(pr_type_witness(), Setting::X, true);
    REQUIRE(m.has_value());
    CHECK(m->x == Catch::Approx(1.0).margin(1e-12));
    CHECK(m->y == Catch::Approx(0.0).margin(1e-12));
    CHECK(m->z == Catch::Approx(1.0).margin(1e-12));
    CHECK(m->norm2() == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("membership levels are nested", "[correlations]") {
    Rng rng(307);
    int pass3 = 0;
    for (int i = 0; i < 10000; ++i) {
        JointBox box = random_mixture_box(rng, 3);
        bool l1 = membership(box, 1).pass;
        bool l2 = membership(box, 2).pass;
        bool l3 = membership(box, 3).pass;
        if (l3) {
            ++pass3;
            CHECK(l2);
        }
        if (l2) CHECK(l1);
    }
    CHECK(pass3 > 0);  // mixtures of products do hit level 3
}

TEST_CASE("level 3 is invariant under joint outcome relabeling", "[correlations]") {
    // Flip the outcome labels of one setting on both sides at once; the
    // ball is symmetric under the induced moment sign flips.
    auto relabel = [](const JointBox& box, Setting w) {
        JointBox out = box;
        for (Setting o : kSettings) {
            Block b = out.block(w, o);
            out.block(w, o) = {b.mp, b.mm, b.pp, b.pm};  // flip A outcome of setting w
        }
        for (Setting o : kSettings) {
            Block b = out.block(o, w);
            out.block(o, w) = {b.pm, b.pp, b.mm, b.mp};  // flip B outcome of setting w
        }
        return out;
    };
    Rng rng(311);
    for (int i = 0; i < 300; ++i) {
        JointBox box = random_mixture_box(rng, 3);
        for (Setting w : kSettings) {
            JointBox flipped = relabel(box, w);
            CHECK(membership(box, 3).pass == membership(flipped, 3).pass);
        }
    }
}

TEST_CASE("zero-probability outcomes impose no steering constraint", "[correlations]") {
    // Deterministic X outcome: conditioning on the impossible "-" result
    // is skipped, and the boundary state (1,0,0) stays inside the ball.
    JointBox box = product_box({1.0, 0.5, 0.5}, {1.0, 0.5, 0.5});
    CHECK_FALSE(steered_moments_a(box, Setting::X, false).has_value());
    CHECK(membership(box, 3).pass);
}

TEST_CASE("membership rejects nonmax at level 3 and bad levels", "[correlations]") {
    CHECK_THROWS_AS(membership(JointBox::uniform(), 3, MeasurementFamily::nonmax(0.2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(membership(JointBox::uniform(), 0), std::invalid_argument);
    CHECK_THROWS_AS(membership(JointBox::uniform(), 4), std::invalid_argument);
    CHECK(membership(JointBox::uniform(), 2, MeasurementFamily::nonmax(0.2)).pass);
    CHECK(membership(JointBox::uniform(), 3, MeasurementFamily::noisy(0.25)).pass);
}

TEST_CASE("LP reaches the no-signaling maximum at level 1", "[correlations]") {
    for (const ChshSpec& spec :
         {ChshSpec{Setting::X, Setting::Z, Setting::X, Setting::Z},
          ChshSpec{Setting::X, Setting::Y, Setting::X, Setting::Y},
          ChshSpec{Setting::Y, Setting::Z, Setting::Z, Setting::Y}}) {
        LpOptimum opt = lp_max_chsh(spec, 1);
        CHECK(opt.value == Catch::Approx(4.0).margin(1e-9));
        JointBox box = expand(opt.witness);
        CHECK(membership(box, 1).pass);
        CHECK(chsh_value(box, spec) == Catch::Approx(4.0).margin(1e-9));
    }
}

TEST_CASE("LP still reaches 4 at level 2 and the witness fails steering", "[correlations]") {
    ChshSpec spec{Setting::X, Setting::Z, Setting::X, Setting::Z};
    LpOptimum opt = lp_max_chsh(spec, 2);
    CHECK(opt.value == Catch::Approx(4.0).margin(1e-9));

    JointBox box = expand(opt.witness);
    CHECK(membership(box, 2, MeasurementFamily::ideal(), 1e-9).pass);
    CHECK_FALSE(membership(box, 3, MeasurementFamily::ideal(), 1e-9).pass);
    CHECK(chsh_value(box, spec) == Catch::Approx(4.0).margin(1e-9));

    // The joint-measurement positivity pins the YY parity to 1, which
    // forces the first two outcome probabilities to 0.
    double cyy = box.block(Setting::Y, Setting::Y).pp + box.block(Setting::Y, Setting::Y).mm;
    CHECK(cyy == Catch::Approx(1.0).margin(1e-9));
    BellProbabilities p = bell_probs(box);
    CHECK(p.p1 == Catch::Approx(0.0).margin(1e-9));
    CHECK(p.p2 == Catch::Approx(0.0).margin(1e-9));

    // Hand-built feasible point: the LP value upper-bounds it.
    CHECK(opt.value >= chsh_value(pr_type_witness(), spec) - 1e-9);
}

TEST_CASE("LP maximum of the fourth outcome is one", "[correlations]") {
    LpOptimum opt = lp_maximize(p4_objective(), 2);
    CHECK(opt.value == Catch::Approx(1.0).margin(1e-9));
    JointBox box = expand(opt.witness);
    CHECK(membership(box, 2).pass);
    CHECK(bell_probs(box).p4 == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("chsh objective evaluates boxes consistently", "[correlations]") {
    Rng rng(313);
    for (const ChshSpec& spec : all_chsh_specs()) {
        JointBox box = random_mixture_box(rng, 3);
        CompactState s = compact_from_box(box);
        LinearObjective obj = chsh_objective(spec);
        double lin = obj.constant;
        std::vector<double> x = lp_vars_from_compact(s);
        for (std::size_t j = 0; j < 15; ++j) lin += obj.coeffs[j] * x[j];
        CHECK(lin == Catch::Approx(chsh_value(box, spec)).margin(1e-12));
    }
}

TEST_CASE("level-3 sampler emits only members and is reproducible", "[correlations]") {
    SamplerResult run1 = sample_level3(MeasurementFamily::ideal(), 300, 5);
    REQUIRE(run1.boxes.size() == 300);
    for (std::size_t i = 0; i < run1.boxes.size(); i += 23) {
        CHECK(membership(expand(run1.boxes[i]), 3).pass);
    }

    SamplerResult run2 = sample_level3(MeasurementFamily::ideal(), 300, 5);
    REQUIRE(run2.boxes.size() == run1.boxes.size());
    double dev = 0.0;
    for (std::size_t i = 0; i < run1.boxes.size(); ++i)
        dev = std::max(dev, box_max_diff(expand(run1.boxes[i]), expand(run2.boxes[i])));
    CHECK(dev == 0.0);

    CHECK_FALSE(run1.low_acceptance_warning);
    CHECK(run1.acceptance_rate > 1e-3);

    SamplerResult split = sample_level3(MeasurementFamily::ideal(), 100, 5, /*workers=*/2);
    CHECK(split.boxes.size() == 100);

    CHECK_THROWS_AS(sample_level3(MeasurementFamily::noisy(0.2), 10, 0), std::invalid_argument);
}

TEST_CASE("sampled boxes respect the quantum correlation bound", "[correlations]") {
    SamplerResult run = sample_level3(MeasurementFamily::ideal(), 500, 11);
    const std::vector<ChshSpec> specs = all_chsh_specs();
    double worst = -10.0;
    for (const CompactState& s : run.boxes) {
        JointBox box = expand(s);
        for (const ChshSpec& spec : specs) worst = std::max(worst, chsh_value(box, spec));
    }
    CHECK(worst <= 2.0 * std::sqrt(2.0) + 1e-6);

    double per_coord = 0.0;
    std::array<double, 15> mean{};
    for (const CompactState& s : run.boxes) {
        std::array<double, 15> v = s.to_array15();
        for (std::size_t j = 0; j < 15; ++j) mean[j] += v[j];
    }
    CompactState uniform = compact_from_box(JointBox::uniform());
    std::array<double, 15> u = uniform.to_array15();
    for (std::size_t j = 0; j < 15; ++j)
        per_coord = std::max(per_coord, std::abs(mean[j] / double(run.boxes.size()) - u[j]));
    INFO("max |mean - uniform| per coordinate: " << per_coord);
    CHECK_NOFAIL(per_coord < 0.05);  // diagnostic: the level-3 set is centred on the uniform box
}
