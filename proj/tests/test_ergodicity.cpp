#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ergolab/ergodicity.hpp"
#include "ergolab/symbolic.hpp"
#include "ergolab/systems.hpp"

using namespace ergolab;

namespace {

MapFamily doubling() { return build_expanding_family(torus_space(1), 1); }

PhaseSpace unit_triangle_space() {
    Simplex tri{2, {{0, 0}, {1, 0}, {0, 1}}};
    return simplex_complex_space({tri});
}

IterateOptions dithered(std::uint64_t seed) {
    IterateOptions opt;
    opt.dither = kDefaultDither;
    opt.dither_seed = seed;
    return opt;
}

}  // namespace

TEST_SUITE("ergodicity") {

TEST_CASE("bundled observables carry the exact integrals where known") {
    MapFamily fam = doubling();
    auto obs = bundled_observables(fam);
    REQUIRE(obs.size() == 4);
    CHECK(obs[0].name == "one");
    CHECK(*obs[0].integral == 1.0);
    CHECK(obs[1].name == "cos-x1");
    CHECK(*obs[1].integral == 0.0);
    CHECK(obs[2].name == "x1");
    CHECK(*obs[2].integral == 0.5);
    CHECK(obs[3].name == "region-0");
    CHECK(*obs[3].integral == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(obs[2].evaluate({0.3, 0}) == doctest::Approx(0.3));
    CHECK(obs[3].evaluate({0.25, 0}) == 1.0);
    CHECK(obs[3].evaluate({0.75, 0}) == 0.0);

    // no closed form for the coordinate observables on a complex
    MapFamily tri = build_expanding_family(unit_triangle_space(), 1);
    auto tobs = bundled_observables(tri);
    CHECK_FALSE(tobs[1].integral.has_value());
    CHECK_FALSE(tobs[2].integral.has_value());
    CHECK(*tobs[3].integral == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("birkhoff average of the constant observable is exactly one") {
    MapFamily fam = doubling();
    auto obs = bundled_observables(fam);
    BirkhoffResult r = birkhoff_average(fam, obs[0], {0.3, 0},
                                        iid_uniform_stream(2, 11), 1000, dithered(5));
    CHECK(r.average == 1.0);
    CHECK(r.steps == 1000);
    CHECK_FALSE(r.truncated);
}

TEST_CASE("birkhoff average of the coordinate approaches one half") {
    MapFamily fam = doubling();
    auto obs = bundled_observables(fam);
    BirkhoffResult r = birkhoff_average(fam, obs[2], {0.3, 0},
                                        iid_uniform_stream(2, 99), 200000, dithered(7));
    CHECK_FALSE(r.truncated);
    CHECK(r.average == doctest::Approx(0.5).epsilon(2e-2));
}

TEST_CASE("monte carlo integrals agree with closed forms") {
    Observable x1{"x1", [](Vec p) { return p.x; }, {}};
    auto [m, se] = lebesgue_integral_mc(torus_space(1), x1, 200000);
    CHECK(se < 2e-3);
    CHECK(std::abs(m - 0.5) < 4 * se);

    // centroid coordinate of the unit right triangle
    auto [mt, set] = lebesgue_integral_mc(unit_triangle_space(), x1, 200000);
    CHECK(std::abs(mt - 1.0 / 3.0) < 4 * set);

    Observable one{"one", [](Vec) { return 1.0; }, {}};
    auto [mo, seo] = lebesgue_integral_mc(torus_space(1), one, 1000);
    CHECK(mo == 1.0);
    CHECK(seo == 0.0);
}

TEST_CASE("box mesh counts, measures and index roundtrip") {
    PhaseSpace t1 = torus_space(1);
    PhaseSpace t2 = torus_space(2);
    PhaseSpace tri = unit_triangle_space();
    CHECK(box_count(t1, 16) == 16);
    CHECK(box_count(t2, 5) == 25);
    CHECK(box_count(tri, 4) == 16);

    for (const PhaseSpace* sp : {&t1, &t2, &tri}) {
        int b = sp->kind == SpaceKind::Torus2 ? 5 : 8;
        int cells = box_count(*sp, b);
        double total = 0.0;
        for (int i = 0; i < cells; ++i) {
            double mu = box_measure(*sp, b, i);
            CHECK(mu > 0.0);
            total += mu;
            CHECK(box_index(*sp, b, box_poly(*sp, b, i).centroid()) == i);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }

    CHECK(box_index(tri, 4, {0.9, 0.9}) == -1);
    CHECK_THROWS_AS(box_count(t1, 0), Error);
}

TEST_CASE("equidistribution holds for doubling and fails for the rotation") {
    MapFamily fam = doubling();
    EquidistributionReport rep = equidistribution_test(
        fam, {0.3, 0}, iid_uniform_stream(2, 3), 200000, 16, dithered(3));
    CHECK(rep.cells == 16);
    CHECK(rep.counted == 200000);
    CHECK_FALSE(rep.truncated);
    CHECK(rep.normalized < 1.5);
    CHECK(rep.pass);

    // the rational rotation pair visits only the four points x + k/4
    MapFamily rot = rotation_control_family();
    EquidistributionReport bad = equidistribution_test(
        rot, {0.3, 0}, iid_uniform_stream(2, 3), 20000, 16, {});
    CHECK_FALSE(bad.pass);
    CHECK(bad.normalized > 100.0);
}

TEST_CASE("equidistribution input guards") {
    MapFamily fam = doubling();
    CHECK_THROWS_AS(equidistribution_test(fam, {0.3, 0}, iid_uniform_stream(2, 3),
                                          20000, 1, {}),
                    Error);
    // horizon must dominate the cell count
    CHECK_THROWS_AS(equidistribution_test(fam, {0.3, 0}, iid_uniform_stream(2, 3),
                                          100, 16, {}),
                    Error);
}

TEST_CASE("ergodicity experiment passes for the doubling family") {
    MapFamily fam = doubling();
    ErgodicityReport rep =
        ergodicity_experiment(fam, bundled_observables(fam), 8, 50000,
                              StreamChoice::IidUniform, 2024, dithered(1));
    CHECK(rep.pass);
    CHECK(rep.truncated_orbits == 0);
    CHECK(rep.stream == "iid-uniform");
    CHECK(rep.tol == doctest::Approx(std::max(1e-2, 6.0 / std::sqrt(50000.0))));
    REQUIRE(rep.findings.size() == 4);
    for (const ObservableFinding& f : rep.findings) {
        CHECK(f.pass);
        CHECK(f.integral_exact);
        CHECK(f.averages.size() == 8);
    }
    // the constant observable has zero spread, exactly
    CHECK(rep.findings[0].mean == 1.0);
    CHECK(rep.findings[0].cross_std == 0.0);
}

TEST_CASE("ergodicity experiment also passes with itinerary symbols") {
    MapFamily fam = doubling();
    ErgodicityReport rep =
        ergodicity_experiment(fam, bundled_observables(fam), 6, 50000,
                              StreamChoice::ItineraryDriven, 77, dithered(2));
    CHECK(rep.pass);
    CHECK(rep.stream == "itinerary");
}

TEST_CASE("invariant arcs break the cross-start consistency") {
    MapFamily control = invariant_arcs_control_family();
    ErgodicityReport rep =
        ergodicity_experiment(control, bundled_observables(control), 10, 20000,
                              StreamChoice::IidUniform, 5, dithered(4));
    CHECK_FALSE(rep.pass);
    // starts trapped in different arcs disagree about the coordinate
    const ObservableFinding& x1 = rep.findings[2];
    CHECK(x1.name == "x1");
    CHECK_FALSE(x1.pass);
    CHECK(x1.cross_std > 0.1);
}

TEST_CASE("rotations fail through the start-dependent coordinate average") {
    MapFamily rot = rotation_control_family();
    ErgodicityReport rep = ergodicity_experiment(rot, bundled_observables(rot), 8,
                                                 20000, StreamChoice::IidUniform, 9);
    CHECK_FALSE(rep.pass);
    CHECK(rep.findings[2].name == "x1");
    CHECK_FALSE(rep.findings[2].pass);
    // the walk on the quarter grid still equidistributes over its four points
    CHECK(rep.findings[1].pass);
}

TEST_CASE("binary collapse is counted when the dither is off") {
    MapFamily fam = doubling();
    ErgodicityReport bare = ergodicity_experiment(fam, bundled_observables(fam), 6,
                                                  5000, StreamChoice::IidUniform, 2024);
    CHECK(bare.truncated_orbits == 6);
    ErgodicityReport smooth =
        ergodicity_experiment(fam, bundled_observables(fam), 6, 5000,
                              StreamChoice::IidUniform, 2024, dithered(8));
    CHECK(smooth.truncated_orbits == 0);
}

TEST_CASE("invariant set probe sees only the full space for doubling") {
    InvariantProbeReport rep = invariant_set_probe(doubling(), 64, 4096);
    CHECK(rep.cell_count == 64);
    CHECK(rep.fixpoint);
    CHECK(rep.ergodic_evidence);
    REQUIRE(rep.spectrum.size() == 1);
    CHECK(rep.spectrum[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.min_measure == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.minimal_set_cells.size() == 64);
    CHECK(cells_forward_invariant(doubling(), 64, rep.minimal_set_cells));
}

TEST_CASE("invariant set probe pins the trapped arc of the control") {
    MapFamily control = invariant_arcs_control_family();
    InvariantProbeReport rep = invariant_set_probe(control, 64, 4096);
    CHECK_FALSE(rep.ergodic_evidence);
    CHECK(rep.min_measure == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.minimal_set_cells.size() == 32);
    CHECK(cells_forward_invariant(control, 64, rep.minimal_set_cells));

    // the left half-circle is not forward invariant under doubling
    std::vector<int> left_half;
    for (int i = 0; i < 32; ++i) left_half.push_back(i);
    CHECK_FALSE(cells_forward_invariant(doubling(), 64, left_half));
}

TEST_CASE("probe with zero rounds reports the seed spectrum") {
    InvariantProbeReport rep = invariant_set_probe(doubling(), 64, 0);
    CHECK(rep.note == "seeds");
    REQUIRE(rep.spectrum.size() == 1);
    CHECK(rep.spectrum[0] == doctest::Approx(1.0 / 64.0).epsilon(1e-12));
}

TEST_CASE("probe accepts the triangle family") {
    Simplex tri{2, {{0, 0}, {1, 0}, {0, 1}}};
    MapFamily q1 = build_mostly_expanding_family(simplex_complex_space({tri}), 0.5);
    InvariantProbeReport rep = invariant_set_probe(q1, 16, 4096);
    CHECK(rep.cell_count == 256);
    CHECK(rep.ergodic_evidence);
    CHECK(rep.min_measure > 0.9);
    CHECK_THROWS_AS(invariant_set_probe(q1, 8, 4096), Error);
}

}  // TEST_SUITE
