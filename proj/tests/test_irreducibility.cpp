#include <doctest.h>

#include <cmath>

#include "ergolab/irreducibility.hpp"
#include "ergolab/systems.hpp"

using namespace ergolab;

namespace {

MapFamily doubling() { return build_expanding_family(torus_space(1), 1); }

Region interval_region(double lo, double hi) {
    Region r;
    r.polys.push_back(make_interval(lo, hi));
    return r;
}

// the two inverse branches of doubling, x/2 and x/2 + 1/2, as a family of
// genuine contractions
MapFamily inverse_doubling_family() {
    PhaseSpace space = torus_space(1);
    Polytope full = make_interval(0.0, 1.0);
    MapFamily fam;
    fam.partition.space = space;
    Region r0, r1;
    r0.polys.push_back(make_interval(0.0, 0.5));
    r1.polys.push_back(make_interval(0.5, 1.0));
    fam.partition.regions = {r0, r1};
    SmoothMap g;
    g.name = "half";
    g.dim = 1;
    g.mod1 = true;
    g.pieces = {{full, Affine{Mat{0.5, 0, 0, 1}, Vec{0.0, 0.0}}}};
    g.chart_region = 0;
    fam.maps = {g, g};
    fam.maps[1].pieces[0].map.t = Vec{0.5, 0.0};
    fam.maps[1].chart_region = 1;
    fam.p = 2;
    fam.q = 0;
    fam.validate();
    return fam;
}

}  // namespace

TEST_SUITE("irreducibility") {

TEST_CASE("orbit trees deduplicate the equal doubling generators") {
    MapFamily fam = doubling();
    Vec x{0.3, 0};
    // both generators share the doubling formula, so the forward tree is a
    // path: 0.3, 0.6, 0.2, 0.4, 0.8, and then 0.6 recurs (dedup closes the
    // cycle), so depth 4 and depth 5 give the same five nodes
    OrbitTree fwd = orbit_tree(fam, x, Direction::Forward, 4);
    CHECK(fwd.nodes.size() == 5);
    CHECK_FALSE(fwd.truncated);
    CHECK(fwd.nodes[0].point.x == doctest::Approx(0.3));
    CHECK(orbit_tree(fam, x, Direction::Forward, 5).nodes.size() == 5);

    // backward: two preimages per level, 2^{d+1}-1 nodes in total
    OrbitTree bwd = orbit_tree(fam, x, Direction::Backward, 5);
    CHECK(bwd.nodes.size() == 63);
    for (const OrbitNode& node : bwd.nodes) {
        // replaying the recorded word forward (last pulled symbol first)
        // returns to x
        Vec p = node.point;
        for (auto it = node.word.rbegin(); it != node.word.rend(); ++it)
            p = fam.space().wrap(fam.maps[static_cast<std::size_t>(*it)].eval(p));
        CHECK(fam.space().distance(p, x) < 1e-9);
    }
}

TEST_CASE("orbit trees respect the node budget") {
    MapFamily fam = doubling();
    OrbitTree t = orbit_tree(fam, {0.3, 0}, Direction::Backward, 12, 100);
    CHECK(t.truncated);
    // the budget check runs per symbol, so the last symbol may push its full
    // preimage set before the cutoff lands
    CHECK(t.nodes.size() <= 102);
}

TEST_CASE("backward trees become eps dense at dyadic resolution") {
    MapFamily fam = doubling();
    for (int depth : {8, 10, 12}) {
        OrbitTree t = orbit_tree(fam, {0.3, 0}, Direction::Backward, depth);
        double eps = std::pow(2.0, -depth + 1);
        CHECK(eps_density(fam.space(), t, eps, 2000, 7) == 1.0);
    }
    // far below the leaf spacing the tree cannot cover
    OrbitTree shallow = orbit_tree(fam, {0.3, 0}, Direction::Backward, 4);
    CHECK(eps_density(fam.space(), shallow, 0.001, 2000, 7) < 0.5);
}

TEST_CASE("weak cycle holds for doubling and fails for the invariant arcs") {
    MapFamily fam = doubling();
    WeakCycleReport good = weak_cycle_test(fam, interval_region(0.45, 0.55), 300, 10, 3);
    CHECK(good.hit_fraction == 1.0);
    CHECK_FALSE(good.flagged);
    CHECK(!good.certificates.empty());

    MapFamily control = invariant_arcs_control_family();
    WeakCycleReport bad =
        weak_cycle_test(control, interval_region(0.05, 0.15), 400, 10, 3);
    CHECK(bad.flagged);
    CHECK(bad.hit_fraction < 0.6);
    CHECK(bad.hit_fraction > 0.3);  // the left arc still reaches B
}

TEST_CASE("weak cycle hit fraction is monotone in depth") {
    MapFamily fam = doubling();
    Region b = interval_region(0.31, 0.33);  // measure 0.02: needs depth
    double prev = -1.0;
    for (int depth : {2, 5, 8, 11}) {
        WeakCycleReport rep = weak_cycle_test(fam, b, 250, depth, 19);
        CHECK(rep.hit_fraction >= prev);
        prev = rep.hit_fraction;
    }
    CHECK(prev == 1.0);
}

TEST_CASE("weak cycle certificates are replayable words") {
    MapFamily fam = doubling();
    Region b = interval_region(0.45, 0.55);
    WeakCycleReport rep = weak_cycle_test(fam, b, 100, 10, 3);
    for (const Word& w : rep.certificates) CHECK(w.length() <= 10);
}

TEST_CASE("empty target region is refused") {
    MapFamily fam = doubling();
    Region empty;
    CHECK_THROWS_AS(weak_cycle_test(fam, empty, 10, 4, 1), Error);
}

TEST_CASE("contractivity probe detects the contracting inverse branches") {
    // the probe searches words of the given family, so contractivity of the
    // doubling action shows up on its family of inverse branches
    ContractivityReport rep = contractivity_probe(inverse_doubling_family(), {0.3, 0}, 10);
    CHECK(rep.contractive_evidence);
    CHECK(rep.rate == doctest::Approx(0.5).epsilon(1e-9));
    REQUIRE(rep.rows.size() >= 2);
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        CHECK(rep.rows[i].best_diameter <= rep.rows[i - 1].best_diameter + 1e-12);

    // isometries leave the cloud diameter alone
    ContractivityReport flat = contractivity_probe(rotation_control_family(), {0.3, 0}, 10);
    CHECK_FALSE(flat.contractive_evidence);
    CHECK(flat.rate == doctest::Approx(1.0).epsilon(1e-9));

    // the expanding generators themselves only ever grow the cloud
    ContractivityReport fwd = contractivity_probe(doubling(), {0.3, 0}, 6);
    CHECK_FALSE(fwd.contractive_evidence);
    CHECK(fwd.rate > 1.0);
}

TEST_CASE("transitivity matrix is full for the bundled expanding families") {
    TransitivityMatrix m = transitivity_matrix(doubling(), 4);
    CHECK(m.all_true);
    CHECK(m.k == 2);

    Simplex tri{2, {{0, 0}, {1, 0}, {0, 1}}};
    MapFamily q1 = build_mostly_expanding_family(simplex_complex_space({tri}), 0.5);
    TransitivityMatrix mq = transitivity_matrix(q1, 5);
    CHECK(mq.all_true);
}

TEST_CASE("transitivity matrix splits for the invariant arc control") {
    TransitivityMatrix m = transitivity_matrix(invariant_arcs_control_family(), 6);
    CHECK_FALSE(m.all_true);
    // regions 0,1 form the left arc, 2,3 the right; no crossing either way
    CHECK(m.at(0, 1));
    CHECK(m.at(1, 0));
    CHECK(m.at(2, 3));
    CHECK_FALSE(m.at(0, 2));
    CHECK_FALSE(m.at(3, 1));
}

}
