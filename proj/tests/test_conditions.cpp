#include <doctest.h>

#include <cmath>

#include "ergolab/conditions.hpp"
#include "ergolab/systems.hpp"

#ifdef ERGOLAB_HAVE_EIGEN
#include <Eigen/SVD>
#endif

using namespace ergolab;

namespace {

// Small handmade family on the circle: one map x -> x + 0.3 over the halves
// partition. Its images straddle region boundaries, which is exactly what
// the Markov check must flag.
MapFamily shifted_family() {
    PhaseSpace space = torus_space(1);
    Polytope full = make_interval(0.0, 1.0);
    MapFamily fam;
    fam.partition.space = space;
    Region r0, r1;
    r0.polys.push_back(make_interval(0.0, 0.5));
    r1.polys.push_back(make_interval(0.5, 1.0));
    fam.partition.regions = {r0, r1};
    SmoothMap f;
    f.name = "shift";
    f.dim = 1;
    f.mod1 = true;
    f.pieces = {{full, Affine{Mat{1, 0, 0, 1}, Vec{0.3, 0.0}}}};
    f.chart_region = 0;
    fam.maps = {f, f};
    fam.maps[1].chart_region = 1;
    fam.p = 2;
    fam.q = 0;
    fam.validate();
    return fam;
}

}  // namespace

TEST_SUITE("conditions") {

TEST_CASE("topological partition accepted for the bundled families") {
    for (const MapFamily& fam :
         {build_expanding_family(torus_space(1), 1), invariant_arcs_control_family(),
          torus2_doubling_family()}) {
        PartitionReport rep = validate_topological_partition(fam.partition);
        CHECK(rep.open_ok);
        CHECK(rep.disjoint_ok);
        CHECK(rep.covers_ok);
        CHECK(rep.pass());
        CHECK(rep.measure_total == doctest::Approx(1.0));
    }
    Simplex tri{2, {{0, 0}, {1, 0}, {0, 1}}};
    MapFamily fam = build_mostly_expanding_family(simplex_complex_space({tri}), 0.5);
    CHECK(validate_topological_partition(fam.partition).pass());
}

TEST_CASE("overlapping regions are rejected with a witness") {
    Partition part;
    part.space = torus_space(1);
    Region r0, r1;
    r0.polys.push_back(make_interval(0.0, 0.6));
    r1.polys.push_back(make_interval(0.5, 1.0));
    part.regions = {r0, r1};
    PartitionReport rep = validate_topological_partition(part);
    CHECK_FALSE(rep.disjoint_ok);
    REQUIRE(rep.disjoint_witness.has_value());
    CHECK(r0.contains(*rep.disjoint_witness, 0));
    CHECK(r1.contains(*rep.disjoint_witness, 0));
    CHECK_FALSE(rep.pass());
}

TEST_CASE("a gap in the closures is detected") {
    Partition part;
    part.space = torus_space(1);
    Region r0, r1;
    r0.polys.push_back(make_interval(0.0, 0.4));
    r1.polys.push_back(make_interval(0.5, 1.0));
    part.regions = {r0, r1};
    PartitionReport rep = validate_topological_partition(part);
    CHECK_FALSE(rep.covers_ok);
    CHECK(rep.cover_witness.has_value());
    CHECK(rep.measure_total < 0.95);
}

TEST_CASE("markov holds exactly for the bundled expanding families") {
    MapFamily fam = build_expanding_family(torus_space(1), 1);
    MarkovReport rep = check_markov(fam.partition, fam);
    CHECK(rep.exact);
    CHECK(rep.pass);
    for (int i = 0; i < rep.k; ++i)
        for (int j = 0; j < rep.k; ++j) CHECK(rep.at(i, j) == MarkovStatus::Contains);

    Simplex tri{2, {{0, 0}, {1, 0}, {0, 1}}};
    MarkovReport tri_rep =
        check_markov(build_expanding_family(simplex_complex_space({tri}), 1).partition,
                     build_expanding_family(simplex_complex_space({tri}), 1));
    CHECK(tri_rep.exact);
    CHECK(tri_rep.pass);
}

TEST_CASE("markov flags straddling images") {
    MapFamily fam = shifted_family();
    MarkovReport rep = check_markov(fam.partition, fam);
    CHECK_FALSE(rep.pass);
    CHECK(!rep.violations.empty());
    CHECK(rep.at(rep.violations[0].first, rep.violations[0].second) ==
          MarkovStatus::Violation);
}

TEST_CASE("markov mixes disjoint and containing images for the control") {
    MapFamily fam = invariant_arcs_control_family();
    MarkovReport rep = check_markov(fam.partition, fam);
    CHECK(rep.pass);
    // map 0 sends (0,1/4) onto (0,1/2): covers regions 0,1, misses 2,3
    CHECK(rep.at(0, 0) == MarkovStatus::Contains);
    CHECK(rep.at(0, 1) == MarkovStatus::Contains);
    CHECK(rep.at(0, 2) == MarkovStatus::Disjoint);
    CHECK(rep.at(0, 3) == MarkovStatus::Disjoint);
}

TEST_CASE("nfold intersection on the doubling family") {
    MapFamily fam = build_expanding_family(torus_space(1), 1);
    Word w{{0, 1, 0}, 2};
    NfoldReport rep = check_nfold_intersection(fam.partition, fam, w);
    CHECK(rep.holds);
    CHECK_FALSE(rep.vacuous);
    CHECK(rep.cylinder_nonempty);
    CHECK_THROWS_AS(check_nfold_intersection(fam.partition, fam, Word{{0, 1}, 2}), Error);
}

TEST_CASE("nfold intersection is vacuous over an empty link") {
    MapFamily fam = invariant_arcs_control_family();
    // f_0 image (0,1/2) misses region 2 = (1/2,3/4)
    Word w{{0, 2, 0}, 4};
    NfoldReport rep = check_nfold_intersection(fam.partition, fam, w);
    CHECK(rep.vacuous);
    CHECK(rep.holds);
    REQUIRE(rep.empty_link.has_value());
    CHECK(rep.empty_link->first == 0);
}

TEST_CASE("sigma estimates are exact for affine families") {
    SigmaReport s = estimate_sigmas(build_expanding_family(torus_space(1), 1));
    CHECK(s.sigma1 == 2.0);
    CHECK(s.sigma2 == 1.0);
    CHECK(s.exact);
    CHECK_FALSE(s.not_expanding);

    SigmaReport rot = estimate_sigmas(rotation_control_family());
    CHECK(rot.sigma1 == doctest::Approx(1.0));
    CHECK(rot.not_expanding);
}

TEST_CASE("sigma estimates for the mostly expanding triangle family") {
    Simplex tri{2, {{0, 0}, {1, 0}, {0, 1}}};
    MapFamily fam = build_mostly_expanding_family(simplex_complex_space({tri}), 0.5);
    SigmaReport s = estimate_sigmas(fam);
    CHECK(s.sigma1 == doctest::Approx(1.3694832979642).epsilon(1e-10));
    CHECK(s.sigma2 == doctest::Approx(1.03985381347475).epsilon(1e-10));
    CHECK_FALSE(s.not_expanding);
}

#ifdef ERGOLAB_HAVE_EIGEN
TEST_CASE("closed form singular values match an SVD oracle") {
    RandomStream rs{2024};
    for (std::uint64_t i = 0; i < 500; ++i) {
        Mat m{4 * rs.u01(4 * i) - 2, 4 * rs.u01(4 * i + 1) - 2, 4 * rs.u01(4 * i + 2) - 2,
              4 * rs.u01(4 * i + 3) - 2};
        SingularValues sv = singular_values(m, 2);
        Eigen::Matrix2d em;
        em << m.a, m.b, m.c, m.d;
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(em);
        CHECK(sv.smax == doctest::Approx(svd.singularValues()(0)).epsilon(1e-10));
        CHECK(sv.smin == doctest::Approx(svd.singularValues()(1)).epsilon(1e-10));
    }
}

TEST_CASE("sigma1 of the triangle builder matches per piece SVD") {
    Simplex tri{2, {{0, 0}, {1, 0}, {0, 1}}};
    MapFamily fam = build_expanding_family(simplex_complex_space({tri}), 1);
    double worst = 1e300;
    for (const SmoothMap& f : fam.maps) {
        // full-branch charts: every piece of every map contributes
        for (const AffinePiece& piece : f.pieces) {
            Eigen::Matrix2d em;
            em << piece.map.L.a, piece.map.L.b, piece.map.L.c, piece.map.L.d;
            Eigen::JacobiSVD<Eigen::Matrix2d> svd(em);
            worst = std::min(worst, svd.singularValues()(1));
        }
    }
    SigmaReport s = estimate_sigmas(fam);
    CHECK(s.sigma1 == doctest::Approx(worst).epsilon(1e-12));
    CHECK(s.sigma1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    MapFamily deep = build_expanding_family(simplex_complex_space({tri}), 2);
    CHECK(estimate_sigmas(deep).sigma1 == doctest::Approx(2.589357001743).epsilon(1e-9));
}
#endif

TEST_CASE("determinant condition for the q=1 family") {
    Simplex tri{2, {{0, 0}, {1, 0}, {0, 1}}};
    MapFamily fam = build_mostly_expanding_family(simplex_complex_space({tri}), 0.5);
    CHECK(check_det_condition(fam));
    CHECK_THROWS_AS(check_det_condition(build_expanding_family(torus_space(1), 1)), Error);
}

TEST_CASE("epsilon0 balance solution") {
    double ln2 = std::log(2.0);
    auto e = derive_epsilon0(2.0, 1.0, ln2 / 2);
    REQUIRE(e.has_value());
    CHECK(std::abs(*e - 0.5) < 1e-12);

    CHECK_FALSE(derive_epsilon0(2.0, 1.0, ln2).has_value());   // boundary: 1
    CHECK_FALSE(derive_epsilon0(2.0, 1.0, 2 * ln2).has_value());

    // generic value against the balance inequality itself
    auto g = derive_epsilon0(2.0, 1.5, 0.1);
    REQUIRE(g.has_value());
    double lhs = std::pow(2.0, -*g) * std::pow(1.5, 1.0 - *g);
    CHECK(lhs == doctest::Approx(std::exp(-0.1)).epsilon(1e-12));
}

TEST_CASE("constants sheet for the doubling family") {
    MapFamily fam = build_expanding_family(torus_space(1), 1);
    ConstantsOptions opts;
    opts.c_override = std::log(2.0) / 2;
    ConstantsSheet sheet = constants_for(fam, opts);
    CHECK(sheet.sigma1.value == 2.0);
    CHECK(sheet.sigma1.exact);
    CHECK(sheet.epsilon0.has_value());
    CHECK(std::abs(sheet.epsilon0->value - 0.5) < 1e-12);
    CHECK(sheet.K1.value == doctest::Approx(0.5));
    CHECK(sheet.K1.exact);
    CHECK(sheet.K2.value == doctest::Approx(1.0));
    CHECK(sheet.C0.value == 0.0);
    CHECK(sheet.L1.value == 1.0);
    CHECK(sheet.L2.value == 1.0);
    CHECK(sheet.r.value > 0.0);
    CHECK(sheet.usable());
}

TEST_CASE("constants sheet bootstraps c when not overridden") {
    MapFamily fam = build_expanding_family(torus_space(1), 1);
    ConstantsOptions opts;
    opts.estimate_radius = false;
    ConstantsSheet sheet = constants_for(fam, opts);
    // all regions expanding with sigma1 = 2: c = (1/2) log 2
    CHECK(sheet.c.value == doctest::Approx(0.5 * std::log(2.0)));
    CHECK(sheet.usable());
}

TEST_CASE("constants sheet reports the boundary case as unusable") {
    MapFamily fam = build_expanding_family(torus_space(1), 1);
    ConstantsOptions opts;
    opts.c_override = std::log(2.0);
    opts.estimate_radius = false;
    ConstantsSheet sheet = constants_for(fam, opts);
    CHECK_FALSE(sheet.epsilon0.has_value());
    CHECK_FALSE(sheet.usable());
}

TEST_CASE("distortion constants for the perturbed family") {
    MapFamily fam = perturbed_doubling_family(0.01);
    ConstantsOptions opts;
    opts.estimate_radius = false;
    ConstantsSheet sheet = constants_for(fam, opts);
    double tau = 2 * 3.14159265358979323846;
    CHECK(sheet.C0.value == doctest::Approx(tau * tau * 0.01 / (2.0 - tau * 0.01)));
    CHECK(sheet.alpha.value == 1.0);
    // K2 = K1 * sup|f'| with sup|f'| = 2 + 2 pi amp
    CHECK(sheet.K2.value == doctest::Approx(0.5 * (2.0 + tau * 0.01)).epsilon(1e-6));
    double c = sheet.c.value;
    double expect_L1 =
        std::exp(sheet.C0.value * sheet.K2.value / (1.0 - std::exp(-c / 2)));
    CHECK(sheet.L1.value == doctest::Approx(expect_L1).epsilon(1e-9));
    CHECK(sheet.L1.value > 1.0);
    CHECK(sheet.usable());
}

TEST_CASE("rotation control cannot support a constants sheet") {
    ConstantsOptions opts;
    opts.estimate_radius = false;
    // without an expansion rate there is nothing to bootstrap c from
    CHECK_THROWS_AS(constants_for(rotation_control_family(), opts), Error);
    // an explicit c still finds no epsilon0 in (0,1)
    opts.c_override = 0.1;
    ConstantsSheet sheet = constants_for(rotation_control_family(), opts);
    CHECK(sheet.not_expanding);
    CHECK_FALSE(sheet.epsilon0.has_value());
    CHECK_FALSE(sheet.usable());
}

}
