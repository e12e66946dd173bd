// Acceptance gate: one criterion per line, [PASS]/[FAIL], nonzero exit on any
// failure. Each criterion pins its own tolerances; together they exercise the
// Pliss machinery, the exact builders, the constants chain, cylinder
// contraction and distortion, hyperbolic-time frequency, the weak cycle
// property, and the ergodicity falsification suite.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ergolab/conditions.hpp"
#include "ergolab/cylinders.hpp"
#include "ergolab/ergodicity.hpp"
#include "ergolab/expansion.hpp"
#include "ergolab/irreducibility.hpp"
#include "ergolab/systems.hpp"

using namespace ergolab;

namespace {

int failures = 0;

void report(int number, bool pass, const std::string& text) {
    std::printf("[%s] %d. %s\n", pass ? "PASS" : "FAIL", number, text.c_str());
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

MapFamily doubling_family() { return build_expanding_family(torus_space(1), 1); }

PhaseSpace triangle_space() {
    Simplex tri{2, {{0, 0}, {1, 0}, {0, 1}}};
    return simplex_complex_space({tri});
}

IterateOptions dithered(std::uint64_t seed) {
    IterateOptions opt;
    opt.dither = kDefaultDither;
    opt.dither_seed = seed;
    return opt;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

// ---- criterion 1: pliss_times equals the quadratic oracle ----
void criterion_pliss() {
    auto t0 = std::chrono::steady_clock::now();
    const double cs[] = {0.1, 0.5, 1.0};
    RandomStream rs{0xACC1};
    std::uint64_t ctr = 0;
    long mismatches = 0;
    const int total = 10000;
    for (int i = 0; i < total; ++i) {
        int len = 1 + static_cast<int>(rs.below(ctr++, 500));
        std::vector<double> a(static_cast<std::size_t>(len));
        for (double& v : a) v = -2.0 + 3.0 * rs.u01(ctr++);
        double c = cs[i % 3];
        HyperbolicTimeSet fast = pliss_times(a, c);
        HyperbolicTimeSet slow = pliss_times_bruteforce(a, c);
        if (fast.times != slow.times) ++mismatches;
    }
    double el = seconds_since(t0);
    bool pass = mismatches == 0 && el < 10.0;
    report(1, pass,
           "pliss scan equals the quadratic oracle: " + std::to_string(total) +
               " sequences (length <= 500, c in {0.1,0.5,1}), " +
               std::to_string(mismatches) + " mismatches, " + fmt("%.1f", el) + "s");
}

// ---- criterion 2: barycentric builder exactness ----
void criterion_builder() {
    MapFamily fam = build_expanding_family(triangle_space(), 1);
    bool pass = fam.maps.size() == 6 && fam.partition.regions.size() == 6;
    double worst_det = 0.0;
    for (std::size_t i = 0; i < fam.maps.size() && pass; ++i) {
        Vec probe = fam.partition.regions[i].polys[0].centroid();
        double d = std::abs(fam.maps[i].det_at(probe));
        worst_det = std::max(worst_det, std::abs(d - 6.0));
    }
    pass = pass && worst_det <= 1e-12;
    MarkovReport markov = check_markov(fam.partition, fam);
    pass = pass && markov.pass;
    report(2, pass,
           "level-1 barycentric builder: 6 charts, |det| = 6 (max error " +
               fmt("%.2e", worst_det) + "), markov condition " +
               (markov.pass ? "holds" : "fails"));
}

// ---- criterion 3: constants chain on the doubling family ----
void criterion_constants() {
    MapFamily fam = doubling_family();
    ConstantsOptions opt;
    opt.estimate_radius = false;
    ConstantsSheet sheet = constants_for(fam, opt);
    bool pass = sheet.sigma1.value == 2.0 && sheet.sigma1.exact;
    auto eps = derive_epsilon0(2.0, 1.0, std::log(2.0) / 2.0);
    pass = pass && eps && std::abs(*eps - 0.5) <= 1e-12;
    pass = pass && sheet.K1.value == 0.5 && sheet.K2.value == 1.0;
    pass = pass && sheet.C0.value == 0.0 && sheet.L1.value == 1.0;
    report(3, pass,
           std::string("constants chain: sigma1 = 2 exact, epsilon0(2,1,ln2/2) = ") +
               (eps ? fmt("%.15g", *eps) : "none") + ", K2 = " +
               fmt("%.15g", sheet.K2.value) + " from K1 = 1/2, L1 = " +
               fmt("%.15g", sheet.L1.value));
}

// ---- criteria 4 and 5 share cylinder harvesting ----
struct Harvest {
    std::vector<std::pair<Word, Cylinder>> cylinders;
    int draws = 0;
};

Harvest harvest_hyperbolic(const MapFamily& fam, double c, int want, int max_len,
                           std::uint64_t seed) {
    Harvest h;
    RandomStream rs{seed};
    std::uint64_t ctr = 0;
    while (static_cast<int>(h.cylinders.size()) < want && h.draws < 5000) {
        ++h.draws;
        int len = 1 + static_cast<int>(rs.below(ctr++, static_cast<std::uint64_t>(max_len)));
        Word w;
        w.alphabet_size = fam.size();
        for (int j = 0; j < len; ++j)
            w.symbols.push_back(static_cast<int>(rs.below(ctr++, static_cast<std::uint64_t>(fam.size()))));
        Cylinder cyl = cylinder(fam, w, 2000, derive_seed(seed, ctr));
        if (cyl.empty) continue;
        if (is_hyperbolic_cylinder(fam, cyl, c).state != TriState::Yes) continue;
        h.cylinders.emplace_back(std::move(w), std::move(cyl));
    }
    return h;
}

void criterion_contraction() {
    struct Case {
        const char* label;
        MapFamily fam;
    };
    std::vector<Case> cases;
    cases.push_back({"doubling", doubling_family()});
    cases.push_back({"triangle q=1", build_mostly_expanding_family(triangle_space(), 0.5)});

    bool pass = true;
    std::string detail;
    for (Case& cs : cases) {
        ConstantsOptions copt;
        copt.estimate_radius = false;
        ConstantsSheet sheet = constants_for(cs.fam, copt);
        Harvest h = harvest_hyperbolic(cs.fam, sheet.c.value, 100, 12, 0xC41);
        long violations = 0;
        for (auto& [w, cyl] : h.cylinders) {
            DiameterDecayReport decay =
                diameter_decay_check(cs.fam, cyl, sheet.c.value, sheet.K2.value);
            for (const DiameterDecayRow& row : decay.rows)
                if (row.diameter > row.bound + 1e-9) ++violations;
        }
        bool got_all = static_cast<int>(h.cylinders.size()) == 100;
        pass = pass && got_all && violations == 0;
        if (!detail.empty()) detail += "; ";
        detail += std::string(cs.label) + ": " + std::to_string(h.cylinders.size()) +
                  " hyperbolic cylinders, " + std::to_string(violations) +
                  " bound violations";
    }
    report(4, pass, "cylinder diameter decay within K2 e^{-jc/2} (slack 1e-9): " + detail);
}

void criterion_distortion() {
    bool pass = true;
    std::string detail;

    // affine families: the determinant ratio is identically one
    for (auto& [label, fam] :
         std::vector<std::pair<const char*, MapFamily>>{
             {"doubling", doubling_family()},
             {"triangle q=1", build_mostly_expanding_family(triangle_space(), 0.5)}}) {
        ConstantsOptions copt;
        copt.estimate_radius = false;
        ConstantsSheet sheet = constants_for(fam, copt);
        Harvest h = harvest_hyperbolic(fam, sheet.c.value, 20, 10, 0xD15);
        double worst = 0.0;
        for (auto& [w, cyl] : h.cylinders) {
            std::size_t m = std::min<std::size_t>(cyl.samples.size(), 50);
            for (std::size_t i = 0; i + 1 < m; ++i) {
                double r = distortion_ratio(fam, w, cyl.samples[i], cyl.samples[i + 1]);
                worst = std::max(worst, std::abs(r - 1.0));
            }
        }
        pass = pass && h.cylinders.size() == 20 && worst <= 1e-12;
        if (!detail.empty()) detail += "; ";
        detail += std::string(label) + " max |ratio-1| = " + fmt("%.2e", worst);
    }

    // bundled C2 perturbation: ratios live inside [1/L1, L1]
    MapFamily pert = perturbed_doubling_family(0.01);
    ConstantsOptions copt;
    copt.estimate_radius = false;
    ConstantsSheet sheet = constants_for(pert, copt);
    double lo = 1.0 / sheet.L1.value - 1e-12, hi = sheet.L1.value + 1e-12;
    RandomStream rs{0xD16};
    std::uint64_t ctr = 0;
    long violations = 0, pairs = 0;
    int built = 0;
    for (int k = 0; k < 10; ++k) {
        int len = 2 + static_cast<int>(rs.below(ctr++, 4));
        Word w;
        w.alphabet_size = pert.size();
        for (int j = 0; j < len; ++j)
            w.symbols.push_back(static_cast<int>(rs.below(ctr++, 2)));
        Cylinder cyl = cylinder(pert, w, 60000, derive_seed(0xD16, ctr));
        if (cyl.empty || cyl.samples.size() < 46) continue;
        ++built;
        long count = 0;
        std::size_t m = std::min<std::size_t>(cyl.samples.size(), 50);
        for (std::size_t i = 0; i < m && count < 1000; ++i)
            for (std::size_t j = i + 1; j < m && count < 1000; ++j, ++count) {
                double r = distortion_ratio(pert, w, cyl.samples[i], cyl.samples[j]);
                if (r < lo || r > hi) ++violations;
                ++pairs;
            }
    }
    pass = pass && built == 10 && pairs >= 10000 && violations == 0;
    detail += "; perturbed (amp 1e-2, L1 = " + fmt("%.6f", sheet.L1.value) + "): " +
              std::to_string(pairs) + " pairs, " + std::to_string(violations) +
              " outside [1/L1, L1]";
    report(5, pass, "distortion ratios: " + detail);
}

// ---- criterion 6: hyperbolic-time frequency for the q=1 family ----
void criterion_frequency() {
    MapFamily fam = build_mostly_expanding_family(triangle_space(), 0.5);
    ConstantsOptions copt;
    copt.estimate_radius = false;
    ConstantsSheet sheet = constants_for(fam, copt);
    double c = sheet.c.value;
    double eps0 = sheet.epsilon0 ? sheet.epsilon0->value : 1.0;

    const int starts = 1000;
    const std::int64_t horizon = 10000;
    RandomStream rs{0xF6};
    int ok = 0, sampled = 0;
    std::uint64_t probe = 0;
    while (sampled < starts && probe < 100000) {
        Vec x = fam.space().sample(rs, probe++);
        if (fam.partition.locate(x, 1e-12) < 0) continue;
        ++sampled;
        OrbitRecord rec = iterate(fam, x, make_itinerary_stream(fam, x),
                                  static_cast<std::size_t>(horizon),
                                  dithered(derive_seed(0xF6, probe)));
        if (rec.truncated) continue;
        double freq = hyperbolic_frequency(pliss_times(rec.a, c), horizon);
        if (freq >= eps0) ++ok;
    }
    double frac = static_cast<double>(ok) / static_cast<double>(starts);
    bool pass = sheet.usable() && sampled == starts && frac >= 0.99;
    report(6, pass,
           "hyperbolic-time frequency >= epsilon0 = " + fmt("%.6f", eps0) +
               " at horizon 10^4 for " + fmt("%.1f", 100.0 * frac) + "% of " +
               std::to_string(starts) + " itinerary starts (need 99%)");
}

// ---- criterion 7: weak cycle property ----
void criterion_weak_cycle() {
    Region arc;
    arc.polys.push_back(make_interval(0.45, 0.55));
    Region rect;
    rect.polys.push_back(
        make_polygon({{0.1, 0.1}, {0.5, 0.1}, {0.5, 0.225}, {0.1, 0.225}}));

    bool pass = true;
    std::string detail;
    auto run = [&](const char* label, const MapFamily& fam, const Region& b) {
        WeakCycleReport rep = weak_cycle_test(fam, b, 1000, 10, 0x7C);
        pass = pass && rep.hit_fraction == 1.0 && !rep.flagged;
        if (!detail.empty()) detail += "; ";
        detail += std::string(label) + " " + fmt("%.3f", rep.hit_fraction);
    };
    run("doubling", doubling_family(), arc);
    run("triangle q=0", build_expanding_family(triangle_space(), 1), rect);
    run("triangle q=1", build_mostly_expanding_family(triangle_space(), 0.5), rect);

    Region left;
    left.polys.push_back(make_interval(0.05, 0.15));
    WeakCycleReport ctrl = weak_cycle_test(invariant_arcs_control_family(), left, 1000,
                                           10, 0x7C);
    pass = pass && ctrl.flagged && ctrl.hit_fraction < 0.6;
    detail += "; control " + fmt("%.3f", ctrl.hit_fraction) +
              (ctrl.flagged ? " flagged" : " not flagged");
    report(7, pass,
           "weak cycle hit fraction at depth 10, target measure 0.1, 10^3 samples: " +
               detail);
}

// ---- criterion 8: ergodicity falsification power ----
void criterion_ergodicity() {
    bool pass = true;
    std::string detail;

    auto experiment = [&](const char* label, const MapFamily& fam, bool expect_pass) {
        ErgodicityReport rep =
            ergodicity_experiment(fam, bundled_observables(fam), 20, 1000000,
                                  StreamChoice::IidUniform, 0xE8, dithered(0xE8));
        pass = pass && rep.pass == expect_pass;
        if (!detail.empty()) detail += "; ";
        detail += std::string(label) + (rep.pass ? " passes" : " fails");
    };
    experiment("doubling", doubling_family(), true);
    experiment("q=0", build_expanding_family(triangle_space(), 1), true);
    experiment("q=1", build_mostly_expanding_family(triangle_space(), 0.5), true);
    experiment("control", invariant_arcs_control_family(), false);

    auto probe = [&](const char* label, const MapFamily& fam, bool expect_evidence) {
        InvariantProbeReport rep = invariant_set_probe(fam, 256, 4096);
        pass = pass && rep.ergodic_evidence == expect_evidence;
        detail += std::string("; probe ") + label + " min " +
                  fmt("%.4f", rep.min_measure);
        return rep;
    };
    probe("doubling", doubling_family(), true);
    probe("q=0", build_expanding_family(triangle_space(), 1), true);
    probe("q=1", build_mostly_expanding_family(triangle_space(), 0.5), true);
    InvariantProbeReport ctrl = probe("control", invariant_arcs_control_family(), false);
    pass = pass && std::abs(ctrl.min_measure - 0.5) <= 2.0 / 256.0;

    report(8, pass,
           "ergodicity falsification (cross-start Birkhoff vs Lebesgue at n = 10^6, 20 "
           "starts; invariant-set probe at g = 256): " +
               detail + "; statistical evidence for ergodicity, not a proof");
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    criterion_pliss();
    criterion_builder();
    criterion_constants();
    criterion_contraction();
    criterion_distortion();
    criterion_frequency();
    criterion_weak_cycle();
    criterion_ergodicity();
    double el = seconds_since(t0);
    std::printf("%d/8 criteria passed in %.1fs\n", 8 - failures, el);
    if (el >= 600.0) {
        std::printf("[FAIL] runtime budget: %.1fs >= 600s\n", el);
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
