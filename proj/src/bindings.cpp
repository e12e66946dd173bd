// Python surface: the main operations, with families and reports exchanged as
// JSON strings. The ergolab python package parses these into dicts; keeping the
// boundary textual means the bindings and the CLI cannot drift apart.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "ergolab/conditions.hpp"
#include "ergolab/cylinders.hpp"
#include "ergolab/ergodicity.hpp"
#include "ergolab/expansion.hpp"
#include "ergolab/irreducibility.hpp"
#include "ergolab/serialize.hpp"
#include "ergolab/symbolic.hpp"
#include "ergolab/systems.hpp"

namespace py = pybind11;
using namespace ergolab;

namespace {

MapFamily parse_family(const std::string& text) {
    return family_from_json(Json::parse(text));
}

Vec parse_point(const std::vector<double>& coords) {
    require(!coords.empty() && coords.size() <= 2, "bad-parameter",
            "point needs one or two coordinates");
    return {coords[0], coords.size() > 1 ? coords[1] : 0.0};
}

ConstantsSheet sheet_for(const MapFamily& family, std::optional<double> c) {
    ConstantsOptions opt;
    opt.c_override = c;
    opt.estimate_radius = false;
    return constants_for(family, opt);
}

SymbolStream stream_for(const MapFamily& family, const std::string& kind, Vec start,
                        std::uint64_t seed) {
    if (kind == "iid") return iid_uniform_stream(family.size(), seed);
    if (kind == "itinerary") return make_itinerary_stream(family, start);
    fail("bad-parameter", "stream must be iid or itinerary: " + kind);
}

IterateOptions options_with(double dither, std::uint64_t seed) {
    IterateOptions opt;
    opt.dither = dither;
    opt.dither_seed = seed;
    return opt;
}

std::string py_build_family(const std::string& config) {
    return dump_report(family_to_json(family_from_config(Json::parse(config))));
}

std::string py_check_family(const std::string& family, std::optional<double> c) {
    MapFamily fam = parse_family(family);
    Json out;
    out["partition"] = partition_report_to_json(
        validate_topological_partition(fam.partition));
    out["markov"] = markov_to_json(check_markov(fam.partition, fam));
    ConstantsSheet sheet = sheet_for(fam, c);
    out["constants"] = constants_to_json(sheet);
    out["pass"] = out["partition"]["pass"].get<bool>() &&
                  out["markov"]["pass"].get<bool>() && sheet.usable();
    return dump_report(out);
}

std::string py_orbit(const std::string& family, const std::vector<double>& start,
                     std::int64_t steps, const std::string& stream, std::uint64_t seed,
                     double dither) {
    MapFamily fam = parse_family(family);
    Vec x = parse_point(start);
    OrbitRecord rec = iterate(fam, x, stream_for(fam, stream, x, seed),
                              static_cast<std::size_t>(steps),
                              options_with(dither, derive_seed(seed, 2)));
    return dump_report(orbit_to_json(rec));
}

std::vector<std::int64_t> py_pliss(const std::vector<double>& a, double c) {
    return pliss_times(a, c).times;
}

double py_frequency(const std::vector<double>& a, double c) {
    return hyperbolic_frequency(pliss_times(a, c),
                                static_cast<std::int64_t>(a.size()));
}

std::string py_cylinder(const std::string& family, const std::vector<int>& word,
                        std::optional<double> c, int samples, std::uint64_t seed) {
    MapFamily fam = parse_family(family);
    Word w{word, fam.size()};
    w.validate();
    ConstantsSheet sheet = sheet_for(fam, c);
    Cylinder cyl = cylinder(fam, w, samples, seed);
    Json out;
    out["cylinder"] = cylinder_to_json(cyl);
    HyperbolicCylinderReport hyp = is_hyperbolic_cylinder(fam, cyl, sheet.c.value);
    out["hyperbolic"] = hyp.state == TriState::Yes
                            ? "yes"
                            : (hyp.state == TriState::No ? "no" : "unknown");
    if (!cyl.empty && hyp.state != TriState::No)
        out["diameter_decay"] = diameter_decay_to_json(
            diameter_decay_check(fam, cyl, sheet.c.value, sheet.K2.value));
    return dump_report(out);
}

std::string py_transitivity(const std::string& family, int depth) {
    return dump_report(transitivity_to_json(transitivity_matrix(parse_family(family),
                                                                depth)));
}

std::string py_weak_cycle(const std::string& family,
                          const std::vector<std::vector<double>>& target, int samples,
                          int depth, std::uint64_t seed) {
    MapFamily fam = parse_family(family);
    Region b;
    if (fam.dim() == 1) {
        require(target.size() == 2, "bad-parameter",
                "1d target is a pair of endpoints");
        b.polys.push_back(make_interval(target[0][0], target[1][0]));
    } else {
        std::vector<Vec> verts;
        for (const auto& v : target) verts.push_back(parse_point(v));
        b.polys.push_back(make_polygon(verts));
    }
    return dump_report(weak_cycle_to_json(weak_cycle_test(fam, b, samples, depth, seed)));
}

std::string py_ergodicity(const std::string& family, int starts, std::int64_t steps,
                          const std::string& stream, std::uint64_t seed, double dither) {
    MapFamily fam = parse_family(family);
    StreamChoice choice = stream == "itinerary" ? StreamChoice::ItineraryDriven
                                                : StreamChoice::IidUniform;
    ErgodicityReport rep =
        ergodicity_experiment(fam, bundled_observables(fam), starts, steps, choice,
                              seed, options_with(dither, derive_seed(seed, 3)));
    return dump_report(ergodicity_to_json(rep));
}

std::string py_probe(const std::string& family, int g, int rounds) {
    return dump_report(probe_to_json(invariant_set_probe(parse_family(family), g,
                                                         rounds)));
}

std::string py_equidistribution(const std::string& family,
                                const std::vector<double>& start, std::int64_t steps,
                                int boxes, std::uint64_t seed, double dither) {
    MapFamily fam = parse_family(family);
    Vec x = parse_point(start);
    EquidistributionReport rep =
        equidistribution_test(fam, x, iid_uniform_stream(fam.size(), seed), steps,
                              boxes, options_with(dither, derive_seed(seed, 4)));
    return dump_report(equidistribution_to_json(rep));
}

}  // namespace

PYBIND11_MODULE(_ergolab, m) {
    m.doc() = "simulation and checks for finitely generated expanding map actions";

    py::register_exception<Error>(m, "ErgolabError");

    m.def("build_family", &py_build_family, py::arg("config"),
          "Build a family from a JSON config string; returns the family document.");
    m.def("check_family", &py_check_family, py::arg("family"),
          py::arg("c") = std::nullopt,
          "Partition, Markov and constants checks on a family document.");
    m.def("orbit", &py_orbit, py::arg("family"), py::arg("start"), py::arg("steps"),
          py::arg("stream") = "itinerary", py::arg("seed") = 1,
          py::arg("dither") = kDefaultDither,
          "Iterate one orbit; returns points, symbols and expansion terms.");
    m.def("pliss_times", &py_pliss, py::arg("a"), py::arg("c"),
          "Hyperbolic times of a log-expansion sequence at level c.");
    m.def("hyperbolic_frequency", &py_frequency, py::arg("a"), py::arg("c"),
          "Density of hyperbolic times over the full horizon.");
    m.def("derive_epsilon0", &derive_epsilon0, py::arg("sigma1"), py::arg("sigma2"),
          py::arg("c"),
          "Expanding-time density threshold; None when c is too demanding.");
    m.def("cylinder", &py_cylinder, py::arg("family"), py::arg("word"),
          py::arg("c") = std::nullopt, py::arg("samples") = 100000,
          py::arg("seed") = 3301,
          "Cylinder of a word with hyperbolicity and diameter decay checks.");
    m.def("transitivity", &py_transitivity, py::arg("family"), py::arg("depth"),
          "Region-to-region reachability table up to the given word length.");
    m.def("weak_cycle", &py_weak_cycle, py::arg("family"), py::arg("target"),
          py::arg("samples") = 1000, py::arg("depth") = 10, py::arg("seed") = 1,
          "Backward-orbit hit fraction for a target region.");
    m.def("ergodicity", &py_ergodicity, py::arg("family"), py::arg("starts") = 20,
          py::arg("steps") = 1000000, py::arg("stream") = "iid", py::arg("seed") = 1,
          py::arg("dither") = kDefaultDither,
          "Cross-start Birkhoff averages against Lebesgue integrals.");
    m.def("invariant_set_probe", &py_probe, py::arg("family"), py::arg("g") = 64,
          py::arg("rounds") = 4096,
          "Grid-level forward-invariant set search.");
    m.def("equidistribution", &py_equidistribution, py::arg("family"),
          py::arg("start"), py::arg("steps"), py::arg("boxes") = 16,
          py::arg("seed") = 1, py::arg("dither") = kDefaultDither,
          "Chi-square box-count test of orbit equidistribution.");
}
