#include "ergolab/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ergolab/conditions.hpp"
#include "ergolab/cylinders.hpp"
#include "ergolab/ergodicity.hpp"
#include "ergolab/error.hpp"
#include "ergolab/expansion.hpp"
#include "ergolab/irreducibility.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/serialize.hpp"
#include "ergolab/systems.hpp"

namespace ergolab::cli {

namespace {

constexpr int kSchemaVersion = 1;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

std::vector<double> parse_numbers(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            fail("bad-parameter", "not a number: '" + item + "'");
        }
        require(used == item.size(), "bad-parameter", "not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

Vec parse_point(const std::string& text, int dim) {
    std::vector<double> nums = parse_numbers(text);
    require(static_cast<int>(nums.size()) == dim, "bad-parameter",
            "--start needs " + std::to_string(dim) + " comma-separated coordinates");
    Vec p{nums[0], dim == 2 ? nums[1] : 0.0};
    return p;
}

Word parse_word_text(const std::string& text, int alphabet) {
    Word w{{}, alphabet};
    for (double v : parse_numbers(text)) {
        int s = static_cast<int>(v);
        require(static_cast<double>(s) == v, "bad-parameter",
                "--word symbols must be integers");
        w.symbols.push_back(s);
    }
    w.validate();
    require(!w.symbols.empty(), "bad-parameter", "--word must be nonempty");
    return w;
}

Word word_from_json(const Json& arr, int alphabet) {
    Word w{{}, alphabet};
    require(arr.is_array(), "bad-parameter", "word: expected an array of symbols");
    for (const Json& s : arr) w.symbols.push_back(s.get<int>());
    w.validate();
    require(!w.symbols.empty(), "bad-parameter", "word: must be nonempty");
    return w;
}

Json point_json(Vec p, int dim) {
    Json j = Json::array();
    j.push_back(p.x);
    if (dim == 2) j.push_back(p.y);
    return j;
}

Vec interior_start(const MapFamily& family, const RandomStream& rs) {
    for (std::uint64_t i = 0; i < 10000; ++i) {
        Vec p = family.space().sample(rs, i);
        if (family.partition.locate(p, 1e-12) >= 0) return p;
    }
    fail("degenerate-set", "could not sample a start point off the skeleton");
}

void write_or_print(const std::string& path, const Json& doc) {
    std::string text = dump_report(doc);
    if (path.empty())
        std::fputs(text.c_str(), stdout);
    else
        write_text(path, text);
}

// Stage runners shared by the one-shot subcommands and `run`. A stage never
// throws for a failed check; errors raised mid-computation are folded into
// the stage report with their token so the pipeline can keep going.
struct StageResult {
    Json json;
    bool pass = false;
};

template <typename Fn>
StageResult guarded_stage(Fn&& body) {
    StageResult out;
    try {
        body(out);
    } catch (const Error& e) {
        out.pass = false;
        out.json["error"] = Json{{"token", e.token()}, {"message", e.what()}};
        out.json["pass"] = false;
    }
    return out;
}

struct ConditionsOutcome {
    StageResult result;
    ConstantsSheet sheet;
    bool sheet_valid = false;
};

ConditionsOutcome run_conditions_stage(const MapFamily& family,
                                       const ConstantsOptions& opts,
                                       std::optional<double> eps0_override) {
    ConditionsOutcome out;
    out.result = guarded_stage([&](StageResult& r) {
        PartitionReport part = validate_topological_partition(
            family.partition, opts.sigma_samples, derive_seed(opts.seed, 11));
        MarkovReport markov = check_markov(family.partition, family);
        ConstantsSheet sheet = constants_for(family, opts);
        if (eps0_override) {
            require(*eps0_override > 0 && *eps0_override < 1, "bad-constants",
                    "constants.epsilon0 override must lie in (0,1)");
            sheet.epsilon0 = TaggedValue::exactly(*eps0_override);
        }
        bool det_ok = true;
        if (family.q > 0)
            det_ok = check_det_condition(family, opts.sigma_samples,
                                         derive_seed(opts.seed, 13));
        out.sheet = sheet;
        out.sheet_valid = true;
        r.pass = part.pass() && markov.pass && det_ok && sheet.usable();
        r.json["partition"] = partition_report_to_json(part);
        r.json["markov"] = markov_to_json(markov);
        r.json["det_condition"] = family.q > 0 ? Json(det_ok) : Json(nullptr);
        r.json["constants"] = constants_to_json(sheet);
        r.json["pass"] = r.pass;
    });
    return out;
}

StageResult run_expansion_stage(const MapFamily& family, const ConstantsSheet& sheet,
                                int starts, std::int64_t horizon, std::uint64_t seed) {
    return guarded_stage([&](StageResult& r) {
        require(sheet.usable(), "bad-constants",
                "expansion stage needs a usable constants sheet (c, epsilon0)");
        double c = sheet.c.value;
        double eps0 = sheet.epsilon0->value;
        RandomStream starts_rs{derive_seed(seed, 21)};
        IterateOptions iopts;
        iopts.dither = kDefaultDither;
        iopts.dither_seed = derive_seed(seed, 22);
        Json rows = Json::array();
        int ok = 0;
        for (int i = 0; i < starts; ++i) {
            Vec x = interior_start(family, starts_rs.sub(static_cast<std::uint64_t>(i)));
            OrbitRecord rec = iterate(family, x, make_itinerary_stream(family, x),
                                      static_cast<std::size_t>(horizon), iopts);
            HyperbolicTimeSet times = pliss_times(rec.a, c);
            double freq = hyperbolic_frequency(times, horizon);
            NueReport nue = check_orbital_nue(rec, c);
            bool start_ok = !rec.truncated && freq >= eps0 && nue.pass;
            ok += start_ok ? 1 : 0;
            rows.push_back(Json{{"start", point_json(x, family.dim())},
                                {"hyperbolic_frequency", freq},
                                {"final_average", nue.final_average},
                                {"truncated", rec.truncated},
                                {"pass", start_ok}});
        }
        double fraction = starts > 0 ? static_cast<double>(ok) / starts : 1.0;
        r.pass = fraction >= 0.99;
        r.json["c"] = c;
        r.json["epsilon0"] = eps0;
        r.json["horizon"] = horizon;
        r.json["starts"] = rows;
        r.json["fraction_passing"] = fraction;
        r.json["pass"] = r.pass;
    });
}

StageResult run_cylinders_stage(const MapFamily& family, const ConstantsSheet& sheet,
                                const Word& word, int samples, int pairs,
                                std::uint64_t seed) {
    return guarded_stage([&](StageResult& r) {
        require(sheet.usable(), "bad-constants",
                "cylinder stage needs a usable constants sheet");
        double c = sheet.c.value;
        Cylinder cyl = cylinder(family, word, samples, derive_seed(seed, 31));
        r.json["cylinder"] = cylinder_to_json(cyl);
        if (cyl.empty) {
            r.pass = false;
            r.json["note"] = "requested cylinder is empty";
            r.json["pass"] = false;
            return;
        }
        HyperbolicCylinderReport hyp = is_hyperbolic_cylinder(family, cyl, c);
        r.json["hyperbolic"] = Json{
            {"state", hyp.state == TriState::Yes      ? "yes"
                      : hyp.state == TriState::No     ? "no"
                                                      : "unknown"},
            {"samples", hyp.samples}};
        if (hyp.state == TriState::No) {
            r.pass = false;
            r.json["note"] = "word length is not a hyperbolic time on this cylinder";
            r.json["pass"] = false;
            return;
        }
        DiameterDecayReport decay = diameter_decay_check(family, cyl, c, sheet.K2.value);
        r.json["diameter_decay"] = diameter_decay_to_json(decay);

        double L1 = sheet.L1.value;
        RandomStream rs{derive_seed(seed, 32)};
        int violations = 0;
        double lo = 1.0, hi = 1.0;
        int done = 0;
        if (cyl.samples.size() >= 2) {
            for (int i = 0; i < pairs; ++i) {
                std::uint64_t a = rs.below(2 * static_cast<std::uint64_t>(i), cyl.samples.size());
                std::uint64_t b = rs.below(2 * static_cast<std::uint64_t>(i) + 1, cyl.samples.size());
                double ratio = distortion_ratio(family, word, cyl.samples[a], cyl.samples[b]);
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
                if (ratio < 1.0 / L1 - 1e-9 || ratio > L1 + 1e-9) ++violations;
                ++done;
            }
        }
        r.json["distortion"] = Json{{"pairs", done},
                                    {"L1", L1},
                                    {"min_ratio", lo},
                                    {"max_ratio", hi},
                                    {"violations", violations}};
        r.pass = decay.pass && violations == 0 && done > 0;
        r.json["pass"] = r.pass;
    });
}

StageResult run_transitivity_stage(const MapFamily& family, int depth, double eps,
                                   int probes, int samples_per_region,
                                   int cycle_samples, int cycle_depth,
                                   std::uint64_t seed) {
    return guarded_stage([&](StageResult& r) {
        TransitivityMatrix mat = transitivity_matrix(family, depth, samples_per_region,
                                                     200000, derive_seed(seed, 41));
        Vec x0 = interior_start(family, RandomStream{derive_seed(seed, 42)});
        OrbitTree tree = orbit_tree(family, x0, Direction::Backward, depth, 1000000);
        double coverage = eps_density(family.space(), tree, eps, probes,
                                      derive_seed(seed, 43));
        WeakCycleReport weak =
            weak_cycle_test(family, family.partition.regions[0], cycle_samples,
                            cycle_depth, derive_seed(seed, 44));
        r.pass = mat.all_true && coverage >= 1.0 && !weak.flagged;
        r.json["matrix"] = transitivity_to_json(mat);
        r.json["backward_density"] = Json{{"start", point_json(x0, family.dim())},
                                          {"depth", depth},
                                          {"eps", eps},
                                          {"probes", probes},
                                          {"tree_nodes", tree.nodes.size()},
                                          {"tree_truncated", tree.truncated},
                                          {"coverage", coverage},
                                          {"holds", coverage >= 1.0}};
        r.json["weak_cycle"] = weak_cycle_to_json(weak);
        r.json["pass"] = r.pass;
    });
}

struct ErgodicityParams {
    int starts = 20;
    std::int64_t steps = 1000000;
    StreamChoice stream = StreamChoice::IidUniform;
    double dither = kDefaultDither;
    int boxes = 16;
    int probe_grid = 0;
    int probe_rounds = 4096;
};

StageResult run_ergodicity_stage(const MapFamily& family, const ErgodicityParams& p,
                                 std::uint64_t seed, const std::string& csv_path) {
    return guarded_stage([&](StageResult& r) {
        IterateOptions iopts;
        iopts.dither = p.dither;
        iopts.dither_seed = derive_seed(seed, 51);
        ErgodicityReport rep =
            ergodicity_experiment(family, bundled_observables(family), p.starts,
                                  p.steps, p.stream, seed, iopts);
        r.json["experiment"] = ergodicity_to_json(rep);
        bool pass = rep.pass;

        if (p.boxes >= 2) {
            Vec x0 = interior_start(family, RandomStream{derive_seed(seed, 52)});
            SymbolStream stream =
                p.stream == StreamChoice::IidUniform
                    ? iid_uniform_stream(family.size(), derive_seed(seed, 53))
                    : make_itinerary_stream(family, x0);
            EquidistributionReport equi =
                equidistribution_test(family, x0, stream, p.steps, p.boxes, iopts);
            // informational: the chi^2 statistic measures distance from the
            // uniform density, which only generators that preserve Lebesgue
            // are obliged to match; ergodicity itself is gated on the
            // cross-start experiment and the invariant-set probe
            r.json["equidistribution"] = equidistribution_to_json(equi);
        }
        if (p.probe_grid >= 2) {
            InvariantProbeReport probe =
                invariant_set_probe(family, p.probe_grid, p.probe_rounds);
            r.json["invariant_probe"] = probe_to_json(probe);
            pass = pass && probe.ergodic_evidence;
        }
        if (!csv_path.empty()) {
            std::string csv = "start";
            for (const ObservableFinding& f : rep.findings) csv += "," + f.name;
            csv += "\n";
            for (int i = 0; i < rep.starts; ++i) {
                csv += std::to_string(i);
                for (const ObservableFinding& f : rep.findings)
                    csv += "," + fmt(i < static_cast<int>(f.averages.size())
                                         ? f.averages[static_cast<std::size_t>(i)]
                                         : 0.0);
                csv += "\n";
            }
            write_text(csv_path, csv);
        }
        r.pass = pass;
        r.json["pass"] = pass;
    });
}

// Flag bundles for the subcommands.
struct BuildArgs {
    std::string builder = "expanding";
    std::string space = "torus1";
    int depth = 1;
    double beta = 0.5;
    double amplitude = 0.01;
    std::string out;
};

struct CheckArgs {
    std::string family;
    std::string report;
    double c = 0.0;
    bool has_c = false;
    double epsilon0 = 0.0;
    bool has_eps0 = false;
    int samples = 4096;
    int radius_configs = 1000;
    bool no_radius = false;
    std::uint64_t seed = 40961;
};

struct OrbitArgs {
    std::string family;
    std::string start;
    std::uint64_t steps = 10000;
    double c = 0.0;
    bool has_c = false;
    std::string stream = "itinerary";
    std::string word;
    std::uint64_t seed = 12001;
    double dither = 0.0;
    bool default_dither = false;
    std::string csv;
    std::string json;
};

struct CylinderArgs {
    std::string family;
    std::string word;
    double c = 0.0;
    bool has_c = false;
    std::string checks = "diameter,distortion";
    int samples = 100000;
    int pairs = 1000;
    std::uint64_t seed = 3301;
    std::string json;
};

struct TransitivityArgs {
    std::string family;
    int depth = 8;
    double eps = 0.05;
    int probes = 1000;
    int samples = 16;
    int cycle_samples = 200;
    int cycle_depth = 10;
    std::uint64_t seed = 23719;
    std::string json;
};

struct ErgodicityArgs {
    std::string family;
    int starts = 20;
    std::int64_t steps = 1000000;
    std::string stream = "iid";
    std::uint64_t seed = 36721;
    bool no_dither = false;
    double dither = kDefaultDither;
    int boxes = 16;
    int probe_grid = 0;
    int probe_rounds = 4096;
    std::string json;
    std::string csv;
};

MapFamily load_family(const std::string& path) {
    require(!path.empty(), "bad-parameter", "--family is required");
    return family_from_json(read_json_file(path));
}

ConstantsSheet sheet_for(const MapFamily& family, std::optional<double> c_override,
                         bool estimate_radius, std::uint64_t seed) {
    ConstantsOptions opts;
    opts.c_override = c_override;
    opts.estimate_radius = estimate_radius;
    opts.seed = seed;
    return constants_for(family, opts);
}

int cmd_build(const BuildArgs& a) {
    Json config{{"builder", a.builder},
                {"space", a.space},
                {"depth", a.depth},
                {"beta", a.beta},
                {"amplitude", a.amplitude}};
    MapFamily family = family_from_config(config);
    Json doc = family_to_json(family);
    // family files keep full float precision so they reload bit-exactly
    write_text(a.out, doc.dump(2) + "\n");
    std::printf("wrote %s: %d maps (p=%d, q=%d), dim %d, %d regions\n", a.out.c_str(),
                family.size(), family.p, family.q, family.dim(),
                family.partition.size());
    return 0;
}

int cmd_check(const CheckArgs& a) {
    MapFamily family = load_family(a.family);
    ConstantsOptions opts;
    if (a.has_c) opts.c_override = a.c;
    opts.sigma_samples = a.samples;
    opts.estimate_radius = !a.no_radius;
    opts.radius_configs = a.radius_configs;
    opts.seed = a.seed;
    std::optional<double> eps0;
    if (a.has_eps0) eps0 = a.epsilon0;
    ConditionsOutcome out = run_conditions_stage(family, opts, eps0);

    Json report{{"schema_version", kSchemaVersion},
                {"command", "check"},
                {"config", Json{{"family", a.family},
                                {"c", a.has_c ? Json(a.c) : Json(nullptr)},
                                {"epsilon0", a.has_eps0 ? Json(a.epsilon0) : Json(nullptr)},
                                {"samples", a.samples},
                                {"estimate_radius", !a.no_radius},
                                {"radius_configs", a.radius_configs},
                                {"seed", a.seed}}}};
    report.update(out.result.json);
    if (!a.report.empty()) write_text(a.report, dump_report(report));

    const Json& j = out.result.json;
    if (j.contains("partition"))
        std::printf("partition       %s\n",
                    j["partition"]["pass"].get<bool>() ? "pass" : "FAIL");
    if (j.contains("markov"))
        std::printf("markov          %s\n",
                    j["markov"]["pass"].get<bool>() ? "pass" : "FAIL");
    if (j.contains("det_condition") && !j["det_condition"].is_null())
        std::printf("det-condition   %s\n",
                    j["det_condition"].get<bool>() ? "pass" : "FAIL");
    if (out.sheet_valid) {
        std::printf("sigma1=%s sigma2=%s c=%s\n", fmt(out.sheet.sigma1.value).c_str(),
                    fmt(out.sheet.sigma2.value).c_str(), fmt(out.sheet.c.value).c_str());
        if (out.sheet.epsilon0)
            std::printf("epsilon0=%s K2=%s L1=%s r=%s\n",
                        fmt(out.sheet.epsilon0->value).c_str(),
                        fmt(out.sheet.K2.value).c_str(), fmt(out.sheet.L1.value).c_str(),
                        fmt(out.sheet.r.value).c_str());
        else
            std::printf("epsilon0: none in (0,1) at this c\n");
    }
    std::printf("check: %s\n", out.result.pass ? "pass" : "FAIL");
    return out.result.pass ? 0 : 1;
}

int cmd_orbit(const OrbitArgs& a) {
    MapFamily family = load_family(a.family);
    Vec x = family.space().wrap(parse_point(a.start, family.dim()));

    SymbolStream stream;
    if (a.stream == "itinerary") {
        stream = make_itinerary_stream(family, x);
    } else if (a.stream == "iid") {
        stream = iid_uniform_stream(family.size(), a.seed);
    } else if (a.stream == "word") {
        require(!a.word.empty(), "bad-parameter", "--stream word needs --word");
        stream = fixed_periodic_stream(parse_word_text(a.word, family.size()));
    } else {
        fail("bad-parameter", "--stream must be itinerary, iid, or word");
    }

    double c = a.c;
    if (!a.has_c) c = sheet_for(family, std::nullopt, false, a.seed).c.value;

    IterateOptions iopts;
    iopts.dither = a.default_dither ? kDefaultDither : a.dither;
    iopts.dither_seed = derive_seed(a.seed, 61);
    OrbitRecord rec = iterate(family, x, stream, a.steps, iopts);
    HyperbolicTimeSet times = pliss_times(rec.a, c);

    if (!a.csv.empty()) {
        std::string csv = family.dim() == 2
                              ? "step,symbol,x,y,a,S_n,is_hyperbolic_time\n"
                              : "step,symbol,x,a,S_n,is_hyperbolic_time\n";
        double sn = 0.0;
        std::size_t ti = 0;
        for (std::size_t j = 0; j < rec.steps(); ++j) {
            sn += rec.a[j];
            std::int64_t n = static_cast<std::int64_t>(j) + 1;
            while (ti < times.times.size() && times.times[ti] < n) ++ti;
            bool hyp = ti < times.times.size() && times.times[ti] == n;
            csv += std::to_string(n) + "," + std::to_string(rec.symbols.symbols[j]);
            csv += "," + fmt(rec.points[j].x);
            if (family.dim() == 2) csv += "," + fmt(rec.points[j].y);
            csv += "," + fmt(rec.a[j]) + "," + fmt(sn) + (hyp ? ",1\n" : ",0\n");
        }
        write_text(a.csv, csv);
    }
    if (!a.json.empty()) {
        Json report{{"schema_version", kSchemaVersion},
                    {"command", "orbit"},
                    {"config", Json{{"family", a.family},
                                    {"start", point_json(x, family.dim())},
                                    {"steps", a.steps},
                                    {"c", c},
                                    {"stream", a.stream},
                                    {"word", a.word},
                                    {"seed", a.seed},
                                    {"dither", iopts.dither}}},
                    {"orbit", orbit_to_json(rec)},
                    {"hyperbolic_times", hyperbolic_times_to_json(times)},
                    {"hyperbolic_frequency",
                     hyperbolic_frequency(times, static_cast<std::int64_t>(rec.steps()))}};
        write_text(a.json, dump_report(report));
    }
    double freq = hyperbolic_frequency(times, static_cast<std::int64_t>(rec.steps()));
    std::printf("%zu steps%s, %zu hyperbolic times (frequency %s)\n", rec.steps(),
                rec.truncated ? " (truncated at skeleton)" : "", times.times.size(),
                fmt(freq).c_str());
    return 0;
}

int cmd_cylinder(const CylinderArgs& a) {
    MapFamily family = load_family(a.family);
    Word word = parse_word_text(a.word, family.size());

    std::vector<std::string> checks;
    {
        std::stringstream ss(a.checks);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) checks.push_back(item);
    }
    for (const std::string& ck : checks)
        require(ck == "diameter" || ck == "distortion" || ck == "measure" || ck == "ball",
                "bad-parameter", "--check: unknown check '" + ck + "'");
    auto wants = [&](const std::string& name) {
        for (const std::string& ck : checks)
            if (ck == name) return true;
        return false;
    };

    std::optional<double> c_override;
    if (a.has_c) c_override = a.c;
    ConstantsSheet sheet = sheet_for(family, c_override, wants("ball"), a.seed);
    require(sheet.usable(), "bad-constants",
            "no usable (c, epsilon0) for this family; pass --c below the expansion rate");
    double c = sheet.c.value;

    StageResult core = run_cylinders_stage(family, sheet, word, a.samples, a.pairs,
                                           derive_seed(a.seed, 71));
    Json report{{"schema_version", kSchemaVersion},
                {"command", "cylinder"},
                {"config", Json{{"family", a.family},
                                {"word", a.word},
                                {"c", c},
                                {"check", a.checks},
                                {"samples", a.samples},
                                {"pairs", a.pairs},
                                {"seed", a.seed}}}};
    bool pass = true;
    report["cylinder"] = core.json.contains("cylinder") ? core.json["cylinder"] : Json();
    if (core.json.contains("hyperbolic")) report["hyperbolic"] = core.json["hyperbolic"];
    if (core.json.contains("error")) {
        report["error"] = core.json["error"];
        pass = false;
    }
    if (core.json.contains("note")) {
        report["note"] = core.json["note"];
        pass = false;
    }
    if (wants("diameter")) {
        if (core.json.contains("diameter_decay")) {
            report["diameter_decay"] = core.json["diameter_decay"];
            pass = pass && core.json["diameter_decay"]["pass"].get<bool>();
        } else {
            pass = false;
        }
    }
    if (wants("distortion")) {
        if (core.json.contains("distortion")) {
            report["distortion"] = core.json["distortion"];
            pass = pass && core.json["distortion"]["violations"].get<int>() == 0 &&
                   core.json["distortion"]["pairs"].get<int>() > 0;
        } else {
            pass = false;
        }
    }
    if (wants("measure")) {
        Cylinder cyl = cylinder(family, word, a.samples, derive_seed(a.seed, 31));
        StageResult m = guarded_stage([&](StageResult& r) {
            require(!cyl.empty && !cyl.polys.empty(), "degenerate-set",
                    "measure check needs a nonempty cylinder with geometry");
            // split the first cylinder cell along its longest axis
            const Polytope& poly = cyl.polys.front();
            double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
            for (Vec v : poly.verts) {
                lx0 = std::min(lx0, v.x);
                lx1 = std::max(lx1, v.x);
                ly0 = std::min(ly0, v.y);
                ly1 = std::max(ly1, v.y);
            }
            bool split_x = family.dim() == 1 || (lx1 - lx0) >= (ly1 - ly0);
            double mid = split_x ? 0.5 * (lx0 + lx1) : 0.5 * (ly0 + ly1);
            Region a1, a2;
            if (family.dim() == 1) {
                a1.polys.push_back(make_interval(lx0, mid));
                a2.polys.push_back(make_interval(mid, lx1));
            } else {
                Vec n = split_x ? Vec{1, 0} : Vec{0, 1};
                Polytope c1 = clip_halfplane(poly, n, mid);
                Polytope c2 = clip_halfplane(poly, -1.0 * n, -mid);
                require(c1.volume() > 0 && c2.volume() > 0, "degenerate-set",
                        "cylinder split produced an empty half");
                a1.polys.push_back(c1);
                a2.polys.push_back(c2);
            }
            MeasureRatioReport mr = measure_ratio_check(family, word, a1, a2, 40000,
                                                        sheet.L2.value,
                                                        derive_seed(a.seed, 72));
            r.json = measure_ratio_to_json(mr);
            r.pass = mr.pass;
        });
        report["measure_ratio"] = m.json;
        pass = pass && m.pass;
    }
    if (wants("ball")) {
        // dynamical ball check anchored at a sampled interior point of the cylinder
        StageResult b = guarded_stage([&](StageResult& r) {
            Cylinder cyl = cylinder(family, word, a.samples, derive_seed(a.seed, 31));
            require(!cyl.samples.empty(), "degenerate-set",
                    "ball check needs cylinder sample points");
            Vec x = cyl.samples.front();
            SymbolStream stream = fixed_periodic_stream(word);
            DynamicalBallReport db = dynamical_ball_check(
                family, x, stream, static_cast<int>(word.length()), sheet.r.value, c,
                256, derive_seed(a.seed, 73));
            r.json = dynamical_ball_to_json(db);
            r.pass = db.pass;
        });
        report["dynamical_ball"] = b.json;
        pass = pass && b.pass;
    }
    report["pass"] = pass;
    if (!a.json.empty()) write_text(a.json, dump_report(report));
    std::printf("cylinder [%s]: %s\n", a.word.c_str(), pass ? "pass" : "FAIL");
    return pass ? 0 : 1;
}

int cmd_transitivity(const TransitivityArgs& a) {
    MapFamily family = load_family(a.family);
    StageResult res =
        run_transitivity_stage(family, a.depth, a.eps, a.probes, a.samples,
                               a.cycle_samples, a.cycle_depth, a.seed);
    Json report{{"schema_version", kSchemaVersion},
                {"command", "transitivity"},
                {"config", Json{{"family", a.family},
                                {"depth", a.depth},
                                {"eps", a.eps},
                                {"probes", a.probes},
                                {"samples", a.samples},
                                {"cycle_samples", a.cycle_samples},
                                {"cycle_depth", a.cycle_depth},
                                {"seed", a.seed}}}};
    report.update(res.json);
    if (!a.json.empty()) write_text(a.json, dump_report(report));
    if (res.json.contains("matrix"))
        std::printf("reachability: %s\n",
                    res.json["matrix"]["all_true"].get<bool>() ? "all pairs" : "INCOMPLETE");
    if (res.json.contains("backward_density"))
        std::printf("backward density coverage: %s\n",
                    fmt(res.json["backward_density"]["coverage"].get<double>()).c_str());
    if (res.json.contains("weak_cycle"))
        std::printf("weak cycle hit fraction: %s%s\n",
                    fmt(res.json["weak_cycle"]["hit_fraction"].get<double>()).c_str(),
                    res.json["weak_cycle"]["flagged"].get<bool>() ? " (FLAGGED)" : "");
    std::printf("transitivity: %s\n", res.pass ? "pass" : "FAIL");
    return res.pass ? 0 : 1;
}

int cmd_ergodicity(const ErgodicityArgs& a) {
    MapFamily family = load_family(a.family);
    ErgodicityParams p;
    p.starts = a.starts;
    p.steps = a.steps;
    if (a.stream == "iid")
        p.stream = StreamChoice::IidUniform;
    else if (a.stream == "itinerary")
        p.stream = StreamChoice::ItineraryDriven;
    else
        fail("bad-parameter", "--stream must be iid or itinerary");
    p.dither = a.no_dither ? 0.0 : a.dither;
    p.boxes = a.boxes;
    p.probe_grid = a.probe_grid;
    p.probe_rounds = a.probe_rounds;

    StageResult res = run_ergodicity_stage(family, p, a.seed, a.csv);
    Json report{{"schema_version", kSchemaVersion},
                {"command", "ergodicity"},
                {"config", Json{{"family", a.family},
                                {"starts", a.starts},
                                {"steps", a.steps},
                                {"stream", a.stream},
                                {"seed", a.seed},
                                {"dither", p.dither},
                                {"boxes", a.boxes},
                                {"probe_grid", a.probe_grid},
                                {"probe_rounds", a.probe_rounds}}}};
    report.update(res.json);
    if (!a.json.empty()) write_text(a.json, dump_report(report));
    if (res.json.contains("experiment")) {
        const Json& exp = res.json["experiment"];
        for (const Json& f : exp["findings"])
            std::printf("  %-12s mean=%s std=%s dev=%s %s\n",
                        f["observable"].get<std::string>().c_str(),
                        fmt(f["mean"].get<double>()).c_str(),
                        fmt(f["cross_std"].get<double>()).c_str(),
                        fmt(f["deviation"].get<double>()).c_str(),
                        f["pass"].get<bool>() ? "ok" : "FAIL");
    }
    std::printf("ergodicity: %s\n", res.pass ? "pass" : "FAIL");
    return res.pass ? 0 : 1;
}

const char* kStageOrder[] = {"conditions", "expansion", "cylinders", "transitivity",
                             "ergodicity"};

int cmd_run(const std::string& config_path) {
    Json config = read_json_file(config_path);
    require(config.is_object(), "bad-parameter", "config: must be a JSON object");
    require(config.contains("seed") && config["seed"].is_number_integer(),
            "bad-parameter", "config.seed: required (integer, no ambient randomness)");
    require(config.contains("family") && config["family"].is_object(), "bad-parameter",
            "config.family: required object (builder params, file, or inline family)");
    require(config.contains("experiments") && config["experiments"].is_array(),
            "bad-parameter", "config.experiments: required array of stage names");

    std::uint64_t seed = config["seed"].get<std::uint64_t>();
    bool requested[5] = {false, false, false, false, false};
    {
        int i = 0;
        for (const Json& s : config["experiments"]) {
            require(s.is_string(), "bad-parameter",
                    "config.experiments[" + std::to_string(i) + "]: expected a string");
            std::string name = s.get<std::string>();
            bool known = false;
            for (int k = 0; k < 5; ++k)
                if (name == kStageOrder[k]) {
                    requested[k] = true;
                    known = true;
                }
            require(known, "bad-parameter",
                    "config.experiments[" + std::to_string(i) + "]: unknown stage '" +
                        name + "'");
            ++i;
        }
    }

    const Json& fam_cfg = config["family"];
    MapFamily family = fam_cfg.value("kind", "") == "family"
                           ? family_from_json(fam_cfg)
                           : family_from_config(fam_cfg);

    std::optional<double> c_override, eps0_override;
    if (config.contains("constants")) {
        const Json& k = config["constants"];
        require(k.is_object(), "bad-parameter", "config.constants: must be an object");
        if (k.contains("c")) c_override = k["c"].get<double>();
        if (k.contains("epsilon0")) eps0_override = k["epsilon0"].get<double>();
    }

    Json exp_cfg = config.value("expansion", Json::object());
    Json cyl_cfg = config.value("cylinders", Json::object());
    Json tra_cfg = config.value("transitivity", Json::object());
    Json erg_cfg = config.value("ergodicity", Json::object());

    int exp_starts = exp_cfg.value("starts", 8);
    std::int64_t exp_horizon = exp_cfg.value("horizon", std::int64_t{10000});

    Word cyl_word = cyl_cfg.contains("word")
                        ? word_from_json(cyl_cfg["word"], family.size())
                        : Word{{0, family.size() > 1 ? 1 : 0, 0}, family.size()};
    int cyl_samples = cyl_cfg.value("samples", 100000);
    int cyl_pairs = cyl_cfg.value("pairs", 1000);

    int tra_depth = tra_cfg.value("depth", 8);
    double tra_eps = tra_cfg.value("eps", 0.05);
    int tra_probes = tra_cfg.value("probes", 1000);
    int tra_samples = tra_cfg.value("samples", 16);
    int tra_cycle_samples = tra_cfg.value("cycle_samples", 200);
    int tra_cycle_depth = tra_cfg.value("cycle_depth", 10);

    ErgodicityParams ep;
    ep.starts = erg_cfg.value("starts", 20);
    ep.steps = erg_cfg.value("steps", std::int64_t{1000000});
    std::string erg_stream = erg_cfg.value("stream", "iid");
    require(erg_stream == "iid" || erg_stream == "itinerary", "bad-parameter",
            "config.ergodicity.stream: must be 'iid' or 'itinerary'");
    ep.stream = erg_stream == "iid" ? StreamChoice::IidUniform
                                    : StreamChoice::ItineraryDriven;
    ep.dither = erg_cfg.value("dither", true) ? kDefaultDither : 0.0;
    ep.boxes = erg_cfg.value("boxes", 16);
    ep.probe_grid = erg_cfg.value("probe_grid", 0);
    ep.probe_rounds = erg_cfg.value("probe_rounds", 4096);

    Json resolved = config;
    resolved["expansion"] = Json{{"starts", exp_starts}, {"horizon", exp_horizon}};
    resolved["cylinders"] = Json{{"word", cyl_word.symbols},
                                 {"samples", cyl_samples},
                                 {"pairs", cyl_pairs}};
    resolved["transitivity"] = Json{{"depth", tra_depth},
                                    {"eps", tra_eps},
                                    {"probes", tra_probes},
                                    {"samples", tra_samples},
                                    {"cycle_samples", tra_cycle_samples},
                                    {"cycle_depth", tra_cycle_depth}};
    resolved["ergodicity"] = Json{{"starts", ep.starts},
                                  {"steps", ep.steps},
                                  {"stream", erg_stream},
                                  {"dither", ep.dither != 0.0},
                                  {"boxes", ep.boxes},
                                  {"probe_grid", ep.probe_grid},
                                  {"probe_rounds", ep.probe_rounds}};

    Json report{{"schema_version", kSchemaVersion},
                {"command", "run"},
                {"config", resolved},
                {"stages", Json::object()}};

    bool all_pass = true;
    bool any = false;
    // stages that consume constants force the conditions stage to have run;
    // its verdict only gates the exit code when it was itself requested
    bool need_sheet = requested[1] || requested[2];
    ConditionsOutcome cond;
    if (requested[0] || need_sheet) {
        ConstantsOptions opts;
        opts.c_override = c_override;
        opts.seed = derive_seed(seed, 1);
        cond = run_conditions_stage(family, opts, eps0_override);
        if (requested[0]) {
            report["stages"]["conditions"] = cond.result.json;
            all_pass = all_pass && cond.result.pass;
            any = true;
            std::printf("conditions    %s\n", cond.result.pass ? "pass" : "FAIL");
        }
    }
    if (requested[1]) {
        StageResult r = cond.sheet_valid
                            ? run_expansion_stage(family, cond.sheet, exp_starts,
                                                  exp_horizon, derive_seed(seed, 2))
                            : guarded_stage([&](StageResult& s) {
                                  fail("bad-constants", "constants sheet unavailable");
                              });
        report["stages"]["expansion"] = r.json;
        all_pass = all_pass && r.pass;
        any = true;
        std::printf("expansion     %s\n", r.pass ? "pass" : "FAIL");
    }
    if (requested[2]) {
        StageResult r = cond.sheet_valid
                            ? run_cylinders_stage(family, cond.sheet, cyl_word,
                                                  cyl_samples, cyl_pairs,
                                                  derive_seed(seed, 3))
                            : guarded_stage([&](StageResult& s) {
                                  fail("bad-constants", "constants sheet unavailable");
                              });
        report["stages"]["cylinders"] = r.json;
        all_pass = all_pass && r.pass;
        any = true;
        std::printf("cylinders     %s\n", r.pass ? "pass" : "FAIL");
    }
    if (requested[3]) {
        StageResult r = run_transitivity_stage(family, tra_depth, tra_eps, tra_probes,
                                               tra_samples, tra_cycle_samples,
                                               tra_cycle_depth, derive_seed(seed, 4));
        report["stages"]["transitivity"] = r.json;
        all_pass = all_pass && r.pass;
        any = true;
        std::printf("transitivity  %s\n", r.pass ? "pass" : "FAIL");
    }
    if (requested[4]) {
        StageResult r = run_ergodicity_stage(family, ep, derive_seed(seed, 5),
                                             config.value("csv", ""));
        report["stages"]["ergodicity"] = r.json;
        all_pass = all_pass && r.pass;
        any = true;
        std::printf("ergodicity    %s\n", r.pass ? "pass" : "FAIL");
    }
    if (!any) report["note"] = "no experiments requested";
    report["pass"] = all_pass;

    std::string out_path = config.value("output", "");
    write_or_print(out_path, report);
    if (!out_path.empty())
        std::printf("run: %s (report: %s)\n", all_pass ? "pass" : "FAIL",
                    out_path.c_str());
    return all_pass ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"simulation and verification toolkit for finitely generated "
                 "semigroup actions of piecewise differentiable maps"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker count (overrides ERGOLAB_THREADS)");

    BuildArgs build_args;
    CLI::App* build = app.add_subcommand("build", "construct a bundled family and write it to JSON");
    build->add_option("--builder", build_args.builder,
                      "expanding | mostly-expanding | perturbed-doubling | "
                      "invariant-arcs | rotation | torus2-doubling")
        ->capture_default_str();
    build->add_option("--space", build_args.space, "torus1 | torus2 | triangle")
        ->capture_default_str();
    build->add_option("--depth", build_args.depth, "subdivision depth m")
        ->capture_default_str();
    build->add_option("--beta", build_args.beta, "contraction parameter (mostly-expanding)")
        ->capture_default_str();
    build->add_option("--amplitude", build_args.amplitude,
                      "perturbation amplitude (perturbed-doubling)")
        ->capture_default_str();
    build->add_option("--out", build_args.out, "output family file")->required();

    CheckArgs check_args;
    CLI::App* check = app.add_subcommand("check", "verify the partition/Markov/expansion conditions and assemble constants");
    check->add_option("--family", check_args.family, "family JSON file")->required();
    check->add_option("--report", check_args.report, "write the full report here");
    CLI::Option* copt = check->add_option("--c", check_args.c, "expansion rate override");
    CLI::Option* eopt = check->add_option("--epsilon0", check_args.epsilon0,
                                          "hyperbolic-time density override");
    check->add_option("--samples", check_args.samples, "Monte Carlo samples per check")
        ->capture_default_str();
    check->add_option("--radius-configs", check_args.radius_configs,
                      "configurations for the contraction-radius estimate")
        ->capture_default_str();
    check->add_flag("--no-radius", check_args.no_radius, "skip the radius estimate");
    check->add_option("--seed", check_args.seed, "RNG seed")->capture_default_str();

    OrbitArgs orbit_args;
    CLI::App* orbit = app.add_subcommand("orbit", "simulate one orbital branch and its hyperbolic times");
    orbit->add_option("--family", orbit_args.family, "family JSON file")->required();
    orbit->add_option("--start", orbit_args.start, "start point, comma-separated coords")
        ->required();
    orbit->add_option("--steps", orbit_args.steps, "orbit length")->capture_default_str();
    CLI::Option* oc = orbit->add_option("--c", orbit_args.c,
                                        "expansion rate for hyperbolic times");
    orbit->add_option("--stream", orbit_args.stream, "itinerary | iid | word")
        ->capture_default_str();
    orbit->add_option("--word", orbit_args.word, "periodic word for --stream word");
    orbit->add_option("--seed", orbit_args.seed, "RNG seed")->capture_default_str();
    orbit->add_option("--dither", orbit_args.dither, "per-step dither amplitude");
    orbit->add_flag("--default-dither", orbit_args.default_dither,
                    "use the default 2^-48 dither");
    orbit->add_option("--csv", orbit_args.csv, "write the orbit as CSV");
    orbit->add_option("--json", orbit_args.json, "write the orbit report as JSON");

    CylinderArgs cyl_args;
    CLI::App* cyl = app.add_subcommand("cylinder", "compute a cylinder and check contraction/distortion bounds");
    cyl->add_option("--family", cyl_args.family, "family JSON file")->required();
    cyl->add_option("--word", cyl_args.word, "cylinder word, comma-separated symbols")
        ->required();
    CLI::Option* cc = cyl->add_option("--c", cyl_args.c, "expansion rate");
    cyl->add_option("--check", cyl_args.checks,
                    "comma list of diameter, distortion, measure, ball")
        ->capture_default_str();
    cyl->add_option("--samples", cyl_args.samples, "cylinder sampling budget")
        ->capture_default_str();
    cyl->add_option("--pairs", cyl_args.pairs, "point pairs for the distortion check")
        ->capture_default_str();
    cyl->add_option("--seed", cyl_args.seed, "RNG seed")->capture_default_str();
    cyl->add_option("--json", cyl_args.json, "write the report as JSON");

    TransitivityArgs tra_args;
    CLI::App* tra = app.add_subcommand("transitivity", "reachability matrix, backward-orbit density, weak cycle test");
    tra->add_option("--family", tra_args.family, "family JSON file")->required();
    tra->add_option("--depth", tra_args.depth, "composition depth")->capture_default_str();
    tra->add_option("--eps", tra_args.eps, "density radius")->capture_default_str();
    tra->add_option("--probes", tra_args.probes, "density probe points")
        ->capture_default_str();
    tra->add_option("--samples", tra_args.samples, "start samples per region")
        ->capture_default_str();
    tra->add_option("--cycle-samples", tra_args.cycle_samples, "weak cycle sample count")
        ->capture_default_str();
    tra->add_option("--cycle-depth", tra_args.cycle_depth, "weak cycle tree depth")
        ->capture_default_str();
    tra->add_option("--seed", tra_args.seed, "RNG seed")->capture_default_str();
    tra->add_option("--json", tra_args.json, "write the report as JSON");

    ErgodicityArgs erg_args;
    CLI::App* erg = app.add_subcommand("ergodicity", "cross-start Birkhoff averages, equidistribution, invariant-set probe");
    erg->add_option("--family", erg_args.family, "family JSON file")->required();
    erg->add_option("--starts", erg_args.starts, "number of start points")
        ->capture_default_str();
    erg->add_option("--steps", erg_args.steps, "orbit length per start")
        ->capture_default_str();
    erg->add_option("--stream", erg_args.stream, "iid | itinerary")->capture_default_str();
    erg->add_option("--seed", erg_args.seed, "RNG seed")->capture_default_str();
    erg->add_flag("--no-dither", erg_args.no_dither, "disable the anti-collapse dither");
    erg->add_option("--boxes", erg_args.boxes, "equidistribution mesh resolution (0 = skip)")
        ->capture_default_str();
    erg->add_option("--probe-grid", erg_args.probe_grid,
                    "invariant-set probe resolution (0 = skip)")
        ->capture_default_str();
    erg->add_option("--probe-rounds", erg_args.probe_rounds, "probe iteration cap")
        ->capture_default_str();
    erg->add_option("--json", erg_args.json, "write the report as JSON");
    erg->add_option("--csv", erg_args.csv, "write per-start averages as CSV");

    std::string config_path;
    CLI::App* runcmd = app.add_subcommand("run", "execute a configured pipeline of stages");
    runcmd->add_option("--config", config_path, "experiment config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (threads > 0) {
        std::string v = std::to_string(threads);
        setenv("ERGOLAB_THREADS", v.c_str(), 1);
    }
    check_args.has_c = copt->count() > 0;
    check_args.has_eps0 = eopt->count() > 0;
    orbit_args.has_c = oc->count() > 0;
    cyl_args.has_c = cc->count() > 0;

    try {
        if (build->parsed()) return cmd_build(build_args);
        if (check->parsed()) return cmd_check(check_args);
        if (orbit->parsed()) return cmd_orbit(orbit_args);
        if (cyl->parsed()) return cmd_cylinder(cyl_args);
        if (tra->parsed()) return cmd_transitivity(tra_args);
        if (erg->parsed()) return cmd_ergodicity(erg_args);
        if (runcmd->parsed()) return cmd_run(config_path);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}

}  // namespace ergolab::cli
