#include "ergolab/serialize.hpp"

#include <cstdio>
#include <fstream>

namespace ergolab {

namespace {

Json vec_to_json(Vec v, int dim) {
    Json j = Json::array();
    j.push_back(v.x);
    if (dim == 2) j.push_back(v.y);
    return j;
}

Vec vec_from_json(const Json& j) {
    require(j.is_array() && !j.empty(), "bad-parameter", "point must be an array");
    Vec v{j[0].get<double>(), 0.0};
    if (j.size() > 1) v.y = j[1].get<double>();
    return v;
}

Json poly_to_json(const Polytope& p) {
    Json j = Json::array();
    for (Vec v : p.verts) j.push_back(vec_to_json(v, p.dim));
    return j;
}

Polytope poly_from_json(const Json& j, int dim) {
    std::vector<Vec> verts;
    for (const Json& v : j) verts.push_back(vec_from_json(v));
    if (dim == 1) {
        require(verts.size() == 2, "bad-parameter", "interval needs two endpoints");
        return make_interval(verts[0].x, verts[1].x);
    }
    return make_polygon(verts);
}

Json space_to_json(const PhaseSpace& space) {
    Json j;
    switch (space.kind) {
        case SpaceKind::Torus1:
            j["kind"] = "torus1";
            break;
        case SpaceKind::Torus2:
            j["kind"] = "torus2";
            break;
        default: {
            j["kind"] = "complex";
            Json simplices = Json::array();
            for (const Simplex& s : space.complex) {
                Json verts = Json::array();
                for (Vec v : s.verts) verts.push_back(vec_to_json(v, space.dim));
                simplices.push_back(verts);
            }
            j["simplices"] = simplices;
        }
    }
    return j;
}

PhaseSpace space_from_json(const Json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "torus1") return torus_space(1);
    if (kind == "torus2") return torus_space(2);
    require(kind == "complex", "bad-parameter", "unknown space kind: " + kind);
    std::vector<Simplex> simplices;
    for (const Json& sv : j.at("simplices")) {
        Simplex s;
        for (const Json& v : sv) s.verts.push_back(vec_from_json(v));
        s.dim = static_cast<int>(s.verts.size()) - 1;
        simplices.push_back(std::move(s));
    }
    return simplex_complex_space(simplices);
}

}  // namespace

Json family_to_json(const MapFamily& family) {
    Json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "family";
    doc["space"] = space_to_json(family.space());
    doc["p"] = family.p;
    doc["q"] = family.q;

    Json regions = Json::array();
    for (const Region& r : family.partition.regions) {
        Json polys = Json::array();
        for (const Polytope& p : r.polys) polys.push_back(poly_to_json(p));
        regions.push_back(Json{{"polys", polys}});
    }
    doc["partition"] = Json{{"regions", regions}};

    Json maps = Json::array();
    for (const SmoothMap& f : family.maps) {
        Json m;
        m["kind"] = f.is_affine() ? "affine" : "perturbed";
        m["name"] = f.name;
        m["chart"] = f.chart_region;
        if (!f.is_affine()) m["perturb_amp"] = f.perturb_amp;
        m["alpha"] = f.alpha;
        m["c0"] = f.C0;
        Json pieces = Json::array();
        for (const AffinePiece& piece : f.pieces) {
            Json pj;
            pj["domain"] = poly_to_json(piece.domain);
            pj["matrix"] = Json::array({piece.map.L.a, piece.map.L.b, piece.map.L.c,
                                        piece.map.L.d});
            pj["offset"] = vec_to_json(piece.map.t, 2);
            pieces.push_back(pj);
        }
        m["pieces"] = pieces;
        maps.push_back(m);
    }
    doc["maps"] = maps;
    return doc;
}

MapFamily family_from_json(const Json& doc) {
    require(doc.value("kind", "") == "family", "bad-parameter",
            "document is not a family file");
    MapFamily family;
    PhaseSpace space = space_from_json(doc.at("space"));
    family.partition.space = space;
    family.p = doc.at("p").get<int>();
    family.q = doc.at("q").get<int>();

    for (const Json& rj : doc.at("partition").at("regions")) {
        Region r;
        for (const Json& pj : rj.at("polys"))
            r.polys.push_back(poly_from_json(pj, space.dim));
        family.partition.regions.push_back(std::move(r));
    }

    for (const Json& mj : doc.at("maps")) {
        SmoothMap f;
        f.name = mj.value("name", "");
        f.dim = space.dim;
        f.mod1 = space.kind != SpaceKind::SimplexComplex;
        f.chart_region = mj.value("chart", -1);
        f.perturb_amp = mj.value("perturb_amp", 0.0);
        f.alpha = mj.value("alpha", 1.0);
        f.C0 = mj.value("c0", 0.0);
        for (const Json& pj : mj.at("pieces")) {
            AffinePiece piece;
            piece.domain = poly_from_json(pj.at("domain"), space.dim);
            const Json& L = pj.at("matrix");
            piece.map.L = Mat{L[0].get<double>(), L[1].get<double>(), L[2].get<double>(),
                              L[3].get<double>()};
            piece.map.t = vec_from_json(pj.at("offset"));
            f.pieces.push_back(std::move(piece));
        }
        family.maps.push_back(std::move(f));
    }
    family.validate();
    return family;
}

MapFamily family_from_config(const Json& config) {
    if (config.contains("file"))
        return family_from_json(read_json_file(config.at("file").get<std::string>()));
    std::string builder = config.value("builder", "");
    require(!builder.empty(), "bad-parameter", "family config needs builder or file");
    if (builder == "expanding") {
        std::string sp = config.value("space", "torus1");
        int depth = config.value("depth", 1);
        if (sp == "torus1") return build_expanding_family(torus_space(1), depth);
        if (sp == "torus2") return build_expanding_family(torus_space(2), depth);
        if (sp == "triangle") {
            Simplex tri{2, {{0, 0}, {1, 0}, {0, 1}}};
            return build_expanding_family(simplex_complex_space({tri}), depth);
        }
        fail("bad-parameter", "unknown space for expanding builder: " + sp);
    }
    if (builder == "mostly-expanding") {
        Simplex tri{2, {{0, 0}, {1, 0}, {0, 1}}};
        return build_mostly_expanding_family(simplex_complex_space({tri}),
                                             config.value("beta", 0.5));
    }
    if (builder == "perturbed-doubling")
        return perturbed_doubling_family(config.value("amplitude", 0.01));
    if (builder == "invariant-arcs") return invariant_arcs_control_family();
    if (builder == "rotation") return rotation_control_family();
    if (builder == "torus2-doubling") return torus2_doubling_family();
    fail("bad-parameter", "unknown builder: " + builder);
}

void quantize_floats(Json& doc) {
    if (doc.is_object() || doc.is_array()) {
        for (Json& child : doc) quantize_floats(child);
    } else if (doc.is_number_float()) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.15g", doc.get<double>());
        doc = std::strtod(buf, nullptr);
    }
}

std::string dump_report(Json doc) {
    quantize_floats(doc);
    return doc.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "bad-parameter", "cannot open for writing: " + path);
    out << content;
    require(out.good(), "bad-parameter", "write failed: " + path);
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "bad-parameter", "cannot open: " + path);
    Json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail("bad-parameter", std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return doc;
}

Json tagged_to_json(const TaggedValue& v) {
    Json j;
    j["value"] = v.value;
    j["provenance"] = v.provenance();
    return j;
}

Json constants_to_json(const ConstantsSheet& sheet) {
    Json j;
    j["sigma1"] = tagged_to_json(sheet.sigma1);
    j["sigma2"] = tagged_to_json(sheet.sigma2);
    j["c"] = tagged_to_json(sheet.c);
    if (sheet.epsilon0)
        j["epsilon0"] = tagged_to_json(*sheet.epsilon0);
    else
        j["epsilon0"] = nullptr;
    j["K1"] = tagged_to_json(sheet.K1);
    j["K2"] = tagged_to_json(sheet.K2);
    j["C0"] = tagged_to_json(sheet.C0);
    j["alpha"] = tagged_to_json(sheet.alpha);
    j["L1"] = tagged_to_json(sheet.L1);
    j["L2"] = tagged_to_json(sheet.L2);
    j["r"] = tagged_to_json(sheet.r);
    j["not_expanding"] = sheet.not_expanding;
    return j;
}

Json partition_report_to_json(const PartitionReport& rep) {
    Json j;
    j["open"] = rep.open_ok;
    j["disjoint"] = rep.disjoint_ok;
    j["covers"] = rep.covers_ok;
    j["measure_total"] = rep.measure_total;
    j["pass"] = rep.pass();
    if (rep.disjoint_witness) j["disjoint_witness"] = vec_to_json(*rep.disjoint_witness, 2);
    if (rep.cover_witness) j["cover_witness"] = vec_to_json(*rep.cover_witness, 2);
    return j;
}

Json markov_to_json(const MarkovReport& rep) {
    Json j;
    j["k"] = rep.k;
    j["exact"] = rep.exact;
    j["pass"] = rep.pass;
    Json rows = Json::array();
    for (int i = 0; i < rep.k; ++i) {
        Json row = Json::array();
        for (int jj = 0; jj < rep.k; ++jj) {
            switch (rep.at(i, jj)) {
                case MarkovStatus::Disjoint:
                    row.push_back("disjoint");
                    break;
                case MarkovStatus::Contains:
                    row.push_back("contains");
                    break;
                default:
                    row.push_back("VIOLATION");
            }
        }
        rows.push_back(row);
    }
    j["status"] = rows;
    Json viol = Json::array();
    for (auto [a, b] : rep.violations) viol.push_back(Json::array({a, b}));
    j["violations"] = viol;
    return j;
}

Json sigma_to_json(const SigmaReport& rep) {
    Json j;
    j["sigma1"] = rep.sigma1;
    j["sigma2"] = rep.sigma2;
    j["exact"] = rep.exact;
    j["samples"] = rep.samples;
    j["not_expanding"] = rep.not_expanding;
    return j;
}

Json orbit_to_json(const OrbitRecord& rec, std::size_t max_points) {
    Json j;
    j["start"] = vec_to_json(rec.start, 2);
    j["steps"] = rec.steps();
    j["truncated"] = rec.truncated;
    if (!rec.error_token.empty()) j["error"] = rec.error_token;
    Json pts = Json::array(), symbols = Json::array(), a = Json::array(),
         regions = Json::array();
    std::size_t n = std::min(rec.steps(), max_points);
    for (std::size_t i = 0; i < n; ++i) {
        pts.push_back(vec_to_json(rec.points[i], 2));
        symbols.push_back(rec.symbols.symbols[i]);
        a.push_back(rec.a[i]);
        regions.push_back(rec.regions[i]);
    }
    j["points"] = pts;
    j["symbols"] = symbols;
    j["a"] = a;
    j["regions"] = regions;
    return j;
}

Json hyperbolic_times_to_json(const HyperbolicTimeSet& times, std::size_t max_times) {
    Json j;
    j["c"] = times.c;
    j["horizon"] = times.horizon;
    j["count"] = times.times.size();
    Json t = Json::array();
    for (std::size_t i = 0; i < std::min(times.times.size(), max_times); ++i)
        t.push_back(times.times[i]);
    j["times"] = t;
    return j;
}

Json cylinder_to_json(const Cylinder& cyl, std::size_t max_samples) {
    Json j;
    Json w = Json::array();
    for (int s : cyl.word.symbols) w.push_back(s);
    j["word"] = w;
    j["exact"] = cyl.exact;
    j["empty"] = cyl.empty;
    j["emptiness_certain"] = cyl.emptiness_certain;
    j["volume"] = cyl.raw_volume();
    if (cyl.exact) {
        Json polys = Json::array();
        for (const Polytope& p : cyl.polys) polys.push_back(poly_to_json(p));
        j["polys"] = polys;
    }
    Json samples = Json::array();
    for (std::size_t i = 0; i < std::min(cyl.samples.size(), max_samples); ++i)
        samples.push_back(vec_to_json(cyl.samples[i], 2));
    j["samples"] = samples;
    j["sample_count"] = cyl.samples.size();
    return j;
}

Json diameter_decay_to_json(const DiameterDecayReport& rep) {
    Json j;
    j["pass"] = rep.pass;
    Json rows = Json::array();
    for (const DiameterDecayRow& r : rep.rows)
        rows.push_back(Json{{"j", r.j},
                            {"diameter", r.diameter},
                            {"bound", r.bound},
                            {"ok", r.ok}});
    j["rows"] = rows;
    return j;
}

Json measure_ratio_to_json(const MeasureRatioReport& rep) {
    Json j;
    j["m1"] = rep.m1;
    j["m2"] = rep.m2;
    j["image_m1"] = rep.im1;
    j["image_m2"] = rep.im2;
    j["ratio"] = rep.ratio;
    j["image_ratio"] = rep.image_ratio;
    j["L2"] = rep.L2;
    j["stat_tol"] = rep.stat_tol;
    j["pass"] = rep.pass;
    return j;
}

Json dynamical_ball_to_json(const DynamicalBallReport& rep) {
    Json j;
    j["escapes"] = rep.escapes;
    j["checked"] = rep.checked;
    j["membership_ok"] = rep.membership_ok;
    j["norm_comparison_ok"] = rep.eq5_ok;
    j["pass"] = rep.pass;
    Json rows = Json::array();
    for (const DynamicalBallRow& r : rep.rows)
        rows.push_back(Json{{"j", r.j},
                            {"max_backward_norm", r.max_backward_norm},
                            {"bound", r.bound},
                            {"ok", r.ok}});
    j["rows"] = rows;
    return j;
}

Json transitivity_to_json(const TransitivityMatrix& mat) {
    Json j;
    j["k"] = mat.k;
    j["depth"] = mat.depth;
    j["all_true"] = mat.all_true;
    Json rows = Json::array();
    for (int i = 0; i < mat.k; ++i) {
        Json row = Json::array();
        for (int c = 0; c < mat.k; ++c) row.push_back(mat.at(i, c));
        rows.push_back(row);
    }
    j["reach"] = rows;
    return j;
}

Json weak_cycle_to_json(const WeakCycleReport& rep) {
    Json j;
    j["samples"] = rep.samples;
    j["depth"] = rep.depth;
    j["hits"] = rep.hits;
    j["hit_fraction"] = rep.hit_fraction;
    j["flagged"] = rep.flagged;
    Json certs = Json::array();
    for (const Word& w : rep.certificates) {
        Json cw = Json::array();
        for (int s : w.symbols) cw.push_back(s);
        certs.push_back(cw);
    }
    j["certificates"] = certs;
    return j;
}

Json contractivity_to_json(const ContractivityReport& rep) {
    Json j;
    j["rho0"] = rep.rho0;
    j["rate"] = rep.rate;
    j["contractive_evidence"] = rep.contractive_evidence;
    Json rows = Json::array();
    for (const ContractivityRow& r : rep.rows) {
        Json word = Json::array();
        for (int s : r.best_word) word.push_back(s);
        rows.push_back(Json{{"depth", r.depth},
                            {"best_diameter", r.best_diameter},
                            {"best_word", word}});
    }
    j["rows"] = rows;
    return j;
}

Json ergodicity_to_json(const ErgodicityReport& rep) {
    Json j;
    j["horizon"] = rep.horizon;
    j["starts"] = rep.starts;
    j["stream"] = rep.stream;
    j["seed"] = rep.seed;
    j["tol"] = rep.tol;
    j["dither"] = rep.dither;
    j["truncated_orbits"] = rep.truncated_orbits;
    j["pass"] = rep.pass;
    j["note"] =
        "statistical falsification of the ergodicity conclusion; a pass is "
        "evidence, not proof";
    Json findings = Json::array();
    for (const ObservableFinding& f : rep.findings) {
        Json fj;
        fj["observable"] = f.name;
        fj["mean"] = f.mean;
        fj["cross_std"] = f.cross_std;
        fj["integral"] = f.integral;
        fj["integral_exact"] = f.integral_exact;
        fj["deviation"] = f.deviation;
        fj["pass"] = f.pass;
        Json avgs = Json::array();
        for (double a : f.averages) avgs.push_back(a);
        fj["averages"] = avgs;
        findings.push_back(fj);
    }
    j["findings"] = findings;
    return j;
}

Json probe_to_json(const InvariantProbeReport& rep) {
    Json j;
    j["g"] = rep.g;
    j["rounds_cap"] = rep.rounds_cap;
    j["cells"] = rep.cell_count;
    j["fixpoint"] = rep.fixpoint;
    if (!rep.note.empty()) j["note"] = rep.note;
    Json spec = Json::array();
    for (double v : rep.spectrum) spec.push_back(v);
    j["spectrum"] = spec;
    j["min_measure"] = rep.min_measure;
    j["ergodic_evidence"] = rep.ergodic_evidence;
    j["minimal_set_size"] = rep.minimal_set_cells.size();
    return j;
}

Json equidistribution_to_json(const EquidistributionReport& rep) {
    Json j;
    j["cells"] = rep.cells;
    j["counted"] = rep.counted;
    j["chi2"] = rep.chi2;
    j["normalized"] = rep.normalized;
    j["truncated"] = rep.truncated;
    j["pass"] = rep.pass;
    return j;
}

}  // namespace ergolab
