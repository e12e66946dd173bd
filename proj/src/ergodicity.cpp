#include "ergolab/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "ergolab/parallel.hpp"

namespace ergolab {

namespace {

constexpr double kTwoPi = 6.283185307179586;

Polytope translate(const Polytope& p, Vec shift) {
    Polytope out = p;
    for (Vec& v : out.verts) v = v + shift;
    return out;
}

// barycentric coordinates of p in the triangle (a, b, c)
bool barycentric(const Simplex& s, Vec p, double& u, double& v) {
    Vec e1 = s.verts[1] - s.verts[0];
    Vec e2 = s.verts[2] - s.verts[0];
    double d = cross(e1, e2);
    if (std::abs(d) < 1e-15) return false;
    Vec r = p - s.verts[0];
    u = cross(r, e2) / d;
    v = cross(e1, r) / d;
    return true;
}

int triangles_per_simplex(int b) { return b * b; }

// local index of the sub-triangle of the regular b-subdivision containing
// (u, v); up triangles come first, row-major in j
int local_tri_index(int b, double u, double v) {
    if (u < -1e-12 || v < -1e-12 || u + v > 1.0 + 1e-12) return -1;
    int i = std::min(static_cast<int>(std::floor(u * b)), b - 1);
    int j = std::min(static_cast<int>(std::floor(v * b)), b - 1);
    if (i + j > b - 1) {  // numerical spill just outside the hypotenuse row
        int over = i + j - (b - 1);
        (u * b - i > v * b - j ? j : i) -= over;
        if (i < 0 || j < 0) return -1;
    }
    double fu = u * b - i, fv = v * b - j;
    bool down = fu + fv > 1.0 && i + j < b - 1;
    int up_total = b * (b + 1) / 2;
    if (!down) {
        // row j holds b - j up triangles, offset sum_{t<j} (b - t)
        int off = j * b - j * (j - 1) / 2;
        return off + i;
    }
    int off = j * (b - 1) - j * (j - 1) / 2;
    return up_total + off + i;
}

Simplex local_tri(const Simplex& top, int b, int local) {
    int up_total = b * (b + 1) / 2;
    auto at = [&](double u, double v) {
        return top.verts[0] + u * (top.verts[1] - top.verts[0]) +
               v * (top.verts[2] - top.verts[0]);
    };
    double h = 1.0 / static_cast<double>(b);
    if (local < up_total) {
        int j = 0;
        int rem = local;
        while (rem >= b - j) {
            rem -= b - j;
            ++j;
        }
        int i = rem;
        return Simplex{2,
                       {at(i * h, j * h), at((i + 1) * h, j * h), at(i * h, (j + 1) * h)}};
    }
    int rem = local - up_total;
    int j = 0;
    while (rem >= b - 1 - j) {
        rem -= b - 1 - j;
        ++j;
    }
    int i = rem;
    return Simplex{
        2, {at((i + 1) * h, j * h), at((i + 1) * h, (j + 1) * h), at(i * h, (j + 1) * h)}};
}

// image polytopes of one cell under one family member, folded onto the space
std::vector<Polytope> cell_image(const MapFamily& family, const SmoothMap& f,
                                 const Polytope& cell) {
    std::vector<Polytope> raw;
    for (const AffinePiece& piece : f.pieces) {
        Polytope dom = intersect_convex(piece.domain, cell);
        if (dom.volume() <= 1e-14) continue;
        if (f.perturb_amp == 0.0) {
            raw.push_back(affine_image(dom, piece.map));
        } else {
            auto lift = [&](double u) {
                return piece.map.L.a * u + piece.map.t.x +
                       f.perturb_amp * std::sin(kTwoPi * u);
            };
            raw.push_back(
                Polytope{1, {{lift(dom.verts[0].x), 0}, {lift(dom.verts[1].x), 0}}});
        }
    }
    // fold torus images into the fundamental domain
    const PhaseSpace& space = family.space();
    if (space.kind == SpaceKind::SimplexComplex) return raw;
    std::vector<Polytope> out;
    for (const Polytope& p : raw) {
        Vec lo, hi;
        p.bounding_box(lo, hi);
        int kx1 = std::max(static_cast<int>(std::floor(lo.x)) + 1,
                           static_cast<int>(std::ceil(hi.x)));
        int ky1 = space.dim == 2 ? std::max(static_cast<int>(std::floor(lo.y)) + 1,
                                            static_cast<int>(std::ceil(hi.y)))
                                 : 1;
        for (int kx = static_cast<int>(std::floor(lo.x)); kx < kx1; ++kx)
            for (int ky = space.dim == 2 ? static_cast<int>(std::floor(lo.y)) : 0;
                 ky < ky1; ++ky) {
                Vec corner{static_cast<double>(kx), static_cast<double>(ky)};
                Polytope cellbox =
                    space.dim == 1
                        ? Polytope{1, {{corner.x, 0}, {corner.x + 1, 0}}}
                        : make_polygon({{corner.x, corner.y},
                                        {corner.x + 1, corner.y},
                                        {corner.x + 1, corner.y + 1},
                                        {corner.x, corner.y + 1}});
                Polytope piece = intersect_convex(p, cellbox);
                if (piece.volume() > 1e-14) out.push_back(translate(piece, Vec{0, 0} - corner));
            }
    }
    return out;
}

// cell indices overlapping any of the polytopes with positive volume
std::vector<int> cells_touched(const PhaseSpace& space, int b,
                               const std::vector<Polytope>& polys) {
    std::vector<int> out;
    auto consider = [&](int idx, const Polytope& p) {
        Polytope cell = box_poly(space, b, idx);
        Polytope overlap = intersect_convex(cell, p);
        if (overlap.volume() > 1e-12 * cell.volume()) out.push_back(idx);
    };
    for (const Polytope& p : polys) {
        Vec lo, hi;
        p.bounding_box(lo, hi);
        if (space.kind == SpaceKind::Torus1) {
            int i0 = std::max(0, static_cast<int>(std::floor(lo.x * b)));
            int i1 = std::min(b - 1, static_cast<int>(std::ceil(hi.x * b)));
            for (int i = i0; i <= i1; ++i) consider(i, p);
        } else if (space.kind == SpaceKind::Torus2) {
            int i0 = std::max(0, static_cast<int>(std::floor(lo.x * b)));
            int i1 = std::min(b - 1, static_cast<int>(std::ceil(hi.x * b)));
            int j0 = std::max(0, static_cast<int>(std::floor(lo.y * b)));
            int j1 = std::min(b - 1, static_cast<int>(std::ceil(hi.y * b)));
            for (int i = i0; i <= i1; ++i)
                for (int j = j0; j <= j1; ++j) consider(i * b + j, p);
        } else {
            // candidate subcells from the barycentric bounding box of p, one
            // ring of slack for roundoff; the exact overlap test stays the same
            int per = b * b;
            int up_total = b * (b + 1) / 2;
            for (std::size_t t = 0; t < space.complex.size(); ++t) {
                const Simplex& top = space.complex[t];
                Affine chart{Mat{top.verts[1].x - top.verts[0].x,
                                 top.verts[2].x - top.verts[0].x,
                                 top.verts[1].y - top.verts[0].y,
                                 top.verts[2].y - top.verts[0].y},
                             top.verts[0]};
                Affine inv = affine_inverse(chart);
                double ulo = 2.0, uhi = -1.0, vlo = 2.0, vhi = -1.0;
                for (Vec vtx : p.verts) {
                    Vec uv = inv.apply(vtx);
                    ulo = std::min(ulo, uv.x);
                    uhi = std::max(uhi, uv.x);
                    vlo = std::min(vlo, uv.y);
                    vhi = std::max(vhi, uv.y);
                }
                if (uhi < 0.0 || vhi < 0.0 || ulo > 1.0 || vlo > 1.0) continue;
                int i0 = std::max(0, static_cast<int>(std::floor(ulo * b)) - 1);
                int i1 = std::min(b - 1, static_cast<int>(std::floor(uhi * b)) + 1);
                int j0 = std::max(0, static_cast<int>(std::floor(vlo * b)) - 1);
                int j1 = std::min(b - 1, static_cast<int>(std::floor(vhi * b)) + 1);
                for (int j = j0; j <= j1; ++j) {
                    int up_off = j * b - j * (j - 1) / 2;
                    int down_off = up_total + j * (b - 1) - j * (j - 1) / 2;
                    for (int i = i0; i <= i1; ++i) {
                        int base = static_cast<int>(t) * per;
                        if (i + j <= b - 1) consider(base + up_off + i, p);
                        if (i + j <= b - 2) consider(base + down_off + i, p);
                    }
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

std::vector<Observable> bundled_observables(const MapFamily& family) {
    const PhaseSpace& space = family.space();
    bool torus = space.kind != SpaceKind::SimplexComplex;
    std::vector<Observable> out;
    out.push_back({"one", [](Vec) { return 1.0; }, 1.0});
    out.push_back({"cos-x1", [](Vec p) { return std::cos(kTwoPi * p.x); },
                   torus ? std::optional<double>(0.0) : std::nullopt});
    out.push_back({"x1", [](Vec p) { return p.x; },
                   torus ? std::optional<double>(0.5) : std::nullopt});
    Region r0 = family.partition.regions[0];
    double mu0 = family.partition.region_measure(0);
    out.push_back({"region-0",
                   [r0](Vec p) { return r0.contains(p, 0.0) ? 1.0 : 0.0; }, mu0});
    return out;
}

BirkhoffResult birkhoff_average(const MapFamily& family, const Observable& obs, Vec x,
                                const SymbolStream& stream, std::int64_t n,
                                const IterateOptions& options) {
    require(n >= 1, "bad-parameter", "horizon must be >= 1");
    require(family.partition.locate(x, options.boundary_tol) >= 0, "boundary-start",
            "start lies on the partition skeleton");
    OrbitWalker walker(family, x, stream, options);
    OrbitWalker::Step step;
    BirkhoffResult res;
    double sum = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
        if (!walker.next(step)) {
            res.truncated = true;
            break;
        }
        sum += obs.evaluate(step.point);
        ++res.steps;
    }
    res.average = res.steps > 0 ? sum / static_cast<double>(res.steps) : 0.0;
    return res;
}

std::pair<double, double> lebesgue_integral_mc(const PhaseSpace& space,
                                               const Observable& obs, std::int64_t n,
                                               std::uint64_t seed) {
    require(n >= 1, "bad-parameter", "need at least one sample");
    RandomStream rs{derive_seed(seed, 0x6d63)};
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double v = obs.evaluate(space.sample(rs, static_cast<std::uint64_t>(i)));
        sum += v;
        sum2 += v * v;
    }
    double mean = sum / static_cast<double>(n);
    double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

ErgodicityReport ergodicity_experiment(const MapFamily& family,
                                       const std::vector<Observable>& observables,
                                       int starts, std::int64_t n, StreamChoice stream,
                                       std::uint64_t seed,
                                       const IterateOptions& options) {
    require(starts >= 2, "bad-parameter", "need at least two starts");
    require(n >= 1, "bad-parameter", "horizon must be >= 1");
    require(!observables.empty(), "bad-parameter", "no observables");

    ErgodicityReport rep;
    rep.horizon = n;
    rep.starts = starts;
    rep.stream = stream == StreamChoice::IidUniform ? "iid-uniform" : "itinerary";
    rep.seed = seed;
    rep.tol = std::max(1e-2, 6.0 / std::sqrt(static_cast<double>(n)));
    rep.dither = options.dither;

    // start points off the skeleton
    RandomStream starts_rs{derive_seed(seed, 0x737431)};
    std::vector<Vec> xs;
    std::uint64_t probe = 0;
    while (static_cast<int>(xs.size()) < starts && probe < 10000) {
        Vec x = family.space().sample(starts_rs, probe++);
        if (family.partition.locate(x, options.boundary_tol) >= 0) xs.push_back(x);
    }
    require(static_cast<int>(xs.size()) == starts, "boundary-start",
            "could not sample starts off the skeleton");

    std::size_t k = observables.size();
    std::vector<std::vector<double>> avg(static_cast<std::size_t>(starts),
                                         std::vector<double>(k, 0.0));
    std::vector<char> truncated(static_cast<std::size_t>(starts), 0);

    parallel_for(starts, [&](std::int64_t s) {
        SymbolStream sym =
            stream == StreamChoice::IidUniform
                ? iid_uniform_stream(family.size(),
                                     derive_seed(seed, 0x1000 + static_cast<std::uint64_t>(s)))
                : make_itinerary_stream(family, xs[static_cast<std::size_t>(s)]);
        IterateOptions opt = options;
        opt.dither_seed = derive_seed(options.dither_seed + seed,
                                      0x2000 + static_cast<std::uint64_t>(s));
        OrbitWalker walker(family, xs[static_cast<std::size_t>(s)], sym, opt);
        OrbitWalker::Step step;
        std::vector<double> sums(k, 0.0);
        std::int64_t steps = 0;
        for (std::int64_t j = 0; j < n; ++j) {
            if (!walker.next(step)) {
                truncated[static_cast<std::size_t>(s)] = 1;
                break;
            }
            for (std::size_t o = 0; o < k; ++o)
                sums[o] += observables[o].evaluate(step.point);
            ++steps;
        }
        for (std::size_t o = 0; o < k; ++o)
            avg[static_cast<std::size_t>(s)][o] =
                steps > 0 ? sums[o] / static_cast<double>(steps) : 0.0;
    });

    for (char t : truncated)
        if (t) ++rep.truncated_orbits;

    rep.pass = true;
    for (std::size_t o = 0; o < k; ++o) {
        ObservableFinding f;
        f.name = observables[o].name;
        for (int s = 0; s < starts; ++s)
            f.averages.push_back(avg[static_cast<std::size_t>(s)][o]);
        f.mean = std::accumulate(f.averages.begin(), f.averages.end(), 0.0) /
                 static_cast<double>(starts);
        double var = 0.0;
        for (double a : f.averages) var += (a - f.mean) * (a - f.mean);
        f.cross_std = std::sqrt(var / static_cast<double>(starts));
        if (observables[o].integral) {
            f.integral = *observables[o].integral;
            f.integral_exact = true;
        } else {
            f.integral = lebesgue_integral_mc(family.space(), observables[o],
                                              std::max<std::int64_t>(200000, n / 5),
                                              derive_seed(seed, 0x3000 + o))
                             .first;
        }
        f.deviation = std::abs(f.mean - f.integral);
        f.pass = f.cross_std < rep.tol && f.deviation < rep.tol;
        if (!f.pass) rep.pass = false;
        rep.findings.push_back(std::move(f));
    }
    return rep;
}

int box_count(const PhaseSpace& space, int b) {
    require(b >= 1, "bad-parameter", "box resolution must be >= 1");
    switch (space.kind) {
        case SpaceKind::Torus1:
            return b;
        case SpaceKind::Torus2:
            return b * b;
        default:
            return static_cast<int>(space.complex.size()) * triangles_per_simplex(b);
    }
}

int box_index(const PhaseSpace& space, int b, Vec p) {
    if (space.kind == SpaceKind::Torus1) {
        if (p.x < 0.0 || p.x >= 1.0) p = space.wrap(p);
        return std::min(b - 1, static_cast<int>(std::floor(p.x * b)));
    }
    if (space.kind == SpaceKind::Torus2) {
        p = space.wrap(p);
        int i = std::min(b - 1, static_cast<int>(std::floor(p.x * b)));
        int j = std::min(b - 1, static_cast<int>(std::floor(p.y * b)));
        return i * b + j;
    }
    for (std::size_t t = 0; t < space.complex.size(); ++t) {
        double u, v;
        if (!barycentric(space.complex[t], p, u, v)) continue;
        if (u < -1e-12 || v < -1e-12 || u + v > 1.0 + 1e-12) continue;
        int local = local_tri_index(b, u, v);
        if (local >= 0)
            return static_cast<int>(t) * triangles_per_simplex(b) + local;
    }
    return -1;
}

double box_measure(const PhaseSpace& space, int b, int idx) {
    if (space.kind == SpaceKind::Torus1) return 1.0 / static_cast<double>(b);
    if (space.kind == SpaceKind::Torus2)
        return 1.0 / static_cast<double>(b) / static_cast<double>(b);
    int per = triangles_per_simplex(b);
    const Simplex& top = space.complex[static_cast<std::size_t>(idx / per)];
    return space.normalize(top.volume() / static_cast<double>(per));
}

Polytope box_poly(const PhaseSpace& space, int b, int idx) {
    if (space.kind == SpaceKind::Torus1) {
        double h = 1.0 / static_cast<double>(b);
        return Polytope{1, {{idx * h, 0}, {(idx + 1) * h, 0}}};
    }
    if (space.kind == SpaceKind::Torus2) {
        double h = 1.0 / static_cast<double>(b);
        int i = idx / b, j = idx % b;
        return make_polygon(
            {{i * h, j * h}, {(i + 1) * h, j * h}, {(i + 1) * h, (j + 1) * h}, {i * h, (j + 1) * h}});
    }
    int per = triangles_per_simplex(b);
    Simplex tri = local_tri(space.complex[static_cast<std::size_t>(idx / per)], b,
                            idx % per);
    return tri.to_polytope();
}

InvariantProbeReport invariant_set_probe(const MapFamily& family, int g, int rounds) {
    require(g >= 16, "bad-parameter", "grid resolution must be >= 16 per dimension");
    InvariantProbeReport rep;
    rep.g = g;
    rep.rounds_cap = rounds;
    const PhaseSpace& space = family.space();
    int cells = box_count(space, g);
    rep.cell_count = cells;

    std::vector<double> measure(static_cast<std::size_t>(cells));
    for (int c = 0; c < cells; ++c)
        measure[static_cast<std::size_t>(c)] = box_measure(space, g, c);

    if (rounds == 0) {
        std::vector<double> vals = measure;
        std::sort(vals.begin(), vals.end());
        for (double v : vals)
            if (rep.spectrum.empty() || v > rep.spectrum.back() + 1e-12)
                rep.spectrum.push_back(v);
        rep.min_measure = rep.spectrum.empty() ? 0.0 : rep.spectrum.front();
        rep.note = "seeds";
        rep.minimal_set_cells = {0};
        return rep;
    }

    // cell-image graph, parallel over cells
    std::vector<std::vector<int>> succ(static_cast<std::size_t>(cells));
    parallel_for(cells, [&](std::int64_t c) {
        Polytope cell = box_poly(space, g, static_cast<int>(c));
        std::vector<int> touched;
        for (const SmoothMap& f : family.maps) {
            auto image = cell_image(family, f, cell);
            for (int idx : cells_touched(space, g, image)) touched.push_back(idx);
        }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        succ[static_cast<std::size_t>(c)] = std::move(touched);
    });

    // Tarjan condensation (iterative)
    std::vector<int> comp(static_cast<std::size_t>(cells), -1);
    {
        std::vector<int> low(static_cast<std::size_t>(cells), 0),
            num(static_cast<std::size_t>(cells), -1);
        std::vector<char> on_stack(static_cast<std::size_t>(cells), 0);
        std::vector<int> stack;
        int counter = 0, comp_count = 0;
        struct Frame {
            int v;
            std::size_t edge;
        };
        for (int root = 0; root < cells; ++root) {
            if (num[static_cast<std::size_t>(root)] >= 0) continue;
            std::vector<Frame> call{{root, 0}};
            num[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] =
                counter++;
            stack.push_back(root);
            on_stack[static_cast<std::size_t>(root)] = 1;
            while (!call.empty()) {
                Frame& fr = call.back();
                auto& edges = succ[static_cast<std::size_t>(fr.v)];
                if (fr.edge < edges.size()) {
                    int w = edges[fr.edge++];
                    if (num[static_cast<std::size_t>(w)] < 0) {
                        num[static_cast<std::size_t>(w)] =
                            low[static_cast<std::size_t>(w)] = counter++;
                        stack.push_back(w);
                        on_stack[static_cast<std::size_t>(w)] = 1;
                        call.push_back({w, 0});
                    } else if (on_stack[static_cast<std::size_t>(w)]) {
                        low[static_cast<std::size_t>(fr.v)] =
                            std::min(low[static_cast<std::size_t>(fr.v)],
                                     num[static_cast<std::size_t>(w)]);
                    }
                } else {
                    if (low[static_cast<std::size_t>(fr.v)] ==
                        num[static_cast<std::size_t>(fr.v)]) {
                        while (true) {
                            int w = stack.back();
                            stack.pop_back();
                            on_stack[static_cast<std::size_t>(w)] = 0;
                            comp[static_cast<std::size_t>(w)] = comp_count;
                            if (w == fr.v) break;
                        }
                        ++comp_count;
                    }
                    int v = fr.v;
                    call.pop_back();
                    if (!call.empty())
                        low[static_cast<std::size_t>(call.back().v)] =
                            std::min(low[static_cast<std::size_t>(call.back().v)],
                                     low[static_cast<std::size_t>(v)]);
                }
            }
        }

        int n_comp = comp_count;
        std::vector<double> comp_measure(static_cast<std::size_t>(n_comp), 0.0);
        std::vector<std::vector<int>> comp_succ(static_cast<std::size_t>(n_comp));
        for (int c = 0; c < cells; ++c) {
            comp_measure[static_cast<std::size_t>(comp[static_cast<std::size_t>(c)])] +=
                measure[static_cast<std::size_t>(c)];
            for (int w : succ[static_cast<std::size_t>(c)])
                if (comp[static_cast<std::size_t>(w)] != comp[static_cast<std::size_t>(c)])
                    comp_succ[static_cast<std::size_t>(comp[static_cast<std::size_t>(c)])]
                        .push_back(comp[static_cast<std::size_t>(w)]);
        }
        for (auto& v : comp_succ) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }

        // closure measure per component via per-component DFS; the
        // condensations met in practice are tiny
        if (n_comp > 4096) {
            rep.note = "condensation too large; spectrum over bottom components only";
            rep.fixpoint = false;
        }
        std::vector<double> closure(static_cast<std::size_t>(n_comp),
                                    std::numeric_limits<double>::quiet_NaN());
        std::vector<int> depth(static_cast<std::size_t>(n_comp), 0);
        int best_comp = -1;
        for (int v = 0; v < n_comp; ++v) {
            bool bottom = comp_succ[static_cast<std::size_t>(v)].empty();
            if (n_comp > 4096 && !bottom) continue;
            std::vector<char> vis(static_cast<std::size_t>(n_comp), 0);
            std::deque<int> bfs{v};
            vis[static_cast<std::size_t>(v)] = 1;
            double total = 0.0;
            int max_d = 0;
            std::vector<int> dist(static_cast<std::size_t>(n_comp), 0);
            while (!bfs.empty()) {
                int u = bfs.front();
                bfs.pop_front();
                total += comp_measure[static_cast<std::size_t>(u)];
                for (int w : comp_succ[static_cast<std::size_t>(u)])
                    if (!vis[static_cast<std::size_t>(w)]) {
                        vis[static_cast<std::size_t>(w)] = 1;
                        dist[static_cast<std::size_t>(w)] =
                            dist[static_cast<std::size_t>(u)] + 1;
                        max_d = std::max(max_d, dist[static_cast<std::size_t>(w)]);
                        bfs.push_back(w);
                    }
            }
            closure[static_cast<std::size_t>(v)] = total;
            depth[static_cast<std::size_t>(v)] = max_d;
            if (max_d > rounds) {
                rep.fixpoint = false;
                rep.note = "no-fixpoint";
            }
            if (best_comp < 0 || total < closure[static_cast<std::size_t>(best_comp)])
                best_comp = v;
        }

        std::vector<double> vals;
        for (double v : closure)
            if (!std::isnan(v)) vals.push_back(v);
        std::sort(vals.begin(), vals.end());
        for (double v : vals)
            if (rep.spectrum.empty() || v > rep.spectrum.back() + 1e-12)
                rep.spectrum.push_back(v);
        rep.min_measure = rep.spectrum.empty() ? 0.0 : rep.spectrum.front();

        if (best_comp >= 0) {
            std::vector<char> vis(static_cast<std::size_t>(n_comp), 0);
            std::deque<int> bfs{best_comp};
            vis[static_cast<std::size_t>(best_comp)] = 1;
            while (!bfs.empty()) {
                int u = bfs.front();
                bfs.pop_front();
                for (int w : comp_succ[static_cast<std::size_t>(u)])
                    if (!vis[static_cast<std::size_t>(w)]) {
                        vis[static_cast<std::size_t>(w)] = 1;
                        bfs.push_back(w);
                    }
            }
            for (int c = 0; c < cells; ++c)
                if (vis[static_cast<std::size_t>(comp[static_cast<std::size_t>(c)])])
                    rep.minimal_set_cells.push_back(c);
        }
    }

    // only near-full invariant sets = ergodicity evidence (the 4/g slack
    // absorbs one cell-perimeter layer of outer approximation)
    double threshold = 1.0 - 8.0 / static_cast<double>(g);
    rep.ergodic_evidence = rep.min_measure >= threshold;
    return rep;
}

bool cells_forward_invariant(const MapFamily& family, int g,
                             const std::vector<int>& cells) {
    const PhaseSpace& space = family.space();
    std::vector<char> in_set(static_cast<std::size_t>(box_count(space, g)), 0);
    for (int c : cells) in_set[static_cast<std::size_t>(c)] = 1;
    for (int c : cells) {
        Polytope cell = box_poly(space, g, c);
        for (const SmoothMap& f : family.maps) {
            auto image = cell_image(family, f, cell);
            for (int idx : cells_touched(space, g, image))
                if (!in_set[static_cast<std::size_t>(idx)]) return false;
        }
    }
    return true;
}

EquidistributionReport equidistribution_test(const MapFamily& family, Vec x,
                                             const SymbolStream& stream, std::int64_t n,
                                             int b, const IterateOptions& options) {
    require(b >= 2, "bad-parameter", "need at least two boxes per axis");
    const PhaseSpace& space = family.space();
    int cells = box_count(space, b);
    require(n >= 10 * cells, "bad-parameter", "horizon too short for the box count");
    for (int c = 0; c < cells; ++c)
        require(box_measure(space, b, c) > 0.0, "degenerate-boxes",
                "box with zero volume");

    EquidistributionReport rep;
    rep.cells = cells;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(cells), 0);
    OrbitWalker walker(family, x, stream, options);
    OrbitWalker::Step step;
    for (std::int64_t j = 0; j < n; ++j) {
        if (!walker.next(step)) {
            rep.truncated = true;
            break;
        }
        int idx = box_index(space, b, step.point);
        if (idx >= 0) {
            ++counts[static_cast<std::size_t>(idx)];
            ++rep.counted;
        }
    }
    require(rep.counted > 0, "boundary-start", "orbit produced no points");

    for (int c = 0; c < cells; ++c) {
        double expected =
            static_cast<double>(rep.counted) * box_measure(space, b, c);
        double diff = static_cast<double>(counts[static_cast<std::size_t>(c)]) - expected;
        rep.chi2 += diff * diff / expected;
    }
    rep.normalized = rep.chi2 / static_cast<double>(cells - 1);
    rep.pass = rep.normalized < 1.5;
    return rep;
}

}  // namespace ergolab
