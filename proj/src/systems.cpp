#include "ergolab/systems.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "ergolab/conditions.hpp"

namespace ergolab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<int> identity_perm(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    return p;
}

Simplex permuted(const Simplex& s, const std::vector<int>& perm) {
    Simplex out{s.dim, {}};
    for (int i : perm) out.verts.push_back(s.verts[static_cast<std::size_t>(i)]);
    return out;
}

// Affine map of `piece` onto `whole` choosing the vertex correspondence that
// maximizes the smallest singular value (ties resolved by permutation order).
Affine best_chart(const Simplex& piece, const Simplex& whole, int dim) {
    std::vector<int> perm = identity_perm(dim + 1);
    Affine best{};
    double best_smin = -1.0;
    do {
        Affine cand = affine_onto(piece, permuted(whole, perm));
        double s = singular_values(cand.L, dim).smin;
        if (s > best_smin) {
            best_smin = s;
            best = cand;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

SmoothMap family_member(std::string name, int dim, bool mod1,
                        std::vector<AffinePiece> atlas, int chart) {
    SmoothMap f;
    f.name = std::move(name);
    f.dim = dim;
    f.mod1 = mod1;
    f.pieces = std::move(atlas);
    f.chart_region = chart;
    return f;
}

Region region_of(const Polytope& poly) { return Region{{poly}}; }

}  // namespace

int SmoothMap::piece_at(Vec x, double tol) const {
    if (mod1) {
        double r = x.x - std::floor(x.x);
        x.x = r >= 1.0 ? 0.0 : r;
        if (dim == 2) {
            r = x.y - std::floor(x.y);
            x.y = r >= 1.0 ? 0.0 : r;
        }
    }
    for (std::size_t i = 0; i < pieces.size(); ++i)
        if (pieces[i].domain.contains(x, tol)) return static_cast<int>(i);
    return -1;
}

Vec SmoothMap::eval(Vec x) const {
    if (mod1) {
        double r = x.x - std::floor(x.x);
        x.x = r >= 1.0 ? 0.0 : r;
        if (dim == 2) {
            r = x.y - std::floor(x.y);
            x.y = r >= 1.0 ? 0.0 : r;
        }
    }
    int pi = piece_at(x, 1e-12);
    require(pi >= 0, "boundary-hit", "point outside every atlas piece");
    Vec y = pieces[static_cast<std::size_t>(pi)].map.apply(x);
    if (perturb_amp != 0.0) y.x += perturb_amp * std::sin(kTwoPi * x.x);
    if (mod1) {
        double r = y.x - std::floor(y.x);
        y.x = r >= 1.0 ? 0.0 : r;
        if (dim == 2) {
            r = y.y - std::floor(y.y);
            y.y = r >= 1.0 ? 0.0 : r;
        }
    }
    return y;
}

Mat SmoothMap::jacobian(Vec x) const {
    int pi = piece_at(x, 1e-12);
    require(pi >= 0, "boundary-hit", "point outside every atlas piece");
    Mat j = pieces[static_cast<std::size_t>(pi)].map.L;
    if (perturb_amp != 0.0) j.a += perturb_amp * kTwoPi * std::cos(kTwoPi * x.x);
    return j;
}

double SmoothMap::a_value(Vec x) const {
    return std::log(inv_op_norm(jacobian(x), dim));
}

std::optional<Vec> branch_preimage(const SmoothMap& f, int piece, Vec y, Vec shift,
                                   double tol) {
    const AffinePiece& br = f.pieces[static_cast<std::size_t>(piece)];
    Vec target = y + shift;
    if (f.perturb_amp == 0.0) {
        Vec x = affine_inverse(br.map).apply(target);
        if (!br.domain.contains(x, tol)) return std::nullopt;
        return x;
    }
    // monotone 1D branch: solve a x + t + amp sin(2 pi x) = target on the domain
    double lo = br.domain.verts[0].x, hi = br.domain.verts[1].x;
    auto g = [&](double x) {
        return br.map.L.a * x + br.map.t.x + f.perturb_amp * std::sin(kTwoPi * x);
    };
    double glo = g(lo), ghi = g(hi);
    double slack = tol * std::max(1.0, std::abs(br.map.L.a));
    if (target.x < glo - slack || target.x > ghi + slack) return std::nullopt;
    double a = lo, b = hi;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (a + b);
        if (g(mid) < target.x) a = mid;
        else b = mid;
    }
    return Vec{0.5 * (a + b), 0.0};
}

void MapFamily::validate() const {
    require(static_cast<int>(maps.size()) == partition.size(), "bad-parameter",
            "family and partition sizes differ");
    require(p + q == size(), "bad-parameter", "p + q must equal the member count");
    for (int i = 0; i < size(); ++i)
        require(maps[static_cast<std::size_t>(i)].chart_region == i, "bad-parameter",
                "member i must be charted on region i");
}

SmoothMap extend_map(const PhaseSpace& space, const SmoothMap& partial,
                     const std::vector<AffinePiece>& atlas) {
    require(!partial.pieces.empty(), "bad-parameter", "map has no defining piece");
    double jdet = std::abs(mat_det_dim(partial.pieces[0].map.L, partial.dim));
    require(jdet > 1e-10, "not-injective", "map degenerate on its region closure");
    if (space.kind != SpaceKind::SimplexComplex) {
        if (partial.perturb_amp != 0.0)
            require(partial.pieces[0].map.L.a - kTwoPi * partial.perturb_amp > 0.0,
                    "not-injective", "perturbation destroys monotonicity");
        SmoothMap out = partial;
        out.mod1 = true;
        Polytope full = space.dim == 1
                            ? make_interval(0.0, 1.0)
                            : make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
        out.pieces = {AffinePiece{full, partial.pieces[0].map}};
        return out;
    }
    require(!atlas.empty(), "bad-parameter",
            "extension on a simplex complex needs the piece atlas");
    // the atlas must agree with the map on its own chart piece
    const AffinePiece& own = partial.pieces[0];
    Region dom = region_of(own.domain);
    RandomStream rs{91625};
    SmoothMap out = partial;
    out.mod1 = false;
    out.pieces = atlas;
    for (int i = 0; i < 8; ++i) {
        Vec x = region_sample(dom, rs, static_cast<std::uint64_t>(i));
        Vec a = own.map.apply(x);
        Vec b = out.eval(x);
        require(norm(a - b) < 1e-9, "bad-parameter",
                "atlas disagrees with the map on its chart");
    }
    return out;
}

MapFamily build_expanding_family(const PhaseSpace& space, int depth) {
    require(depth >= 1, "bad-parameter", "subdivision depth must be >= 1");

    if (space.kind == SpaceKind::Torus1) {
        Simplex base{1, {{0.0, 0.0}, {1.0, 0.0}}};
        std::vector<Simplex> pieces{base};
        for (int d = 0; d < depth; ++d) {
            std::vector<Simplex> next;
            for (const Simplex& s : pieces) {
                auto sub = barycentric_subdivision(s);
                next.insert(next.end(), sub.begin(), sub.end());
            }
            pieces = std::move(next);
        }
        std::vector<AffinePiece> atlas;
        for (const Simplex& s : pieces)
            atlas.push_back({s.to_polytope(), best_chart(s, base, 1)});
        MapFamily fam;
        fam.partition.space = space;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            fam.partition.regions.push_back(region_of(atlas[i].domain));
            fam.maps.push_back(family_member("f_" + std::to_string(i + 1), 1, true,
                                             atlas, static_cast<int>(i)));
        }
        fam.p = static_cast<int>(pieces.size());
        fam.q = 0;
        fam.validate();
        return fam;
    }

    require(space.kind == SpaceKind::SimplexComplex, "bad-parameter",
            "builder supports the circle and simplex complexes");
    for (std::size_t i = 0; i < space.complex.size(); ++i)
        for (std::size_t j = i + 1; j < space.complex.size(); ++j) {
            Polytope overlap = intersect_convex(space.complex[i].to_polytope(),
                                                space.complex[j].to_polytope());
            require(overlap.volume() < 1e-12, "bad-triangulation",
                    "simplices overlap with positive volume");
        }

    std::vector<AffinePiece> atlas;
    for (const Simplex& top : space.complex) {
        std::vector<Simplex> pieces{top};
        for (int d = 0; d < depth; ++d) {
            std::vector<Simplex> next;
            for (const Simplex& s : pieces) {
                auto sub = barycentric_subdivision(s);
                next.insert(next.end(), sub.begin(), sub.end());
            }
            pieces = std::move(next);
        }
        for (const Simplex& s : pieces)
            atlas.push_back({s.to_polytope(), best_chart(s, top, space.dim)});
    }

    MapFamily fam;
    fam.partition.space = space;
    for (std::size_t i = 0; i < atlas.size(); ++i) {
        fam.partition.regions.push_back(region_of(atlas[i].domain));
        SmoothMap m = family_member("f_" + std::to_string(i + 1), space.dim, false,
                                    atlas, static_cast<int>(i));
        fam.maps.push_back(std::move(m));
    }
    fam.p = static_cast<int>(atlas.size());
    fam.q = 0;
    fam.validate();
    return fam;
}

MapFamily build_mostly_expanding_family(const PhaseSpace& space, double beta) {
    require(beta > 0.0 && beta < 1.0, "bad-parameter", "beta must lie in (0,1)");
    require(space.kind == SpaceKind::SimplexComplex && space.dim == 2 &&
                space.complex.size() == 1,
            "bad-parameter", "mostly-expanding builder needs a single triangle");

    const Simplex& tri = space.complex[0];
    Vec a = tri.verts[0], b = tri.verts[1], c = tri.verts[2];
    // apex of the distinguished piece at height beta over the edge ab
    Vec p = a + (0.5 * (1.0 - beta)) * (b - a) + beta * (c - a);
    Vec m1 = 0.5 * (a + c);
    Vec m2 = 0.5 * (b + c);

    Simplex star{2, {a, b, p}};  // keeps the full edge ab
    std::vector<Simplex> fan{
        Simplex{2, {p, m1, a}},
        Simplex{2, {p, c, m1}},
        Simplex{2, {p, m2, c}},
        Simplex{2, {p, b, m2}},
    };

    std::vector<AffinePiece> atlas;
    double sigma1 = std::numeric_limits<double>::infinity();
    for (const Simplex& s : fan) {
        Affine chart = best_chart(s, tri, 2);
        sigma1 = std::min(sigma1, singular_values(chart.L, 2).smin);
        atlas.push_back({s.to_polytope(), chart});
    }
    // the distinguished chart keeps the shared edge fixed: a->a, b->b, p->c
    Affine star_chart = affine_onto(star, tri);
    double star_smin = singular_values(star_chart.L, 2).smin;
    atlas.push_back({star.to_polytope(), star_chart});

    require(sigma1 > 1.0, "a2-unsatisfiable",
            "expanding pieces fail strict expansion at this beta");
    double sigma2 = std::max(1.0, 1.0 / star_smin);
    double eps_hat = 1.0 - beta;  // exact expanding-area fraction
    double c_boot = 0.5 * eps_hat * std::log(sigma1);
    auto eps0 = derive_epsilon0(sigma1, sigma2, c_boot);
    require(eps0.has_value(), "a2-unsatisfiable",
            "no epsilon0 in (0,1) satisfies the expansion balance at this beta");

    MapFamily fam;
    fam.partition.space = space;
    for (std::size_t i = 0; i < atlas.size(); ++i) {
        fam.partition.regions.push_back(region_of(atlas[i].domain));
        fam.maps.push_back(family_member("f_" + std::to_string(i + 1), 2, false,
                                         atlas, static_cast<int>(i)));
    }
    fam.p = 4;
    fam.q = 1;
    fam.validate();
    return fam;
}

MapFamily perturbed_doubling_family(double amplitude) {
    require(amplitude >= 0.0 && kTwoPi * amplitude < 1.0, "bad-parameter",
            "amplitude too large for a monotone perturbation");
    PhaseSpace space = torus_space(1);
    std::vector<AffinePiece> atlas{
        {make_interval(0.0, 0.5), Affine{Mat{2, 0, 0, 1}, Vec{0.0, 0.0}}},
        {make_interval(0.5, 1.0), Affine{Mat{2, 0, 0, 1}, Vec{-1.0, 0.0}}},
    };
    MapFamily fam;
    fam.partition.space = space;
    for (int i = 0; i < 2; ++i) {
        fam.partition.regions.push_back(region_of(atlas[static_cast<std::size_t>(i)].domain));
        SmoothMap m = family_member("f_" + std::to_string(i + 1), 1, true, atlas, i);
        m.perturb_amp = amplitude;
        if (amplitude > 0.0) {
            m.alpha = 1.0;
            m.C0 = kTwoPi * kTwoPi * amplitude / (2.0 - kTwoPi * amplitude);
        }
        fam.maps.push_back(std::move(m));
    }
    fam.p = 2;
    fam.q = 0;
    fam.validate();
    return fam;
}

MapFamily invariant_arcs_control_family() {
    PhaseSpace space = torus_space(1);
    std::vector<AffinePiece> atlas{
        {make_interval(0.00, 0.25), Affine{Mat{2, 0, 0, 1}, Vec{0.0, 0.0}}},
        {make_interval(0.25, 0.50), Affine{Mat{2, 0, 0, 1}, Vec{-0.5, 0.0}}},
        {make_interval(0.50, 0.75), Affine{Mat{2, 0, 0, 1}, Vec{-0.5, 0.0}}},
        {make_interval(0.75, 1.00), Affine{Mat{2, 0, 0, 1}, Vec{-1.0, 0.0}}},
    };
    MapFamily fam;
    fam.partition.space = space;
    for (int i = 0; i < 4; ++i) {
        fam.partition.regions.push_back(region_of(atlas[static_cast<std::size_t>(i)].domain));
        fam.maps.push_back(family_member("f_" + std::to_string(i + 1), 1, true, atlas, i));
    }
    fam.p = 4;
    fam.q = 0;
    fam.validate();
    return fam;
}

MapFamily rotation_control_family() {
    PhaseSpace space = torus_space(1);
    Polytope full = make_interval(0.0, 1.0);
    MapFamily fam;
    fam.partition.space = space;
    fam.partition.regions.push_back(region_of(make_interval(0.0, 0.5)));
    fam.partition.regions.push_back(region_of(make_interval(0.5, 1.0)));
    SmoothMap f0 = family_member("f_1", 1, true,
                                 {{full, Affine{Mat{1, 0, 0, 1}, Vec{0.25, 0.0}}}}, 0);
    SmoothMap f1 = family_member("f_2", 1, true,
                                 {{full, Affine{Mat{1, 0, 0, 1}, Vec{0.50, 0.0}}}}, 1);
    fam.maps = {std::move(f0), std::move(f1)};
    fam.p = 2;  // claimed expanding; the sigma estimate exposes sigma1 = 1
    fam.q = 0;
    fam.validate();
    return fam;
}

MapFamily torus2_doubling_family() {
    PhaseSpace space = torus_space(2);
    Mat two{2, 0, 0, 2};
    auto square = [](double x0, double y0) {
        return make_polygon({{x0, y0}, {x0 + 0.5, y0}, {x0 + 0.5, y0 + 0.5}, {x0, y0 + 0.5}});
    };
    std::vector<AffinePiece> atlas{
        {square(0.0, 0.0), Affine{two, Vec{0.0, 0.0}}},
        {square(0.5, 0.0), Affine{two, Vec{-1.0, 0.0}}},
        {square(0.0, 0.5), Affine{two, Vec{0.0, -1.0}}},
        {square(0.5, 0.5), Affine{two, Vec{-1.0, -1.0}}},
    };
    MapFamily fam;
    fam.partition.space = space;
    for (int i = 0; i < 4; ++i) {
        fam.partition.regions.push_back(region_of(atlas[static_cast<std::size_t>(i)].domain));
        SmoothMap m = family_member("f_" + std::to_string(i + 1), 2, true, atlas, i);
        fam.maps.push_back(std::move(m));
    }
    fam.p = 4;
    fam.q = 0;
    fam.validate();
    return fam;
}

namespace {

class ItineraryOrbitSource : public ItinerarySource {
public:
    ItineraryOrbitSource(MapFamily family, Vec start)
        : family_(std::move(family)), current_(start) {}

    int symbol_at(std::uint64_t index) const override {
        std::lock_guard<std::mutex> lock(mutex_);
        while (symbols_.size() <= index) {
            int region = family_.partition.locate(current_, 1e-12);
            if (region < 0)
                fail("boundary-hit", "itinerary hit the skeleton at step " +
                                         std::to_string(symbols_.size()));
            symbols_.push_back(region);
            current_ = family_.maps[static_cast<std::size_t>(region)].eval(current_);
        }
        return symbols_[index];
    }

private:
    MapFamily family_;
    mutable Vec current_;
    mutable std::vector<int> symbols_;
    mutable std::mutex mutex_;
};

}  // namespace

SymbolStream make_itinerary_stream(const MapFamily& family, Vec x) {
    require(family.partition.locate(x, 1e-12) >= 0, "boundary-start",
            "itinerary start lies on the partition skeleton");
    SymbolStream s;
    s.kind = SymbolStream::Kind::ItineraryDriven;
    s.alphabet_size = family.size();
    s.itinerary = std::make_shared<ItineraryOrbitSource>(family, x);
    return s;
}

}  // namespace ergolab
