#include "ergolab/cylinders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ergolab {

namespace {

constexpr double kAreaTol = 1e-12;
constexpr double kTwoPi = 6.283185307179586;

bool family_affine(const MapFamily& family) {
    for (const SmoothMap& f : family.maps)
        if (!f.is_affine()) return false;
    return true;
}

Polytope translate(const Polytope& p, Vec shift) {
    Polytope out = p;
    for (Vec& v : out.verts) v = v + shift;
    return out;
}

// Representative of a - b with each torus coordinate folded into (-1/2, 1/2].
Vec wrapped_diff(const PhaseSpace& space, Vec a, Vec b) {
    Vec d = a - b;
    if (space.kind == SpaceKind::SimplexComplex) return d;
    d.x -= std::round(d.x);
    if (space.dim == 2) d.y -= std::round(d.y);
    return d;
}

// Applies the branch of the best-margin piece; tolerates closure points that
// f.eval would reject as boundary hits.
Vec eval_near(const SmoothMap& f, const PhaseSpace& space, Vec x) {
    x = space.wrap(x);
    int best = -1;
    double best_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.pieces.size(); ++i) {
        double m = f.pieces[i].domain.margin(x);
        if (m > best_margin) {
            best_margin = m;
            best = static_cast<int>(i);
        }
    }
    require(best >= 0 && best_margin > -1e-6, "boundary-hit",
            "point left the map atlas");
    const Affine& a = f.pieces[static_cast<std::size_t>(best)].map;
    Vec y = a.apply(x);
    if (f.perturb_amp != 0.0) y.x += f.perturb_amp * std::sin(kTwoPi * x.x);
    return space.wrap(y);
}

// Replay of the word along p (closure semantics: regions accepted within
// tol of their boundary). Returns the visited points y_0..y_{n-1} or nullopt
// the first time the orbit leaves the prescribed region closure.
std::optional<std::vector<Vec>> closure_replay(const MapFamily& family, const Word& word,
                                               Vec p, double tol) {
    std::vector<Vec> points;
    points.reserve(word.length());
    Vec x = family.space().wrap(p);
    for (std::size_t j = 0; j < word.length(); ++j) {
        const Region& r =
            family.partition.regions[static_cast<std::size_t>(word.symbols[j])];
        if (r.margin(x) < -tol) return std::nullopt;
        points.push_back(x);
        if (j + 1 < word.length())
            x = eval_near(family.maps[static_cast<std::size_t>(word.symbols[j])],
                          family.space(), x);
    }
    return points;
}

// Strict-interior membership used by rejection sampling.
bool interior_replay(const MapFamily& family, const Word& word, Vec p, double tol) {
    Vec x = p;
    for (std::size_t j = 0; j < word.length(); ++j) {
        if (family.partition.locate(x, tol) != word.symbols[j]) return false;
        if (j + 1 < word.length())
            x = family.maps[static_cast<std::size_t>(word.symbols[j])].eval(x);
    }
    return true;
}

// Folds polytopes that may extend past the fundamental domain back onto the
// torus, splitting along unit-cell boundaries. Identity on complexes.
std::vector<Polytope> wrap_polys(const PhaseSpace& space, const std::vector<Polytope>& polys) {
    if (space.kind == SpaceKind::SimplexComplex) return polys;
    std::vector<Polytope> out;
    for (const Polytope& p : polys) {
        Vec lo, hi;
        p.bounding_box(lo, hi);
        int kx0 = static_cast<int>(std::floor(lo.x));
        int kx1 = std::max(kx0 + 1, static_cast<int>(std::ceil(hi.x)));
        int ky0 = space.dim == 2 ? static_cast<int>(std::floor(lo.y)) : 0;
        int ky1 = space.dim == 2 ? std::max(ky0 + 1, static_cast<int>(std::ceil(hi.y))) : 1;
        for (int kx = kx0; kx < kx1; ++kx)
            for (int ky = ky0; ky < ky1; ++ky) {
                Vec corner{static_cast<double>(kx), static_cast<double>(ky)};
                Polytope cell =
                    space.dim == 1
                        ? Polytope{1, {{corner.x, 0}, {corner.x + 1, 0}}}
                        : make_polygon({{corner.x, corner.y},
                                        {corner.x + 1, corner.y},
                                        {corner.x + 1, corner.y + 1},
                                        {corner.x, corner.y + 1}});
                Polytope piece = intersect_convex(p, cell);
                if (piece.volume() > kAreaTol)
                    out.push_back(translate(piece, Vec{0, 0} - corner));
            }
    }
    return out;
}

// One backward step of the exact chain: preimages of the target polytopes
// under map w restricted to region w, clipped to the region.
std::vector<Polytope> preimage_step(const MapFamily& family, int w,
                                    const std::vector<Polytope>& targets) {
    const SmoothMap& f = family.maps[static_cast<std::size_t>(w)];
    const Region& region = family.partition.regions[static_cast<std::size_t>(w)];
    bool torus = family.space().kind != SpaceKind::SimplexComplex;
    std::vector<Polytope> out;
    for (const AffinePiece& piece : f.pieces) {
        for (const Polytope& rp : region.polys) {
            Polytope dom = intersect_convex(piece.domain, rp);
            if (dom.volume() <= kAreaTol) continue;
            Polytope image = affine_image(dom, piece.map);
            Vec ilo, ihi;
            image.bounding_box(ilo, ihi);
            Affine inv = affine_inverse(piece.map);
            int kx0 = torus ? static_cast<int>(std::floor(ilo.x)) - 1 : 0;
            int kx1 = torus ? static_cast<int>(std::ceil(ihi.x)) + 1 : 0;
            int ky0 = torus && f.dim == 2 ? static_cast<int>(std::floor(ilo.y)) - 1 : 0;
            int ky1 = torus && f.dim == 2 ? static_cast<int>(std::ceil(ihi.y)) + 1 : 0;
            for (const Polytope& t : targets)
                for (int kx = kx0; kx <= kx1; ++kx)
                    for (int ky = ky0; ky <= ky1; ++ky) {
                        Polytope shifted =
                            translate(t, {static_cast<double>(kx), static_cast<double>(ky)});
                        Polytope pre =
                            intersect_convex(affine_image(shifted, inv), dom);
                        if (pre.volume() > kAreaTol) out.push_back(std::move(pre));
                    }
        }
    }
    return out;
}

// Forward image of polytopes under map w restricted to region w, folded back
// onto the space.
std::vector<Polytope> forward_step(const MapFamily& family, int w,
                                   const std::vector<Polytope>& sets) {
    const SmoothMap& f = family.maps[static_cast<std::size_t>(w)];
    std::vector<Polytope> raw;
    for (const AffinePiece& piece : f.pieces)
        for (const Polytope& s : sets) {
            Polytope dom = intersect_convex(piece.domain, s);
            if (dom.volume() > kAreaTol) raw.push_back(affine_image(dom, piece.map));
        }
    return wrap_polys(family.space(), raw);
}

// Inverse of the branch through x_j: solves f(z) = z_next picking the lift
// representative nearest the orbit. Affine branches invert in closed form;
// the perturbation hook bisects its monotone lift. Returns nullopt when the
// preimage leaves the branch domain (the sample escaped the image region).
std::optional<Vec> invert_near(const SmoothMap& f, const PhaseSpace& space, Vec xj,
                               Vec xj1, Vec z_next) {
    int pi = f.piece_at(xj, 1e-9);
    if (pi < 0) return std::nullopt;
    const AffinePiece& piece = f.pieces[static_cast<std::size_t>(pi)];
    Vec delta = wrapped_diff(space, z_next, xj1);
    if (f.perturb_amp == 0.0) {
        Vec zj = xj + inverse(piece.map.L).apply(delta);
        if (piece.domain.margin(zj) < -1e-9) return std::nullopt;
        return zj;
    }
    auto lift = [&](double u) {
        return piece.map.L.a * u + piece.map.t.x + f.perturb_amp * std::sin(kTwoPi * u);
    };
    double target = lift(xj.x) + delta.x;
    double slope_min = piece.map.L.a - kTwoPi * f.perturb_amp;
    double rad = std::abs(delta.x) / slope_min + 1e-9;
    double lo = xj.x - rad, hi = xj.x + rad;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        (lift(mid) < target ? lo : hi) = mid;
    }
    Vec zj{0.5 * (lo + hi), 0.0};
    if (piece.domain.margin(zj) < -1e-9) return std::nullopt;
    return zj;
}

double inv_norm_at(const SmoothMap& f, Vec x) {
    return 1.0 / singular_values(f.jacobian(x), f.dim).smin;
}

// Uniform sample from the wrapped ball of radius r around center.
std::optional<Vec> ball_sample(const PhaseSpace& space, Vec center, double r,
                               const RandomStream& rs, std::uint64_t index) {
    for (int tries = 0; tries < 64; ++tries) {
        std::uint64_t k = index * 64 + static_cast<std::uint64_t>(tries);
        Vec p{center.x + (2.0 * rs.u01(2 * k) - 1.0) * r, 0.0};
        if (space.dim == 2) p.y = center.y + (2.0 * rs.u01(2 * k + 1) - 1.0) * r;
        if (space.dim == 2 && norm(wrapped_diff(space, p, center)) > r) continue;
        p = space.wrap(p);
        if (space.kind == SpaceKind::SimplexComplex && !space.contains(p, 0.0)) continue;
        return p;
    }
    return std::nullopt;
}

}  // namespace

double Cylinder::raw_volume() const {
    if (exact) {
        double v = 0.0;
        for (const Polytope& p : polys) v += p.volume();
        return v;
    }
    return sampled_volume;
}

Cylinder cylinder(const MapFamily& family, const Word& word, int samples,
                  std::uint64_t seed) {
    require(word.length() >= 1, "word-too-short", "cylinder needs a nonempty word");
    word.validate();
    require(word.alphabet_size <= family.size(), "bad-parameter",
            "word symbols exceed family size");

    Cylinder cyl;
    cyl.word = word;
    cyl.exact = family_affine(family);
    const Region& first =
        family.partition.regions[static_cast<std::size_t>(word.symbols[0])];

    if (cyl.exact) {
        std::vector<Polytope> set =
            family.partition.regions[static_cast<std::size_t>(word.symbols.back())].polys;
        for (std::size_t j = word.length() - 1; j-- > 0;)
            set = preimage_step(family, word.symbols[j], set);
        cyl.polys = std::move(set);
        double vol = 0.0;
        for (const Polytope& p : cyl.polys) vol += p.volume();
        cyl.empty = vol <= kAreaTol;
        cyl.emptiness_certain = true;
    }

    // independent rejection cloud (also the only construction when inexact)
    RandomStream rs{derive_seed(seed, 0x63796c)};
    int want = cyl.exact ? std::min(samples, 2000) : samples;
    if (cyl.exact && cyl.empty) want = 0;
    std::int64_t budget =
        cyl.exact ? 10000 + 64 * static_cast<std::int64_t>(want) : 10000000;
    std::int64_t proposed = 0;
    while (static_cast<int>(cyl.samples.size()) < want && proposed < budget) {
        Vec p = region_sample(first, rs, static_cast<std::uint64_t>(proposed));
        ++proposed;
        if (interior_replay(family, word, p, 1e-12)) cyl.samples.push_back(p);
    }
    if (!cyl.exact) {
        cyl.empty = cyl.samples.empty();
        cyl.emptiness_certain = false;
        cyl.sampled_volume = proposed > 0
                                 ? first.raw_volume() *
                                       static_cast<double>(cyl.samples.size()) /
                                       static_cast<double>(proposed)
                                 : 0.0;
    }
    return cyl;
}

bool cylinder_contains(const MapFamily& family, const Cylinder& cyl, Vec p, double tol) {
    return closure_replay(family, cyl.word, p, tol).has_value();
}

HyperbolicCylinderReport is_hyperbolic_cylinder(const MapFamily& family,
                                                const Cylinder& cyl, double c) {
    require(cyl.word.length() >= 1, "word-too-short", "empty word");
    require(!cyl.empty, "empty-region", "cylinder is empty");
    HyperbolicCylinderReport rep;
    std::size_t n = cyl.word.length();

    // exact path: every map of the word has one a-value across its region
    bool constant = family_affine(family);
    std::vector<double> a_const(n, 0.0);
    if (constant) {
        for (std::size_t j = 0; j < n && constant; ++j) {
            const SmoothMap& f =
                family.maps[static_cast<std::size_t>(cyl.word.symbols[j])];
            const Region& r =
                family.partition.regions[static_cast<std::size_t>(cyl.word.symbols[j])];
            bool seen = false;
            double value = 0.0;
            for (const AffinePiece& piece : f.pieces)
                for (const Polytope& rp : r.polys) {
                    if (intersect_convex(piece.domain, rp).volume() <= kAreaTol) continue;
                    double v = -std::log(singular_values(piece.map.L, f.dim).smin);
                    if (!seen) {
                        value = v;
                        seen = true;
                    } else if (std::abs(v - value) > 1e-12) {
                        constant = false;
                    }
                }
            a_const[j] = value;
        }
    }

    auto word_hyperbolic = [&](const std::vector<double>& a) {
        double suffix = 0.0;
        for (std::size_t j = n; j-- > 0;) {
            suffix += a[j] + c;
            if (suffix > 1e-12) return false;
        }
        return true;
    };

    if (constant) {
        bool ok = word_hyperbolic(a_const);
        rep.state = ok ? TriState::Yes : TriState::No;
        if (!ok) {
            if (!cyl.samples.empty())
                rep.witness = cyl.samples.front();
            else if (!cyl.polys.empty())
                rep.witness = cyl.polys.front().centroid();
        }
        return rep;
    }

    rep.samples = static_cast<std::int64_t>(cyl.samples.size());
    for (const Vec& s : cyl.samples) {
        auto pts = closure_replay(family, cyl.word, s, 1e-9);
        if (!pts) continue;
        std::vector<double> a(n);
        for (std::size_t j = 0; j < n; ++j)
            a[j] = family.maps[static_cast<std::size_t>(cyl.word.symbols[j])].a_value(
                (*pts)[j]);
        if (!word_hyperbolic(a)) {
            rep.state = TriState::No;
            rep.witness = s;
            return rep;
        }
    }
    rep.state = TriState::Unknown;
    return rep;
}

DiameterDecayReport diameter_decay_check(const MapFamily& family, const Cylinder& cyl,
                                         double c, double K2) {
    auto hyp = is_hyperbolic_cylinder(family, cyl, c);
    require(hyp.state != TriState::No, "not-hyperbolic",
            "cylinder is not hyperbolic at this c");
    DiameterDecayReport rep;
    int n = static_cast<int>(cyl.word.length());

    std::vector<double> diam(static_cast<std::size_t>(n) + 1, 0.0);
    if (cyl.exact) {
        std::vector<Polytope> set = cyl.polys;
        for (int m = 0; m <= n; ++m) {
            diam[static_cast<std::size_t>(m)] =
                inner_diameter(family.space(), Region{set}, 64);
            if (m < n) set = forward_step(family, cyl.word.symbols[m], set);
        }
    } else {
        std::vector<Vec> pts(cyl.samples.begin(),
                             cyl.samples.begin() +
                                 std::min<std::size_t>(cyl.samples.size(), 512));
        for (int m = 0; m <= n; ++m) {
            double d = 0.0;
            for (std::size_t i = 0; i < pts.size(); ++i)
                for (std::size_t k = i + 1; k < pts.size(); ++k)
                    d = std::max(d, norm(wrapped_diff(family.space(), pts[i], pts[k])));
            diam[static_cast<std::size_t>(m)] = d;
            if (m < n)
                for (Vec& p : pts)
                    p = eval_near(
                        family.maps[static_cast<std::size_t>(cyl.word.symbols[m])],
                        family.space(), p);
        }
    }

    rep.pass = true;
    for (int j = 0; j <= n; ++j) {
        DiameterDecayRow row;
        row.j = j;
        row.diameter = diam[static_cast<std::size_t>(n - j)];
        row.bound = K2 * std::exp(-0.5 * c * j);
        row.ok = row.diameter <= row.bound + 1e-9;
        if (!row.ok) rep.pass = false;
        rep.rows.push_back(row);
    }
    return rep;
}

double K1_bound(const MapFamily& family, int diameter_samples) {
    double k1 = 0.0;
    for (const Region& r : family.partition.regions)
        k1 = std::max(k1, inner_diameter(family.space(), r, diameter_samples));
    return k1;
}

double K2_bound(const MapFamily& family, int diameter_samples) {
    double k1 = K1_bound(family, diameter_samples);
    double max_df = 0.0;
    for (int i = 0; i < family.size(); ++i) {
        const SmoothMap& f = family.maps[static_cast<std::size_t>(i)];
        const Region& r = family.partition.regions[static_cast<std::size_t>(i)];
        if (f.is_affine()) {
            for (const AffinePiece& piece : f.pieces)
                for (const Polytope& rp : r.polys)
                    if (intersect_convex(piece.domain, rp).volume() > kAreaTol)
                        max_df =
                            std::max(max_df, singular_values(piece.map.L, f.dim).smax);
        } else {
            max_df = std::max(max_df, f.pieces[0].map.L.a + kTwoPi * f.perturb_amp);
        }
    }
    return k1 * max_df;
}

double L1_bound(double C0, double alpha, double K2, double c) {
    require(c > 0.0 && alpha > 0.0, "bad-constants", "L1 needs c > 0 and alpha > 0");
    return std::exp(C0 * std::pow(K2, alpha) / (1.0 - std::exp(-0.5 * c * alpha)));
}

double distortion_ratio(const MapFamily& family, const Word& word, Vec x, Vec y) {
    auto px = closure_replay(family, word, x, 1e-9);
    auto py = closure_replay(family, word, y, 1e-9);
    require(px.has_value() && py.has_value(), "outside-cylinder",
            "both points must lie in the closure of the word cylinder");
    double log_ratio = 0.0;
    for (std::size_t j = 0; j < word.length(); ++j) {
        const SmoothMap& f = family.maps[static_cast<std::size_t>(word.symbols[j])];
        log_ratio += std::log(std::abs(f.det_at((*px)[j]))) -
                     std::log(std::abs(f.det_at((*py)[j])));
    }
    return std::exp(log_ratio);
}

MeasureRatioReport measure_ratio_check(const MapFamily& family, const Word& word,
                                       const Region& a1, const Region& a2, int n_samples,
                                       double L2, std::uint64_t seed) {
    require(n_samples >= 16, "bad-parameter", "measure ratio check needs samples");
    MeasureRatioReport rep;
    rep.L2 = L2;
    rep.stat_tol = 3.0 / std::sqrt(static_cast<double>(n_samples));

    const Region& first =
        family.partition.regions[static_cast<std::size_t>(word.symbols[0])];
    RandomStream rs{derive_seed(seed, 0x6d7263)};
    double w1 = 0, w2 = 0;  // image weights: sum of |det Df^n| over hits
    std::int64_t c1 = 0, c2 = 0, kept = 0, proposed = 0;
    std::int64_t budget = static_cast<std::int64_t>(n_samples) * 64;
    while (proposed < budget && kept < n_samples) {
        Vec p = region_sample(first, rs, static_cast<std::uint64_t>(proposed));
        ++proposed;
        auto pts = closure_replay(family, word, p, 1e-12);
        if (!pts) continue;
        ++kept;
        bool in1 = a1.contains(p, 1e-12);
        bool in2 = a2.contains(p, 1e-12);
        if (!in1 && !in2) continue;
        double log_det = 0.0;
        for (std::size_t j = 0; j < word.length(); ++j)
            log_det += std::log(std::abs(
                family.maps[static_cast<std::size_t>(word.symbols[j])].det_at((*pts)[j])));
        double w = std::exp(log_det);
        if (in1) {
            ++c1;
            w1 += w;
        }
        if (in2) {
            ++c2;
            w2 += w;
        }
    }
    require(c1 > 0 && c2 > 0, "degenerate-set",
            "a subset has zero sampled measure inside the cylinder");

    // one proposal carries mu(R_{w0})/proposed of normalized measure
    double unit = family.space().normalize(first.raw_volume()) /
                  static_cast<double>(proposed);
    rep.m1 = static_cast<double>(c1) * unit;
    rep.m2 = static_cast<double>(c2) * unit;
    rep.im1 = w1 * unit;
    rep.im2 = w2 * unit;
    rep.ratio = rep.m1 / rep.m2;
    rep.image_ratio = rep.im1 / rep.im2;
    rep.pass = rep.image_ratio >= rep.ratio / L2 - rep.stat_tol &&
               rep.image_ratio <= rep.ratio * L2 + rep.stat_tol;
    return rep;
}

DynamicalBallReport dynamical_ball_check(const MapFamily& family, Vec x,
                                         const SymbolStream& stream, int n, double r,
                                         double c, int samples, std::uint64_t seed) {
    require(n >= 1, "bad-parameter", "need n >= 1");
    OrbitRecord orbit = iterate(family, x, stream, static_cast<std::size_t>(n));
    require(!orbit.truncated, "boundary-hit", "orbit hit the skeleton");

    double suffix = 0.0;
    for (int j = n; j-- > 0;) {
        suffix += orbit.a[static_cast<std::size_t>(j)] + c;
        require(suffix <= 1e-12, "not-hyperbolic-time",
                "n is not a hyperbolic time for x at this c");
    }

    DynamicalBallReport rep;
    rep.membership_ok = true;
    rep.eq5_ok = true;
    std::vector<double> row_max(static_cast<std::size_t>(n) + 1, 0.0);
    row_max[0] = 1.0;

    RandomStream rs{derive_seed(seed, 0x62616c)};
    double ec2 = std::exp(0.5 * c);
    for (int s = 0; s < samples; ++s) {
        auto z0 = ball_sample(family.space(), orbit.points.back(), r, rs,
                              static_cast<std::uint64_t>(s));
        if (!z0) continue;
        ++rep.checked;
        Vec z = *z0;
        double back_norm = 1.0;
        bool escaped = false;
        for (int j = 1; j <= n; ++j) {
            const SmoothMap& f =
                family.maps[static_cast<std::size_t>(orbit.symbols.symbols
                                                         [static_cast<std::size_t>(n - j)])];
            Vec xj = orbit.points[static_cast<std::size_t>(n - j)];
            Vec xj1 = orbit.points[static_cast<std::size_t>(n - j + 1)];
            auto zj = invert_near(f, family.space(), xj, xj1, z);
            if (!zj) {
                ++rep.escapes;
                escaped = true;
                break;
            }
            z = *zj;
            if (norm(wrapped_diff(family.space(), z, xj)) > r + 1e-9)
                rep.membership_ok = false;
            back_norm *= inv_norm_at(f, z);
            row_max[static_cast<std::size_t>(j)] =
                std::max(row_max[static_cast<std::size_t>(j)], back_norm);
            if (inv_norm_at(f, z) > ec2 * inv_norm_at(f, xj) * (1.0 + 1e-9))
                rep.eq5_ok = false;
        }
        (void)escaped;
    }

    bool rows_ok = true;
    for (int j = 0; j <= n; ++j) {
        DynamicalBallRow row;
        row.j = j;
        row.max_backward_norm = row_max[static_cast<std::size_t>(j)];
        row.bound = std::exp(-0.5 * c * j);
        row.ok = row.max_backward_norm <= row.bound + 1e-9;
        if (!row.ok) rows_ok = false;
        rep.rows.push_back(row);
    }
    rep.pass = rep.escapes == 0 && rep.membership_ok && rep.eq5_ok && rows_ok &&
               rep.checked > 0;
    return rep;
}

double estimate_r(const MapFamily& family, double c, int configs, std::uint64_t seed) {
    require(c > 0.0, "bad-parameter", "estimate_r needs c > 0");
    double k1 = K1_bound(family, 64);

    // hyperbolic configurations: (start, iid word, hyperbolic time <= horizon)
    struct Config {
        Vec x;
        SymbolStream stream;
        int n;
    };
    std::vector<Config> found;
    RandomStream rs{derive_seed(seed, 0x726164)};
    const int horizon = 24;
    std::int64_t attempts = 0;
    std::int64_t max_attempts = static_cast<std::int64_t>(configs) * 40;
    while (static_cast<int>(found.size()) < configs && attempts < max_attempts) {
        std::uint64_t tag = static_cast<std::uint64_t>(attempts++);
        Vec x = family.space().sample(rs.sub(1), tag);
        SymbolStream stream =
            iid_uniform_stream(family.size(), derive_seed(rs.seed, tag * 2 + 3));
        OrbitRecord orbit;
        try {
            orbit = iterate(family, x, stream, horizon);
        } catch (const Error&) {
            continue;
        }
        if (orbit.truncated) continue;
        auto times = pliss_times(orbit.a, c);
        int best = 0;
        for (std::int64_t t : times.times)
            if (t >= 3 && t <= horizon) best = static_cast<int>(t);
        if (best == 0) continue;
        found.push_back({x, stream, best});
    }
    if (found.empty()) return 0.0;

    for (int i = 0; i <= 20; ++i) {
        double r = k1 * std::pow(2.0, -i);
        bool all_ok = true;
        for (const Config& cfg : found) {
            DynamicalBallReport rep;
            try {
                rep = dynamical_ball_check(family, cfg.x, cfg.stream, cfg.n, r, c, 8,
                                           derive_seed(seed, static_cast<std::uint64_t>(i)));
            } catch (const Error&) {
                all_ok = false;
                break;
            }
            if (!rep.pass) {
                all_ok = false;
                break;
            }
        }
        if (all_ok) return r;
    }
    return k1 * std::pow(2.0, -20);
}

}  // namespace ergolab
