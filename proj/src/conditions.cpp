#include "ergolab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergolab/cylinders.hpp"

namespace ergolab {

namespace {

constexpr double kAreaTol = 1e-12;

// Atlas pieces of map f that overlap region r with positive volume, clipped
// to the region. For builder families this is exactly the chart piece.
std::vector<AffinePiece> pieces_on_region(const SmoothMap& f, const Region& r) {
    std::vector<AffinePiece> out;
    for (const AffinePiece& piece : f.pieces) {
        for (const Polytope& poly : r.polys) {
            Polytope overlap = intersect_convex(piece.domain, poly);
            if (overlap.volume() > kAreaTol)
                out.push_back({std::move(overlap), piece.map});
        }
    }
    require(!out.empty(), "bad-parameter", "map atlas does not cover its region");
    return out;
}

// Image of a region under a family member, as polytopes in unwrapped
// coordinates (torus images may extend past the fundamental domain).
std::vector<Polytope> image_polys(const SmoothMap& f, const Region& r) {
    std::vector<Polytope> out;
    if (f.perturb_amp != 0.0) {
        // monotone 1D branches: the image of an interval is the interval of
        // its endpoint values on the lift
        for (const AffinePiece& piece : pieces_on_region(f, r)) {
            double lo = piece.domain.verts[0].x, hi = piece.domain.verts[1].x;
            auto lift = [&](double x) {
                return piece.map.L.a * x + piece.map.t.x +
                       f.perturb_amp * std::sin(6.283185307179586 * x);
            };
            out.push_back(Polytope{1, {{lift(lo), 0.0}, {lift(hi), 0.0}}});
        }
        return out;
    }
    for (const AffinePiece& piece : pieces_on_region(f, r))
        out.push_back(affine_image(piece.domain, piece.map));
    return out;
}

Polytope translate(const Polytope& p, Vec shift) {
    Polytope out = p;
    for (Vec& v : out.verts) v = v + shift;
    return out;
}

// Volume of (region + shift grid) intersected with the image set, together
// with the region volume, deciding contains/disjoint/violation on a torus or
// a complex uniformly.
MarkovStatus image_region_status(const std::vector<Polytope>& image, const Region& region,
                                 bool torus, int dim) {
    double covered = 0.0;
    double region_vol = region.raw_volume();
    for (const Polytope& rp : region.polys) {
        double part = 0.0;
        std::vector<Vec> shifts{{0, 0}};
        if (torus) {
            shifts.clear();
            Vec ilo, ihi;
            Vec total_lo{std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity()};
            Vec total_hi{-total_lo.x, -total_lo.y};
            for (const Polytope& q : image) {
                q.bounding_box(ilo, ihi);
                total_lo.x = std::min(total_lo.x, ilo.x);
                total_lo.y = std::min(total_lo.y, ilo.y);
                total_hi.x = std::max(total_hi.x, ihi.x);
                total_hi.y = std::max(total_hi.y, ihi.y);
            }
            int kx0 = static_cast<int>(std::floor(total_lo.x)) - 1;
            int kx1 = static_cast<int>(std::ceil(total_hi.x)) + 1;
            int ky0 = dim == 2 ? static_cast<int>(std::floor(total_lo.y)) - 1 : 0;
            int ky1 = dim == 2 ? static_cast<int>(std::ceil(total_hi.y)) + 1 : 0;
            for (int kx = kx0; kx <= kx1; ++kx)
                for (int ky = ky0; ky <= ky1; ++ky)
                    shifts.push_back({static_cast<double>(kx), static_cast<double>(ky)});
        }
        for (Vec s : shifts) {
            Polytope shifted = translate(rp, s);
            for (const Polytope& q : image)
                part += intersect_convex(shifted, q).volume();
        }
        covered += std::min(part, rp.volume());
    }
    if (covered <= kAreaTol) return MarkovStatus::Disjoint;
    if (covered >= region_vol - 1e-9 * std::max(1.0, region_vol))
        return MarkovStatus::Contains;
    return MarkovStatus::Violation;
}

}  // namespace

std::string TaggedValue::provenance() const {
    if (exact) return "exact";
    return "sampled(N=" + std::to_string(samples) + ", tol=" + std::to_string(tolerance) +
           ")";
}

PartitionReport validate_topological_partition(const Partition& partition,
                                               int cover_samples, std::uint64_t seed) {
    PartitionReport rep;
    rep.open_ok = !partition.regions.empty();
    for (const Region& r : partition.regions)
        if (r.polys.empty() || r.raw_volume() <= kAreaTol) rep.open_ok = false;

    rep.disjoint_ok = true;
    for (std::size_t i = 0; i < partition.regions.size() && rep.disjoint_ok; ++i)
        for (std::size_t j = i + 1; j < partition.regions.size() && rep.disjoint_ok; ++j)
            for (const Polytope& a : partition.regions[i].polys) {
                for (const Polytope& b : partition.regions[j].polys) {
                    Polytope overlap = intersect_convex(a, b);
                    if (overlap.volume() > kAreaTol) {
                        rep.disjoint_ok = false;
                        rep.disjoint_witness = overlap.centroid();
                        break;
                    }
                }
                if (!rep.disjoint_ok) break;
            }

    rep.covers_ok = true;
    RandomStream rs{seed};
    for (int s = 0; s < cover_samples; ++s) {
        Vec p = partition.space.sample(rs, static_cast<std::uint64_t>(s));
        bool near = false;
        for (const Region& r : partition.regions)
            if (r.margin(p) >= -1e-12) {
                near = true;
                break;
            }
        if (!near) {
            rep.covers_ok = false;
            rep.cover_witness = p;
            break;
        }
    }
    double total = 0.0;
    for (const Region& r : partition.regions)
        total += partition.space.normalize(r.raw_volume());
    rep.measure_total = total;
    if (total < 1.0 - 1e-9) rep.covers_ok = false;
    return rep;
}

MarkovReport check_markov(const Partition& partition, const MapFamily& family) {
    require(partition.size() == family.size(), "bad-parameter",
            "partition and family sizes differ");
    MarkovReport rep;
    rep.k = family.size();
    rep.exact = true;
    for (const SmoothMap& f : family.maps)
        if (!f.is_affine()) rep.exact = false;
    bool torus = partition.space.kind != SpaceKind::SimplexComplex;
    rep.status.resize(static_cast<std::size_t>(rep.k * rep.k));
    for (int i = 0; i < rep.k; ++i) {
        auto image = image_polys(family.maps[static_cast<std::size_t>(i)],
                                 partition.regions[static_cast<std::size_t>(i)]);
        for (int j = 0; j < rep.k; ++j) {
            MarkovStatus st = image_region_status(
                image, partition.regions[static_cast<std::size_t>(j)], torus,
                partition.space.dim);
            rep.status[static_cast<std::size_t>(i * rep.k + j)] = st;
            if (st == MarkovStatus::Violation) {
                rep.pass = false;
                rep.violations.emplace_back(i, j);
            }
        }
    }
    return rep;
}

NfoldReport check_nfold_intersection(const Partition& partition, const MapFamily& family,
                                     const Word& word) {
    require(word.length() >= 3, "word-too-short",
            "n-fold intersection needs a word of length >= 3");
    word.validate();
    NfoldReport rep;
    bool torus = partition.space.kind != SpaceKind::SimplexComplex;
    for (std::size_t j = 0; j + 1 < word.length(); ++j) {
        int wi = word.symbols[j];
        int wj = word.symbols[j + 1];
        auto image = image_polys(family.maps[static_cast<std::size_t>(wi)],
                                 partition.regions[static_cast<std::size_t>(wi)]);
        MarkovStatus st = image_region_status(
            image, partition.regions[static_cast<std::size_t>(wj)], torus,
            partition.space.dim);
        if (st == MarkovStatus::Disjoint) {
            rep.vacuous = true;
            rep.empty_link = {static_cast<int>(j), wi};
            rep.holds = true;  // implication with false antecedent
            return rep;
        }
    }
    Cylinder cyl = cylinder(family, word);
    rep.cylinder_nonempty = !cyl.empty;
    rep.holds = rep.cylinder_nonempty;
    return rep;
}

SigmaReport estimate_sigmas(const MapFamily& family, int samples, std::uint64_t seed) {
    require(samples >= 1, "bad-parameter", "sigma estimate needs samples >= 1");
    require(family.p >= 1, "bad-parameter", "family has no expanding members");
    SigmaReport rep;
    rep.exact = true;
    for (const SmoothMap& f : family.maps)
        if (!f.is_affine()) rep.exact = false;
    rep.samples = rep.exact ? 0 : samples;

    auto inf_smin = [&](int i) {
        const SmoothMap& f = family.maps[static_cast<std::size_t>(i)];
        const Region& r = family.partition.regions[static_cast<std::size_t>(i)];
        if (f.is_affine()) {
            double best = std::numeric_limits<double>::infinity();
            for (const AffinePiece& piece : pieces_on_region(f, r))
                best = std::min(best, singular_values(piece.map.L, f.dim).smin);
            return best;
        }
        RandomStream rs = RandomStream{seed}.sub(static_cast<std::uint64_t>(i));
        double best = std::numeric_limits<double>::infinity();
        for (int s = 0; s < samples; ++s) {
            Vec x = region_sample(r, rs, static_cast<std::uint64_t>(s));
            best = std::min(best, singular_values(f.jacobian(x), f.dim).smin);
        }
        return best;
    };

    double s1 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < family.p; ++i) s1 = std::min(s1, inf_smin(i));
    rep.sigma1 = s1;
    rep.not_expanding = !(s1 > 1.0);

    double s2 = 1.0;
    for (int i = family.p; i < family.size(); ++i) s2 = std::max(s2, 1.0 / inf_smin(i));
    rep.sigma2 = s2;
    return rep;
}

bool check_det_condition(const MapFamily& family, int samples, std::uint64_t seed) {
    require(family.q >= 1, "bad-parameter", "det condition applies to families with q >= 1");
    for (int i = family.p; i < family.size(); ++i) {
        const SmoothMap& f = family.maps[static_cast<std::size_t>(i)];
        const Region& r = family.partition.regions[static_cast<std::size_t>(i)];
        if (f.is_affine()) {
            for (const AffinePiece& piece : pieces_on_region(f, r))
                if (std::abs(mat_det_dim(piece.map.L, f.dim)) <=
                    static_cast<double>(family.q))
                    return false;
        } else {
            RandomStream rs = RandomStream{seed}.sub(static_cast<std::uint64_t>(i));
            for (int s = 0; s < samples; ++s) {
                Vec x = region_sample(r, rs, static_cast<std::uint64_t>(s));
                if (std::abs(f.det_at(x)) <= static_cast<double>(family.q)) return false;
            }
        }
    }
    return true;
}

std::optional<double> derive_epsilon0(double sigma1, double sigma2, double c) {
    require(sigma1 > 1.0, "bad-parameter", "sigma1 must exceed 1");
    require(sigma2 >= 1.0, "bad-parameter", "sigma2 must be at least 1");
    require(c > 0.0, "bad-parameter", "c must be positive");
    double eps = (c + std::log(sigma2)) / (std::log(sigma1) + std::log(sigma2));
    if (eps > 0.0 && eps < 1.0) return eps;
    return std::nullopt;
}

ConstantsSheet constants_for(const MapFamily& family, const ConstantsOptions& options) {
    ConstantsSheet sheet;
    SigmaReport sig = estimate_sigmas(family, options.sigma_samples, options.seed);
    sheet.not_expanding = sig.not_expanding;
    sheet.sigma1 = sig.exact ? TaggedValue::exactly(sig.sigma1)
                             : TaggedValue::sampled(sig.sigma1, sig.samples, 1e-4);
    sheet.sigma2 = sig.exact ? TaggedValue::exactly(sig.sigma2)
                             : TaggedValue::sampled(sig.sigma2, sig.samples, 1e-4);

    double c;
    if (options.c_override) {
        c = *options.c_override;
        require(c > 0.0, "bad-parameter", "configured c must be positive");
        sheet.c = TaggedValue::exactly(c);
    } else {
        // bootstrap: half of (exact expanding-area fraction) times log sigma1
        double expanding_measure = 0.0;
        for (int i = 0; i < family.p; ++i)
            expanding_measure += family.partition.region_measure(i);
        require(sig.sigma1 > 1.0, "not-expanding",
                "cannot bootstrap c for a family with sigma1 <= 1");
        c = 0.5 * expanding_measure * std::log(sig.sigma1);
        sheet.c = TaggedValue{c, sig.exact, sig.samples, 0.0};
    }

    if (sig.sigma1 > 1.0) {
        auto eps = derive_epsilon0(sig.sigma1, sig.sigma2, c);
        if (eps)
            sheet.epsilon0 = TaggedValue{*eps, sheet.sigma1.exact && sheet.c.exact,
                                         sig.samples, 1e-12};
    }

    double k1 = K1_bound(family, options.diameter_samples);
    bool k1_exact = family.dim() == 1;
    if (!k1_exact) {
        k1_exact = true;
        for (const Region& r : family.partition.regions)
            if (r.polys.size() != 1) k1_exact = false;
    }
    sheet.K1 = k1_exact ? TaggedValue::exactly(k1)
                        : TaggedValue::sampled(k1, options.diameter_samples, 1e-3);

    double max_df = 0.0;
    bool df_exact = true;
    for (int i = 0; i < family.size(); ++i) {
        const SmoothMap& f = family.maps[static_cast<std::size_t>(i)];
        if (f.is_affine()) {
            for (const AffinePiece& piece : f.pieces)
                if (intersect_convex(piece.domain,
                                     family.partition.regions[static_cast<std::size_t>(i)]
                                         .polys[0])
                        .volume() > 1e-12)
                    max_df = std::max(max_df, singular_values(piece.map.L, f.dim).smax);
        } else {
            // sup |a + 2 pi amp cos(2 pi x)| attained at cos = 1
            max_df = std::max(max_df, f.pieces[0].map.L.a +
                                          6.283185307179586 * f.perturb_amp);
        }
    }
    double k2 = k1 * max_df;
    sheet.K2 = (sheet.K1.exact && df_exact) ? TaggedValue::exactly(k2)
                                            : TaggedValue::sampled(k2, 0, 1e-3);

    double c0 = 0.0, alpha = 1.0;
    for (const SmoothMap& f : family.maps) {
        c0 = std::max(c0, f.C0);
        alpha = std::min(alpha, f.alpha);
    }
    sheet.C0 = TaggedValue::exactly(c0);
    sheet.alpha = TaggedValue::exactly(alpha);

    double l1 = L1_bound(c0, alpha, k2, c);
    sheet.L1 = TaggedValue{l1, sheet.K2.exact, 0, 0.0};
    sheet.L2 = sheet.L1;  // change-of-variable bound introduces no new constant here

    if (options.estimate_radius && sheet.epsilon0.has_value() && !sheet.not_expanding) {
        double r = estimate_r(family, c, options.radius_configs, options.seed);
        sheet.r = TaggedValue::sampled(r, options.radius_configs, 1e-3);
    } else {
        sheet.r = TaggedValue::sampled(0.0, 0, 0.0);
    }
    return sheet;
}

}  // namespace ergolab
