#include "ergolab/irreducibility.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace ergolab {

namespace {

constexpr double kDedupRes = 1e-9;

std::uint64_t dedup_key(Vec p, int dim) {
    auto snap = [](double v) {
        return static_cast<std::uint64_t>(
            static_cast<std::int64_t>(std::llround(v / kDedupRes)));
    };
    std::uint64_t h = snap(p.x) * 0x9e3779b97f4a7c15ull;
    if (dim == 2) h ^= snap(p.y) * 0xc2b2ae3d27d4eb4full + (h << 6);
    return h;
}

Vec wrapped_diff(const PhaseSpace& space, Vec a, Vec b) {
    Vec d = a - b;
    if (space.kind == SpaceKind::SimplexComplex) return d;
    d.x -= std::round(d.x);
    if (space.dim == 2) d.y -= std::round(d.y);
    return d;
}

// All preimages of y under family member s, across pieces and torus shifts.
std::vector<Vec> all_preimages(const MapFamily& family, int s, Vec y) {
    const SmoothMap& f = family.maps[static_cast<std::size_t>(s)];
    bool torus = family.space().kind != SpaceKind::SimplexComplex;
    std::vector<Vec> out;
    for (std::size_t pi = 0; pi < f.pieces.size(); ++pi) {
        const AffinePiece& piece = f.pieces[pi];
        Polytope image = f.perturb_amp == 0.0 ? affine_image(piece.domain, piece.map)
                                              : piece.domain;
        Vec ilo, ihi;
        if (f.perturb_amp == 0.0) {
            image.bounding_box(ilo, ihi);
        } else {
            double a = piece.domain.verts[0].x, b = piece.domain.verts[1].x;
            auto lift = [&](double u) {
                return piece.map.L.a * u + piece.map.t.x +
                       f.perturb_amp * std::sin(6.283185307179586 * u);
            };
            ilo = {lift(a), 0.0};
            ihi = {lift(b), 0.0};
        }
        int kx0 = torus ? static_cast<int>(std::floor(ilo.x - y.x)) - 1 : 0;
        int kx1 = torus ? static_cast<int>(std::ceil(ihi.x - y.x)) + 1 : 0;
        int ky0 = torus && f.dim == 2 ? static_cast<int>(std::floor(ilo.y - y.y)) - 1 : 0;
        int ky1 = torus && f.dim == 2 ? static_cast<int>(std::ceil(ihi.y - y.y)) + 1 : 0;
        for (int kx = kx0; kx <= kx1; ++kx)
            for (int ky = ky0; ky <= ky1; ++ky) {
                auto z = branch_preimage(f, static_cast<int>(pi), y,
                                         {static_cast<double>(kx), static_cast<double>(ky)},
                                         1e-9);
                if (z) out.push_back(*z);
            }
    }
    return out;
}

Vec tolerant_eval(const MapFamily& family, int s, Vec x) {
    const SmoothMap& f = family.maps[static_cast<std::size_t>(s)];
    const PhaseSpace& space = family.space();
    Vec w = space.wrap(x);
    int best = -1;
    double best_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.pieces.size(); ++i) {
        double m = f.pieces[i].domain.margin(w);
        if (m > best_margin) {
            best_margin = m;
            best = static_cast<int>(i);
        }
    }
    require(best >= 0 && best_margin > -1e-6, "boundary-hit", "point left the map atlas");
    Vec y = f.pieces[static_cast<std::size_t>(best)].map.apply(w);
    if (f.perturb_amp != 0.0) y.x += f.perturb_amp * std::sin(6.283185307179586 * w.x);
    return space.wrap(y);
}

}  // namespace

OrbitTree orbit_tree(const MapFamily& family, Vec x, Direction direction, int depth,
                     std::int64_t node_budget) {
    require(depth >= 0, "bad-parameter", "tree depth must be >= 0");
    OrbitTree tree;
    tree.root = x;
    tree.direction = direction;
    tree.depth = depth;

    std::unordered_set<std::uint64_t> seen;
    auto push = [&](std::vector<OrbitNode>& into, Vec p, const std::vector<int>& word,
                    int next_symbol) {
        std::uint64_t key = dedup_key(p, family.dim());
        if (!seen.insert(key).second) return false;
        OrbitNode node;
        node.point = p;
        node.word = word;
        if (next_symbol >= 0) node.word.push_back(next_symbol);
        into.push_back(std::move(node));
        return true;
    };

    std::vector<OrbitNode> frontier;
    push(frontier, family.space().wrap(x), {}, -1);
    tree.nodes = frontier;

    for (int d = 0; d < depth; ++d) {
        std::vector<OrbitNode> next;
        for (const OrbitNode& node : frontier) {
            for (int s = 0; s < family.size(); ++s) {
                if (static_cast<std::int64_t>(tree.nodes.size() + next.size()) >=
                    node_budget) {
                    tree.truncated = true;
                    break;
                }
                if (direction == Direction::Forward) {
                    try {
                        push(next, tolerant_eval(family, s, node.point), node.word, s);
                    } catch (const Error&) {
                    }
                } else {
                    for (Vec z : all_preimages(family, s, node.point))
                        push(next, z, node.word, s);
                }
            }
            if (tree.truncated) break;
        }
        tree.nodes.insert(tree.nodes.end(), next.begin(), next.end());
        frontier = std::move(next);
        if (tree.truncated || frontier.empty()) break;
    }
    return tree;
}

double eps_density(const PhaseSpace& space, const OrbitTree& tree, double eps,
                   int probes, std::uint64_t seed) {
    require(eps > 0.0, "bad-parameter", "eps must be positive");
    require(probes >= 1, "bad-parameter", "need at least one probe");
    if (tree.nodes.empty()) return 0.0;

    // uniform grid bucket per eps-cell; probes scan their 3^d neighborhood
    double cell = eps;
    auto key = [&](Vec p) {
        auto idx = [&](double v) {
            return static_cast<std::int64_t>(std::floor(v / cell));
        };
        return idx(p.x) * 1000003 + (space.dim == 2 ? idx(p.y) : 0);
    };
    std::unordered_multimap<std::int64_t, Vec> grid;
    grid.reserve(tree.nodes.size());
    for (const OrbitNode& n : tree.nodes) grid.emplace(key(n.point), n.point);

    RandomStream rs{derive_seed(seed, 0x646e73)};
    int covered = 0;
    for (int i = 0; i < probes; ++i) {
        Vec p = space.sample(rs, static_cast<std::uint64_t>(i));
        bool hit = false;
        double span = space.kind == SpaceKind::SimplexComplex
                          ? 0.0
                          : 1.0;  // torus probes also scan wrapped neighbors
        for (int dx = -1; dx <= 1 && !hit; ++dx)
            for (int dy = -1; dy <= 1 && !hit; ++dy) {
                for (int wx = -1; wx <= 1 && !hit; ++wx)
                    for (int wy = -1; wy <= 1 && !hit; ++wy) {
                        if (span == 0.0 && (wx != 0 || wy != 0)) continue;
                        Vec shifted{p.x + wx * span, p.y + wy * span};
                        std::int64_t cx =
                            static_cast<std::int64_t>(std::floor(shifted.x / cell)) + dx;
                        std::int64_t cy =
                            space.dim == 2 ? static_cast<std::int64_t>(
                                                 std::floor(shifted.y / cell)) +
                                                 dy
                                           : 0;
                        auto range = grid.equal_range(cx * 1000003 + cy);
                        for (auto it = range.first; it != range.second && !hit; ++it)
                            if (norm(wrapped_diff(space, p, it->second)) <= eps)
                                hit = true;
                    }
            }
        if (hit) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(probes);
}

WeakCycleReport weak_cycle_test(const MapFamily& family, const Region& b, int samples,
                                int depth, std::uint64_t seed) {
    require(b.raw_volume() > 0.0, "empty-region", "target set has zero volume");
    require(samples >= 1 && depth >= 0, "bad-parameter", "bad samples or depth");
    WeakCycleReport rep;
    rep.samples = samples;
    rep.depth = depth;

    RandomStream rs{derive_seed(seed, 0x77636b)};
    for (int i = 0; i < samples; ++i) {
        Vec x = family.space().sample(rs, static_cast<std::uint64_t>(i));
        // early-exit backward BFS
        bool hit = false;
        std::vector<int> hit_word;
        std::unordered_set<std::uint64_t> seen;
        std::deque<OrbitNode> queue;
        queue.push_back({family.space().wrap(x), {}});
        seen.insert(dedup_key(queue.front().point, family.dim()));
        std::int64_t budget = 200000;
        while (!queue.empty() && !hit && budget > 0) {
            OrbitNode node = std::move(queue.front());
            queue.pop_front();
            if (b.contains(node.point, 0.0)) {
                hit = true;
                hit_word = node.word;
                break;
            }
            if (static_cast<int>(node.word.size()) >= depth) continue;
            for (int s = 0; s < family.size() && budget > 0; ++s)
                for (Vec z : all_preimages(family, s, node.point)) {
                    --budget;
                    if (!seen.insert(dedup_key(z, family.dim())).second) continue;
                    OrbitNode child;
                    child.point = z;
                    child.word = node.word;
                    child.word.push_back(s);
                    queue.push_back(std::move(child));
                }
        }
        if (hit) {
            ++rep.hits;
            if (rep.certificates.size() < 8) {
                // the backward word, applied forward, carries B onto x
                Word w{hit_word, family.size()};
                std::reverse(w.symbols.begin(), w.symbols.end());
                rep.certificates.push_back(std::move(w));
            }
        }
    }
    rep.hit_fraction = static_cast<double>(rep.hits) / static_cast<double>(samples);
    rep.flagged = rep.hit_fraction < 0.99;
    return rep;
}

ContractivityReport contractivity_probe(const MapFamily& family, Vec x, int depth,
                                        int beam_width, int boundary_samples) {
    require(depth >= 1, "bad-parameter", "probe depth must be >= 1");
    ContractivityReport rep;
    rep.rho0 = 0.05;

    // ball boundary cloud around x (plus center)
    std::vector<Vec> base{family.space().wrap(x)};
    for (int i = 0; i < boundary_samples; ++i) {
        double t = 6.283185307179586 * static_cast<double>(i) /
                   static_cast<double>(boundary_samples);
        Vec p = family.dim() == 1
                    ? Vec{x.x + rep.rho0 * ((i % 2 == 0) ? 1.0 : -1.0) *
                                    (0.5 + 0.5 * static_cast<double>(i) /
                                               static_cast<double>(boundary_samples)),
                          0.0}
                    : Vec{x.x + rep.rho0 * std::cos(t), x.y + rep.rho0 * std::sin(t)};
        p = family.space().wrap(p);
        if (family.space().kind == SpaceKind::SimplexComplex &&
            !family.space().contains(p, 0.0))
            continue;
        base.push_back(p);
    }

    auto cloud_diameter = [&](const std::vector<Vec>& pts) {
        double d = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                d = std::max(d, norm(wrapped_diff(family.space(), pts[i], pts[j])));
        return d;
    };

    struct Beam {
        std::vector<int> word;
        std::vector<Vec> pts;
        double diameter;
    };
    std::vector<Beam> beam{{{}, base, cloud_diameter(base)}};
    rep.rows.push_back({0, beam[0].diameter, {}});

    for (int d = 1; d <= depth; ++d) {
        std::vector<Beam> next;
        for (const Beam& bm : beam)
            for (int s = 0; s < family.size(); ++s) {
                Beam child;
                child.word = bm.word;
                child.word.push_back(s);
                child.pts.reserve(bm.pts.size());
                bool ok = true;
                for (Vec p : bm.pts) {
                    try {
                        child.pts.push_back(tolerant_eval(family, s, p));
                    } catch (const Error&) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
                child.diameter = cloud_diameter(child.pts);
                next.push_back(std::move(child));
            }
        if (next.empty()) break;
        std::sort(next.begin(), next.end(),
                  [](const Beam& a, const Beam& b) { return a.diameter < b.diameter; });
        if (static_cast<int>(next.size()) > beam_width)
            next.resize(static_cast<std::size_t>(beam_width));
        beam = std::move(next);
        rep.rows.push_back({d, beam[0].diameter, beam[0].word});
    }

    int final_depth = rep.rows.back().depth;
    if (final_depth >= 1 && rep.rows.front().best_diameter > 0.0) {
        rep.rate = std::pow(rep.rows.back().best_diameter / rep.rows.front().best_diameter,
                            1.0 / static_cast<double>(final_depth));
        rep.contractive_evidence = rep.rate < 0.95;
    }
    return rep;
}

TransitivityMatrix transitivity_matrix(const MapFamily& family, int depth,
                                       int samples_per_region, std::int64_t node_budget,
                                       std::uint64_t seed) {
    require(depth >= 0, "bad-parameter", "depth must be >= 0");
    TransitivityMatrix mat;
    mat.k = family.size();
    mat.depth = depth;
    mat.reach.assign(static_cast<std::size_t>(mat.k * mat.k), 0);

    RandomStream rs{derive_seed(seed, 0x747261)};
    for (int i = 0; i < mat.k; ++i) {
        std::unordered_set<std::uint64_t> seen;
        std::vector<Vec> frontier;
        for (int s = 0; s < samples_per_region; ++s) {
            Vec p = region_sample(family.partition.regions[static_cast<std::size_t>(i)],
                                  rs.sub(static_cast<std::uint64_t>(i)),
                                  static_cast<std::uint64_t>(s));
            if (seen.insert(dedup_key(p, family.dim())).second) frontier.push_back(p);
        }
        auto mark = [&](Vec p) {
            int r = family.partition.locate(p, 1e-12);
            if (r >= 0) mat.reach[static_cast<std::size_t>(i * mat.k + r)] = 1;
        };
        for (Vec p : frontier) mark(p);
        std::int64_t budget = node_budget;
        for (int d = 0; d < depth && budget > 0; ++d) {
            std::vector<Vec> next;
            for (Vec p : frontier) {
                for (int s = 0; s < family.size() && budget > 0; ++s) {
                    try {
                        Vec y = tolerant_eval(family, s, p);
                        --budget;
                        if (!seen.insert(dedup_key(y, family.dim())).second) continue;
                        mark(y);
                        next.push_back(y);
                    } catch (const Error&) {
                    }
                }
                if (budget <= 0) break;
            }
            frontier = std::move(next);
            if (frontier.empty()) break;
        }
    }

    mat.all_true = true;
    for (char c : mat.reach)
        if (!c) mat.all_true = false;
    return mat;
}

}  // namespace ergolab
