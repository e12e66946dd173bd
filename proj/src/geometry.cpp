#include "ergolab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ergolab {

namespace {

constexpr double kDegenerateVol = 1e-14;

double shoelace(const std::vector<Vec>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec& a = v[i];
        const Vec& b = v[(i + 1) % v.size()];
        s += cross(a, b);
    }
    return 0.5 * s;
}

std::vector<Vec> dedupe_ring(std::vector<Vec> v, double tol) {
    std::vector<Vec> out;
    for (const Vec& p : v) {
        if (out.empty() || norm(p - out.back()) > tol) out.push_back(p);
    }
    while (out.size() > 1 && norm(out.front() - out.back()) <= tol) out.pop_back();
    return out;
}

}  // namespace

double Polytope::volume() const {
    if (verts.empty()) return 0.0;
    if (dim == 1) return verts.size() < 2 ? 0.0 : verts[1].x - verts[0].x;
    return verts.size() < 3 ? 0.0 : std::abs(shoelace(verts));
}

double Polytope::diameter() const {
    double best = 0.0;
    for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = i + 1; j < verts.size(); ++j)
            best = std::max(best, norm(verts[i] - verts[j]));
    return best;
}

double Polytope::margin(Vec p) const {
    if (verts.empty()) return -std::numeric_limits<double>::infinity();
    if (dim == 1) return std::min(p.x - verts[0].x, verts[1].x - p.x);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < verts.size(); ++i) {
        Vec a = verts[i];
        Vec e = verts[(i + 1) % verts.size()] - a;
        double len = norm(e);
        if (len < 1e-300) continue;
        m = std::min(m, cross(e, p - a) / len);
    }
    return m;
}

void Polytope::bounding_box(Vec& lo, Vec& hi) const {
    lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    hi = {-lo.x, -lo.y};
    for (const Vec& v : verts) {
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
    }
}

Vec Polytope::centroid() const {
    Vec c{0, 0};
    for (const Vec& v : verts) c = c + v;
    double n = static_cast<double>(verts.size());
    return {c.x / n, c.y / n};
}

Polytope make_interval(double lo, double hi) {
    require(hi > lo, "bad-parameter", "interval needs lo < hi");
    return Polytope{1, {{lo, 0.0}, {hi, 0.0}}};
}

Polytope make_polygon(std::vector<Vec> verts) {
    verts = dedupe_ring(std::move(verts), 1e-13);
    if (verts.size() >= 3 && shoelace(verts) < 0.0)
        std::reverse(verts.begin(), verts.end());
    return Polytope{2, std::move(verts)};
}

Polytope clip_halfplane(const Polytope& poly, Vec n, double b) {
    if (poly.verts.empty()) return poly;
    if (poly.dim == 1) {
        double lo = poly.verts[0].x, hi = poly.verts[1].x;
        if (n.x > 0) hi = std::min(hi, b / n.x);
        else if (n.x < 0) lo = std::max(lo, b / n.x);
        else if (b < 0) return Polytope{1, {}};
        if (hi - lo <= 0.0) return Polytope{1, {}};
        return Polytope{1, {{lo, 0.0}, {hi, 0.0}}};
    }
    std::vector<Vec> out;
    std::size_t m = poly.verts.size();
    for (std::size_t i = 0; i < m; ++i) {
        Vec a = poly.verts[i];
        Vec c = poly.verts[(i + 1) % m];
        double da = dot(n, a) - b;
        double dc = dot(n, c) - b;
        if (da <= 0.0) out.push_back(a);
        if ((da < 0.0 && dc > 0.0) || (da > 0.0 && dc < 0.0)) {
            double s = da / (da - dc);
            out.push_back(a + s * (c - a));
        }
    }
    out = dedupe_ring(std::move(out), 1e-13);
    if (out.size() < 3 || std::abs(shoelace(out)) < 1e-16) return Polytope{2, {}};
    return Polytope{2, std::move(out)};
}

Polytope intersect_convex(const Polytope& a, const Polytope& b) {
    require(a.dim == b.dim, "dimension-mismatch", "polytope dimensions differ");
    if (a.verts.empty() || b.verts.empty()) return Polytope{a.dim, {}};
    if (a.dim == 1) {
        double lo = std::max(a.verts[0].x, b.verts[0].x);
        double hi = std::min(a.verts[1].x, b.verts[1].x);
        if (hi - lo <= 0.0) return Polytope{1, {}};
        return Polytope{1, {{lo, 0.0}, {hi, 0.0}}};
    }
    Polytope cur = a;
    std::size_t m = b.verts.size();
    for (std::size_t i = 0; i < m && !cur.verts.empty(); ++i) {
        Vec p = b.verts[i];
        Vec e = b.verts[(i + 1) % m] - p;
        // interior of b is on the left of each CCW edge: cross(e, x - p) >= 0
        Vec n{e.y, -e.x};
        cur = clip_halfplane(cur, n, dot(n, p));
    }
    return cur;
}

Affine affine_inverse(const Affine& a) {
    Mat li = inverse(a.L);
    Vec t = li.apply(a.t);
    return {li, {-t.x, -t.y}};
}

Polytope affine_image(const Polytope& poly, const Affine& a) {
    Polytope out{poly.dim, {}};
    out.verts.reserve(poly.verts.size());
    for (const Vec& v : poly.verts) out.verts.push_back(a.apply(v));
    if (poly.dim == 1) {
        if (out.verts.size() == 2 && out.verts[0].x > out.verts[1].x)
            std::swap(out.verts[0], out.verts[1]);
    } else if (out.verts.size() >= 3 && shoelace(out.verts) < 0.0) {
        std::reverse(out.verts.begin(), out.verts.end());
    }
    return out;
}

double Simplex::volume() const {
    if (dim == 1) return std::abs(verts[1].x - verts[0].x);
    return 0.5 * std::abs(cross(verts[1] - verts[0], verts[2] - verts[0]));
}

Vec Simplex::barycenter() const {
    Vec c{0, 0};
    for (const Vec& v : verts) c = c + v;
    double n = static_cast<double>(verts.size());
    return {c.x / n, c.y / n};
}

Polytope Simplex::to_polytope() const {
    if (dim == 1) {
        double lo = std::min(verts[0].x, verts[1].x);
        double hi = std::max(verts[0].x, verts[1].x);
        return Polytope{1, {{lo, 0.0}, {hi, 0.0}}};
    }
    return make_polygon(verts);
}

void Simplex::validate() const {
    require(static_cast<int>(verts.size()) == dim + 1, "degenerate-simplex",
            "simplex needs dim+1 vertices");
    require(volume() > kDegenerateVol, "degenerate-simplex",
            "simplex volume below degeneracy threshold");
}

std::vector<Simplex> barycentric_subdivision(const Simplex& s) {
    s.validate();
    std::vector<Simplex> out;
    std::vector<int> perm(static_cast<std::size_t>(s.dim) + 1);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        Simplex piece{s.dim, {}};
        Vec acc{0, 0};
        for (int i = 0; i <= s.dim; ++i) {
            acc = acc + s.verts[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
            piece.verts.push_back((1.0 / (i + 1)) * acc);
        }
        if (s.dim == 1) {
            if (piece.verts[0].x > piece.verts[1].x) std::swap(piece.verts[0], piece.verts[1]);
        } else if (cross(piece.verts[1] - piece.verts[0], piece.verts[2] - piece.verts[0]) < 0.0) {
            std::swap(piece.verts[1], piece.verts[2]);
        }
        out.push_back(std::move(piece));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

Affine affine_onto(const Simplex& sub, const Simplex& whole) {
    require(sub.dim == whole.dim, "dimension-mismatch", "simplex dimensions differ");
    sub.validate();
    whole.validate();
    if (sub.dim == 1) {
        double a = (whole.verts[1].x - whole.verts[0].x) / (sub.verts[1].x - sub.verts[0].x);
        double t = whole.verts[0].x - a * sub.verts[0].x;
        return {Mat{a, 0, 0, 1}, Vec{t, 0}};
    }
    Vec e1 = sub.verts[1] - sub.verts[0];
    Vec e2 = sub.verts[2] - sub.verts[0];
    Vec w1 = whole.verts[1] - whole.verts[0];
    Vec w2 = whole.verts[2] - whole.verts[0];
    Mat e{e1.x, e2.x, e1.y, e2.y};
    Mat w{w1.x, w2.x, w1.y, w2.y};
    Mat l = w * inverse(e);
    Vec t = whole.verts[0] - l.apply(sub.verts[0]);
    return {l, t};
}

double Region::raw_volume() const {
    double s = 0.0;
    for (const Polytope& p : polys) s += p.volume();
    return s;
}

double Region::margin(Vec p) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const Polytope& poly : polys) best = std::max(best, poly.margin(p));
    return best;
}

double Region::diameter_upper() const {
    std::vector<Vec> all;
    for (const Polytope& p : polys)
        all.insert(all.end(), p.verts.begin(), p.verts.end());
    double best = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            best = std::max(best, norm(all[i] - all[j]));
    return best;
}

double PhaseSpace::raw_total() const {
    if (kind != SpaceKind::SimplexComplex) return 1.0;
    double s = 0.0;
    for (const Simplex& t : complex) s += t.volume();
    return s;
}

double PhaseSpace::distance(Vec a, Vec b) const {
    if (kind == SpaceKind::SimplexComplex) return norm(a - b);
    double dx = std::abs(a.x - b.x);
    dx = std::min(dx, 1.0 - dx);
    if (dim == 1) return dx;
    double dy = std::abs(a.y - b.y);
    dy = std::min(dy, 1.0 - dy);
    return std::hypot(dx, dy);
}

double PhaseSpace::diameter_bound() const {
    if (kind == SpaceKind::Torus1) return 0.5;
    if (kind == SpaceKind::Torus2) return std::hypot(0.5, 0.5);
    double best = 0.0;
    std::vector<Vec> all;
    for (const Simplex& t : complex)
        all.insert(all.end(), t.verts.begin(), t.verts.end());
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            best = std::max(best, norm(all[i] - all[j]));
    return best;
}

Vec PhaseSpace::wrap(Vec p) const {
    if (kind == SpaceKind::SimplexComplex) return p;
    auto w = [](double v) {
        double r = v - std::floor(v);
        return r >= 1.0 ? 0.0 : r;
    };
    if (dim == 1) return {w(p.x), 0.0};
    return {w(p.x), w(p.y)};
}

Vec PhaseSpace::sample(const RandomStream& rs, std::uint64_t index) const {
    if (kind == SpaceKind::Torus1) return {rs.u01(2 * index), 0.0};
    if (kind == SpaceKind::Torus2) return {rs.u01(2 * index), rs.u01(2 * index + 1)};
    double total = raw_total();
    double pick = rs.u01(3 * index) * total;
    std::size_t chosen = complex.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < complex.size(); ++i) {
        acc += complex[i].volume();
        if (pick <= acc) {
            chosen = i;
            break;
        }
    }
    const Simplex& t = complex[chosen];
    double u = rs.u01(3 * index + 1);
    if (dim == 1) return t.verts[0] + u * (t.verts[1] - t.verts[0]);
    double v = rs.u01(3 * index + 2);
    if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    return t.verts[0] + u * (t.verts[1] - t.verts[0]) + v * (t.verts[2] - t.verts[0]);
}

bool PhaseSpace::contains(Vec p, double tol) const {
    if (kind != SpaceKind::SimplexComplex) return true;
    for (const Simplex& t : complex)
        if (t.to_polytope().contains(p, tol)) return true;
    return false;
}

PhaseSpace torus_space(int dim) {
    require(dim == 1 || dim == 2, "bad-parameter", "torus dimension must be 1 or 2");
    PhaseSpace s;
    s.kind = dim == 1 ? SpaceKind::Torus1 : SpaceKind::Torus2;
    s.dim = dim;
    return s;
}

PhaseSpace simplex_complex_space(std::vector<Simplex> simplices) {
    require(!simplices.empty(), "bad-parameter", "complex needs at least one simplex");
    int d = simplices.front().dim;
    for (const Simplex& t : simplices) {
        t.validate();
        require(t.dim == d, "dimension-mismatch", "mixed simplex dimensions in complex");
    }
    PhaseSpace s;
    s.kind = SpaceKind::SimplexComplex;
    s.dim = d;
    s.complex = std::move(simplices);
    return s;
}

int Partition::locate(Vec p, double tol) const {
    p = space.wrap(p);
    for (int i = 0; i < size(); ++i)
        if (regions[static_cast<std::size_t>(i)].margin(p) > tol) return i;
    return -1;
}

Vec region_sample(const Region& r, const RandomStream& rs, std::uint64_t index) {
    require(!r.polys.empty(), "empty-region", "cannot sample an empty region");
    double total = r.raw_volume();
    require(total > 0.0, "empty-region", "cannot sample a zero-volume region");
    double pick = rs.u01(4 * index) * total;
    const Polytope* chosen = &r.polys.back();
    double acc = 0.0;
    for (const Polytope& p : r.polys) {
        acc += p.volume();
        if (pick <= acc) {
            chosen = &p;
            break;
        }
    }
    if (chosen->dim == 1) {
        double u = rs.u01(4 * index + 1);
        return {chosen->verts[0].x + u * (chosen->verts[1].x - chosen->verts[0].x), 0.0};
    }
    // fan triangulation from vertex 0, triangle picked by area
    const std::vector<Vec>& v = chosen->verts;
    double area_total = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
        area_total += 0.5 * std::abs(cross(v[i] - v[0], v[i + 1] - v[0]));
    double pick2 = rs.u01(4 * index + 1) * area_total;
    std::size_t tri = v.size() - 2;
    acc = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        acc += 0.5 * std::abs(cross(v[i] - v[0], v[i + 1] - v[0]));
        if (pick2 <= acc) {
            tri = i;
            break;
        }
    }
    double u = rs.u01(4 * index + 2);
    double w = rs.u01(4 * index + 3);
    if (u + w > 1.0) {
        u = 1.0 - u;
        w = 1.0 - w;
    }
    return v[0] + u * (v[tri] - v[0]) + w * (v[tri + 1] - v[0]);
}

namespace {

// 1D inner diameter: merge intervals (wrap-aware on the circle). A connected
// union of arcs has inner diameter equal to its length; the full circle has
// intrinsic diameter 1/2; a disconnected region has none.
double inner_diameter_1d(const PhaseSpace& space, const Region& r) {
    std::vector<std::pair<double, double>> iv;
    for (const Polytope& p : r.polys)
        if (p.volume() > 0) iv.emplace_back(p.verts[0].x, p.verts[1].x);
    require(!iv.empty(), "empty-region", "inner diameter of empty region");
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<double, double>> merged{iv.front()};
    for (std::size_t i = 1; i < iv.size(); ++i) {
        if (iv[i].first <= merged.back().second + 1e-12)
            merged.back().second = std::max(merged.back().second, iv[i].second);
        else
            merged.push_back(iv[i]);
    }
    if (space.kind == SpaceKind::Torus1 && merged.size() > 1) {
        // join across 0 == 1
        if (merged.front().first <= 1e-12 && merged.back().second >= 1.0 - 1e-12) {
            merged.front().first = merged.back().first - 1.0;
            merged.pop_back();
        }
    }
    if (merged.size() > 1) return std::numeric_limits<double>::infinity();
    double len = merged.front().second - merged.front().first;
    if (space.kind == SpaceKind::Torus1 && len >= 1.0 - 1e-12) return 0.5;
    return len;
}

}  // namespace

double inner_diameter(const PhaseSpace& space, const Region& r, int samples,
                      std::uint64_t seed) {
    require(samples >= 2, "bad-parameter", "inner diameter needs at least 2 samples");
    require(!r.polys.empty() && r.raw_volume() > 0, "empty-region",
            "inner diameter of empty region");
    if (space.dim == 1) return inner_diameter_1d(space, r);

    if (r.polys.size() == 1) return r.polys[0].diameter();

    // Shortest paths inside a polygon union bend only at polytope vertices,
    // so the vertex set plus the sampled query points is an exact node set up
    // to the segment-membership test below.
    std::vector<Vec> nodes;
    for (const Polytope& p : r.polys)
        nodes.insert(nodes.end(), p.verts.begin(), p.verts.end());
    std::size_t n_struct = nodes.size();
    RandomStream rs{seed};
    for (int i = 0; i < samples; ++i)
        nodes.push_back(region_sample(r, rs, static_cast<std::uint64_t>(i)));

    auto inside = [&](Vec p) { return r.contains(p, 1e-9); };
    auto segment_inside = [&](Vec a, Vec b) {
        const int k = 48;
        for (int i = 1; i < k; ++i) {
            double s = static_cast<double>(i) / k;
            if (!inside(a + s * (b - a))) return false;
        }
        return true;
    };

    std::size_t n = nodes.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> d(n * n, inf);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (segment_inside(nodes[i], nodes[j]))
                d[i * n + j] = d[j * n + i] = norm(nodes[i] - nodes[j]);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            double dik = d[i * n + k];
            if (dik == inf) continue;
            for (std::size_t j = 0; j < n; ++j) {
                double alt = dik + d[k * n + j];
                if (alt < d[i * n + j]) d[i * n + j] = alt;
            }
        }
    double best = 0.0;
    for (std::size_t i = n_struct; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (d[i * n + j] == inf) return inf;
            best = std::max(best, d[i * n + j]);
        }
    return best;
}

}  // namespace ergolab
