#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ergolab/la.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

// Convex polytope in ambient dimension 1 or 2. In 1D the vertex list is the
// pair {lo, hi}; in 2D it is a counterclockwise polygon. Vertices may lie
// outside the torus fundamental domain when a set is tracked on the universal
// cover (unwrapped images); wrapping is the caller's concern.
struct Polytope {
    int dim = 1;
    std::vector<Vec> verts;

    double volume() const;
    double diameter() const;  // max vertex-pair distance (exact for convex sets)
    // Signed inset distance: positive inside, negative outside, zero on the
    // boundary. The 2D value is exact for convex polygons.
    double margin(Vec p) const;
    bool contains(Vec p, double tol) const { return margin(p) >= -tol; }
    void bounding_box(Vec& lo, Vec& hi) const;
    Vec centroid() const;
};

Polytope make_interval(double lo, double hi);
Polytope make_polygon(std::vector<Vec> verts);  // reorders to CCW

// Clip a convex polytope by the half-plane {p : dot(n, p) <= b} (2D) or the
// ray constraint in 1D. Returns an empty polytope when nothing survives.
Polytope clip_halfplane(const Polytope& poly, Vec n, double b);
Polytope intersect_convex(const Polytope& a, const Polytope& b);

// Image under an affine map y = L x + t; convexity is preserved.
struct Affine {
    Mat L;
    Vec t;
    Vec apply(Vec p) const { return L.apply(p) + t; }
};
Affine affine_inverse(const Affine& a);
Polytope affine_image(const Polytope& poly, const Affine& a);

// Embedded m-simplex, m in {1, 2}.
struct Simplex {
    int dim = 1;
    std::vector<Vec> verts;  // dim + 1 vertices

    double volume() const;
    Vec barycenter() const;
    Polytope to_polytope() const;
    void validate() const;  // throws "degenerate-simplex"
};

// All (m+1)! barycentric pieces; closed union equals the input, interiors
// disjoint. 1D pieces are returned with ascending vertex order so that chart
// maps built on them are orientation-preserving.
std::vector<Simplex> barycentric_subdivision(const Simplex& s);

// The affine map sending vertex i of `sub` to vertex i of `whole` exactly.
Affine affine_onto(const Simplex& sub, const Simplex& whole);

// Open region given as the interior of a union of convex polytopes with
// pairwise disjoint interiors.
struct Region {
    std::vector<Polytope> polys;

    double raw_volume() const;
    double margin(Vec p) const;  // max over member polytopes
    bool contains(Vec p, double tol) const { return margin(p) >= -tol; }
    double diameter_upper() const;  // max over all vertex pairs of the union
};

enum class SpaceKind { Torus1, Torus2, SimplexComplex };

// Flat model spaces: the circle, the flat 2-torus, and embedded simplicial
// complexes with m in {1, 2}. Lebesgue measure is normalized to 1.
struct PhaseSpace {
    SpaceKind kind = SpaceKind::Torus1;
    int dim = 1;
    std::vector<Simplex> complex;  // SimplexComplex only

    double raw_total() const;
    double normalize(double raw) const { return raw / raw_total(); }
    double distance(Vec a, Vec b) const;
    double diameter_bound() const;
    Vec wrap(Vec p) const;  // identity on complexes
    Vec sample(const RandomStream& rs, std::uint64_t index) const;
    bool contains(Vec p, double tol) const;
};

PhaseSpace torus_space(int dim);
PhaseSpace simplex_complex_space(std::vector<Simplex> simplices);

struct Partition {
    PhaseSpace space;
    std::vector<Region> regions;

    int size() const { return static_cast<int>(regions.size()); }
    // Region index whose interior contains p with margin > tol, or -1 when p
    // is within tol of the skeleton (or outside every region).
    int locate(Vec p, double tol) const;
    double region_measure(int i) const { return space.normalize(regions[i].raw_volume()); }
};

// Uniform sample from a region (used by cylinder rejection sampling and the
// Monte Carlo checks). Pure in (stream, index).
Vec region_sample(const Region& r, const RandomStream& rs, std::uint64_t index);

// Supremum over sampled point pairs of the shortest path length inside the
// closure of the region. Convex regions reduce to the Euclidean diameter;
// unions go through a visibility graph over polytope vertices and samples.
// Returns +infinity for regions sampled as disconnected.
double inner_diameter(const PhaseSpace& space, const Region& r, int samples,
                      std::uint64_t seed = 20260814);

}  // namespace ergolab
