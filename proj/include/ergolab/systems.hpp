#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/geometry.hpp"
#include "ergolab/symbolic.hpp"

namespace ergolab {

// One branch of a piecewise-affine map: an affine formula on a convex domain.
struct AffinePiece {
    Polytope domain;
    Affine map;
};

// Globally defined piecewise-affine map, optionally with a C2 perturbation
// hook (1D torus only): x -> a x + t + amp*sin(2 pi x) mod 1. The pieces
// cover the closure of the phase space; at a point the branch of the piece
// containing it applies. Families built by the triangulation builders share
// one atlas and differ only in their designated chart region.
struct SmoothMap {
    std::string name;
    int dim = 1;
    bool mod1 = false;
    std::vector<AffinePiece> pieces;
    double perturb_amp = 0.0;
    int chart_region = -1;
    // Hölder data of log|det Df|: |log det Df(x) - log det Df(y)| <= C0 d(x,y)^alpha
    double alpha = 1.0;
    double C0 = 0.0;

    bool is_affine() const { return perturb_amp == 0.0; }
    int piece_at(Vec x, double tol = 1e-12) const;  // -1 if no piece contains x
    Vec eval(Vec x) const;
    Mat jacobian(Vec x) const;
    double det_at(Vec x) const { return mat_det_dim(jacobian(x), dim); }
    // log ||Df(x)^{-1}|| = -log(smallest singular value of Df(x))
    double a_value(Vec x) const;
};

// Preimage of y under the branch of piece `piece`; for torus maps `shift`
// unwraps y by an integer before inverting. Empty when the preimage falls
// outside the piece domain.
std::optional<Vec> branch_preimage(const SmoothMap& f, int piece, Vec y, Vec shift,
                                   double tol = 1e-12);

struct MapFamily {
    Partition partition;
    std::vector<SmoothMap> maps;  // maps[i] charted on partition.regions[i]
    int p = 0;  // expanding members: indices 0..p-1
    int q = 0;  // near-neutral members: indices p..p+q-1

    int size() const { return static_cast<int>(maps.size()); }
    int dim() const { return partition.space.dim; }
    const PhaseSpace& space() const { return partition.space; }
    void validate() const;
};

// Extends a map given on one chart to the whole space. On tori the affine
// formula is already global (taken mod 1); on simplex complexes the extension
// applies, at each point, the branch charted on the piece containing it, so
// the full piece atlas is required.
SmoothMap extend_map(const PhaseSpace& space, const SmoothMap& partial,
                     const std::vector<AffinePiece>& atlas = {});

// Triangulation builder with q = 0: subdivides each simplex of the space
// `depth` times barycentrically and charts one expanding map per piece, each
// sending its piece onto the parent simplex (vertex correspondence chosen to
// maximize the smallest singular value). The circle is treated as one
// 1-simplex with wraparound.
MapFamily build_expanding_family(const PhaseSpace& space, int depth);

// Triangle builder with q = 1: one distinguished piece containing a full edge
// of the triangle (apex at height beta), mapped onto the triangle by the
// edge-preserving correspondence; the complement is fanned into four strictly
// expanding pieces. Rejects beta when no epsilon0 in (0,1) satisfies the
// expansion-balance inequality at the bootstrapped c.
MapFamily build_mostly_expanding_family(const PhaseSpace& space, double beta);

// Doubling with a C2 perturbation of the stated amplitude; C0 and alpha are
// declared from the closed-form Lipschitz bound of log|det Df|.
MapFamily perturbed_doubling_family(double amplitude);

// Controls for the falsification suite.
MapFamily invariant_arcs_control_family();  // two invariant half-circle arcs
MapFamily rotation_control_family();        // rigid rotations, nothing expands

// Expanding torus endomorphism diag(2,2) on the flat 2-torus.
MapFamily torus2_doubling_family();

// Symbol stream that follows the itinerary of x: symbol j is the region of
// the j-th orbit point, which is also the map applied at step j. Symbols are
// computed lazily and cached; reading past a skeleton hit throws
// "boundary-hit".
SymbolStream make_itinerary_stream(const MapFamily& family, Vec x);

}  // namespace ergolab
