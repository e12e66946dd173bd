#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ergolab/expansion.hpp"
#include "ergolab/systems.hpp"

namespace ergolab {

enum class TriState { Yes, No, Unknown };

// Cylinder C^n[w0..w_{n-1}]: points whose first n itinerary symbols equal the
// word. For piecewise-monotone 1D maps and affine families the set is
// computed exactly as a union of convex polytopes; otherwise it is
// rejection-sampled.
struct Cylinder {
    Word word;
    bool exact = false;
    std::vector<Polytope> polys;  // exact case
    std::vector<Vec> samples;
    bool empty = false;
    bool emptiness_certain = true;  // false when only sampling failed to hit
    double sampled_volume = 0.0;    // acceptance-rate estimate when not exact

    double raw_volume() const;
};

// Closure membership by replay: the first n regions visited by p match the
// word within tol. Works for exact and sampled cylinders alike.
bool cylinder_contains(const MapFamily& family, const Cylinder& cyl, Vec p, double tol);

Cylinder cylinder(const MapFamily& family, const Word& word, int samples = 100000,
                  std::uint64_t seed = 3301);

struct HyperbolicCylinderReport {
    TriState state = TriState::Unknown;
    std::optional<Vec> witness;  // a sample violating Eq. (2) in the No case
    std::int64_t samples = 0;
};

// Is the word length a hyperbolic time throughout the cylinder? Exact
// (yes/no) for affine families where the a-terms are constant per region;
// sampled otherwise (all samples passing gives unknown(N)).
HyperbolicCylinderReport is_hyperbolic_cylinder(const MapFamily& family,
                                                const Cylinder& cyl, double c);

struct DiameterDecayRow {
    int j = 0;  // steps left to apply: image f^{n-j}(closure C^n)
    double diameter = 0.0;
    double bound = 0.0;
    bool ok = false;
};

struct DiameterDecayReport {
    std::vector<DiameterDecayRow> rows;  // j = 0 .. n
    bool pass = false;
};

// Intermediate-image diameters of a hyperbolic cylinder against the
// K2 e^{-jc/2} bound (slack 1e-9). Throws "not-hyperbolic" when the cylinder
// fails the hyperbolicity check at this c.
DiameterDecayReport diameter_decay_check(const MapFamily& family, const Cylinder& cyl,
                                         double c, double K2);

// K2 = K1 * max_i sup{||Df_i(x)|| : x in R_i}, with K1 the maximum inner
// diameter over region closures.
double K2_bound(const MapFamily& family, int diameter_samples = 128);
double K1_bound(const MapFamily& family, int diameter_samples = 128);

// L1 = exp(C0 K2^alpha / (1 - e^{-c alpha/2})): the geometric-series closed
// form of the distortion constant.
double L1_bound(double C0, double alpha, double K2, double c);

// Product over the word of |det Df| ratios along the two orbits. Both points
// must lie in the closure of the word's cylinder.
double distortion_ratio(const MapFamily& family, const Word& word, Vec x, Vec y);

struct MeasureRatioReport {
    double m1 = 0, m2 = 0;          // sampled measures of A1, A2
    double im1 = 0, im2 = 0;        // sampled measures of the images
    double ratio = 0, image_ratio = 0;
    double L2 = 1, stat_tol = 0;
    bool pass = false;
};

// Eq.-(10)-style check: the measure ratio of two subsets of a hyperbolic
// cylinder is preserved by the word map up to L2, within 3/sqrt(N).
MeasureRatioReport measure_ratio_check(const MapFamily& family, const Word& word,
                                       const Region& a1, const Region& a2, int n_samples,
                                       double L2, std::uint64_t seed = 9413);

struct DynamicalBallRow {
    int j = 0;
    double max_backward_norm = 0.0;  // max over samples of prod 1/smin over j steps
    double bound = 0.0;
    bool ok = false;
};

struct DynamicalBallReport {
    int escapes = 0;       // samples whose inverse branch left the region chain
    int checked = 0;
    bool membership_ok = false;  // pullbacks stayed within r of the orbit
    bool eq5_ok = false;         // ||Df(z)^{-1}|| <= e^{c/2} ||Df(y)^{-1}||
    std::vector<DynamicalBallRow> rows;
    bool pass = false;
};

// Pulls ball samples around f^n(x) back through the inverse branch of the
// orbit and verifies dynamical-ball membership, backward contraction at rate
// e^{-jc/2}, and the local norm-comparison inequality. Requires n to be a
// hyperbolic time for x at level c.
DynamicalBallReport dynamical_ball_check(const MapFamily& family, Vec x,
                                         const SymbolStream& stream, int n, double r,
                                         double c, int samples = 512,
                                         std::uint64_t seed = 15121);

// Largest radius in the dyadic grid {K1 2^{-i}} at which the norm-comparison
// inequality holds at sampled hyperbolic configurations.
double estimate_r(const MapFamily& family, double c, int configs = 1000,
                  std::uint64_t seed = 27191);

}  // namespace ergolab
