#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ergolab/systems.hpp"

namespace ergolab {

// Options for orbit iteration. The dither injects a seeded perturbation of
// the stated amplitude after every step. Exact binary maps (doubling-type
// atlases) otherwise collapse onto dyadic fixed points in floating point:
// multiplication by 2 is exact, so mantissa bits shift out and long orbits
// die. At amplitude ~2^-48 the dithered sequence is a pseudo-orbit that is
// shadowed by a true orbit of the expanding system, so long-run statistics
// are those of a genuine orbit while short replays stay within 1e-10.
struct IterateOptions {
    double dither = 0.0;
    std::uint64_t dither_seed = 0;
    double boundary_tol = 1e-12;
};

constexpr double kDefaultDither = 0x1.0p-48;

// Realized orbital branch: points, symbols, visited regions, and the per-step
// log-expansion terms a_j = log ||Df_{omega_j}(y_j)^{-1}||.
struct OrbitRecord {
    Vec start;
    Word symbols;
    std::vector<Vec> points;   // y_0 .. y_n
    std::vector<double> a;
    std::vector<int> regions;  // region of y_j, -1 if within tol of the skeleton
    bool truncated = false;
    std::string error_token;

    std::size_t steps() const { return a.size(); }
};

// Streaming orbit walker used by iterate and by the long-horizon experiments
// that must not materialize full records.
class OrbitWalker {
public:
    OrbitWalker(const MapFamily& family, Vec start, SymbolStream stream,
                IterateOptions options = {});

    struct Step {
        Vec point;   // y_j before applying the map
        int region;  // region of y_j
        int symbol;  // map applied at step j
        double a;
    };

    // Advances by one step; returns false when the orbit hit the skeleton
    // (the walker then stays at the terminal state).
    bool next(Step& out);
    Vec current() const { return current_; }
    bool dead() const { return dead_; }

private:
    const MapFamily* family_;
    SymbolStream stream_;
    IterateOptions options_;
    RandomStream dither_;
    Vec current_;
    std::uint64_t index_ = 0;
    bool dead_ = false;
    bool itinerary_mode_;
};

// Forward orbit of length n. Throws "boundary-start" if x begins on the
// skeleton; an orbit hitting the skeleton later is returned truncated with
// error token "boundary-hit".
OrbitRecord iterate(const MapFamily& family, Vec x, const SymbolStream& stream,
                    std::size_t n, const IterateOptions& options = {});

// Deterministic itinerary word of x. Throws "boundary-hit" (with the step
// index in the message) if the orbit reaches the skeleton before n steps.
Word itinerary(const MapFamily& family, const Partition& partition, Vec x,
               std::size_t n);

struct HyperbolicTimeSet {
    double c = 0.0;
    std::int64_t horizon = 0;
    std::vector<std::int64_t> times;  // sorted, in [1, horizon]
};

// All hyperbolic times of the sequence a at level c: n such that every suffix
// window of the first n terms sums to at most -c times its length. Single
// forward scan with a running prefix-sum minimum; ties count as hyperbolic.
HyperbolicTimeSet pliss_times(const std::vector<double>& a, double c);

// Literal O(N^2) double loop over (n, k); the testing oracle for pliss_times.
HyperbolicTimeSet pliss_times_bruteforce(const std::vector<double>& a, double c);

double hyperbolic_frequency(const HyperbolicTimeSet& times, std::int64_t horizon);

// Fraction of steps spent in the expanding regions (index < p).
double expanding_fraction(const OrbitRecord& record, int p);

struct NueReport {
    double c = 0.0;
    std::vector<std::pair<std::int64_t, double>> ladder;  // (n, S_n/n)
    double final_average = 0.0;
    bool pass = false;
    bool truncated = false;
};

// Reports S_n/n over a ladder of horizons and whether the orbit meets the
// non-uniform expansion inequality S_n/n <= -c at the full horizon.
NueReport check_orbital_nue(const OrbitRecord& record, double c);

}  // namespace ergolab
