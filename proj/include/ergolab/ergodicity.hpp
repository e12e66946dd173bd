#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/expansion.hpp"
#include "ergolab/systems.hpp"

namespace ergolab {

struct Observable {
    std::string name;
    std::function<double(Vec)> evaluate;
    std::optional<double> integral;  // exact Lebesgue integral when known
};

// Standard test functions: the constant 1, cos(2 pi x1), the first
// coordinate, and the indicator of region 0.
std::vector<Observable> bundled_observables(const MapFamily& family);

struct BirkhoffResult {
    double average = 0.0;
    std::int64_t steps = 0;
    bool truncated = false;  // orbit hit the skeleton; average over the prefix
};

BirkhoffResult birkhoff_average(const MapFamily& family, const Observable& obs, Vec x,
                                const SymbolStream& stream, std::int64_t n,
                                const IterateOptions& options = {});

// Monte Carlo estimate (mean, standard error) of the integral over the
// normalized volume of the space.
std::pair<double, double> lebesgue_integral_mc(const PhaseSpace& space,
                                               const Observable& obs, std::int64_t n,
                                               std::uint64_t seed = 36721);

enum class StreamChoice { IidUniform, ItineraryDriven };

struct ObservableFinding {
    std::string name;
    std::vector<double> averages;  // one Birkhoff average per start
    double mean = 0.0;
    double cross_std = 0.0;
    double integral = 0.0;
    bool integral_exact = false;
    double deviation = 0.0;  // |mean - integral|
    bool pass = false;
};

struct ErgodicityReport {
    std::int64_t horizon = 0;
    int starts = 0;
    std::string stream;  // "iid-uniform" or "itinerary"
    std::uint64_t seed = 0;
    double tol = 0.0;  // max(1e-2, 6/sqrt(n))
    double dither = 0.0;
    int truncated_orbits = 0;
    std::vector<ObservableFinding> findings;
    bool pass = false;
};

// Cross-start Birkhoff average experiment against Lebesgue integrals. Passes
// iff for every observable both the cross-start standard deviation and the
// deviation of the mean from the integral stay below max(1e-2, 6/sqrt(n)).
ErgodicityReport ergodicity_experiment(const MapFamily& family,
                                       const std::vector<Observable>& observables,
                                       int starts, std::int64_t n, StreamChoice stream,
                                       std::uint64_t seed,
                                       const IterateOptions& options = {});

// Uniform box mesh shared by the equidistribution test and the invariant-set
// probe: b cells per axis on tori, b^2 triangles per top simplex on
// complexes.
int box_count(const PhaseSpace& space, int b);
int box_index(const PhaseSpace& space, int b, Vec p);  // -1 outside
double box_measure(const PhaseSpace& space, int b, int idx);  // normalized
Polytope box_poly(const PhaseSpace& space, int b, int idx);

struct InvariantProbeReport {
    int g = 0;
    int rounds_cap = 0;
    int cell_count = 0;
    bool fixpoint = true;
    std::string note;
    std::vector<double> spectrum;  // distinct closure measures, ascending
    double min_measure = 1.0;
    bool ergodic_evidence = false;  // only near-full invariant sets survive
    std::vector<int> minimal_set_cells;  // cells of a minimal-measure closure
};

// Grid-level forward-invariant set search: seeds every cell, closes under
// cell-image outer approximation, and reports the measures of the resulting
// invariant sets. Near-full spectra are ergodicity evidence; a small
// surviving set pinpoints an invariant object.
InvariantProbeReport invariant_set_probe(const MapFamily& family, int g, int rounds);

// Re-check helper: is the cell set closed under the cell-image relation.
bool cells_forward_invariant(const MapFamily& family, int g,
                             const std::vector<int>& cells);

struct EquidistributionReport {
    int cells = 0;
    std::int64_t counted = 0;
    double chi2 = 0.0;
    double normalized = 0.0;  // chi2 / (cells - 1)
    bool truncated = false;
    bool pass = false;  // normalized < 1.5
};

EquidistributionReport equidistribution_test(const MapFamily& family, Vec x,
                                             const SymbolStream& stream, std::int64_t n,
                                             int b, const IterateOptions& options = {});

}  // namespace ergolab
