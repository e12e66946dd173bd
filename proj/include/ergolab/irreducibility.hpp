#pragma once

#include <cstdint>
#include <vector>

#include "ergolab/expansion.hpp"
#include "ergolab/systems.hpp"

namespace ergolab {

enum class Direction { Forward, Backward };

// Total orbit of a point under the generated semigroup, as a tree of words.
// Backward trees enumerate every inverse branch per symbol (piecewise maps
// have several preimages).
struct OrbitNode {
    Vec point;
    std::vector<int> word;  // symbols applied (inverted, for backward trees)
};

struct OrbitTree {
    Vec root;
    Direction direction = Direction::Forward;
    int depth = 0;
    std::vector<OrbitNode> nodes;  // deduplicated at resolution 1e-9
    bool truncated = false;        // node budget hit before full depth
};

OrbitTree orbit_tree(const MapFamily& family, Vec x, Direction direction, int depth,
                     std::int64_t node_budget = 1000000);

// Fraction of uniform probe points within eps of a tree node. Density holds
// iff the coverage is 1.
double eps_density(const PhaseSpace& space, const OrbitTree& tree, double eps,
                   int probes, std::uint64_t seed = 11411);

struct WeakCycleReport {
    int samples = 0;
    int depth = 0;
    int hits = 0;
    double hit_fraction = 0.0;
    bool flagged = false;          // evidence against the weak cycle property
    std::vector<Word> certificates;  // words h with sampled x in h(B), up to 8
};

// Dense-backward-orbit test for the weak cycle property: samples points and
// checks whether their backward trees (depth <= D) meet B.
WeakCycleReport weak_cycle_test(const MapFamily& family, const Region& b, int samples,
                                int depth, std::uint64_t seed = 17827);

struct ContractivityRow {
    int depth = 0;
    double best_diameter = 0.0;
    std::vector<int> best_word;
};

struct ContractivityReport {
    double rho0 = 0.0;  // probe ball radius
    std::vector<ContractivityRow> rows;  // depth 0..D
    double rate = 1.0;  // (diam_D / diam_0)^(1/D)
    bool contractive_evidence = false;
};

// Beam search over words minimizing the diameter of the image of B(x, 0.05).
ContractivityReport contractivity_probe(const MapFamily& family, Vec x, int depth,
                                        int beam_width = 64, int boundary_samples = 16);

struct TransitivityMatrix {
    int k = 0;
    int depth = 0;
    std::vector<char> reach;  // row-major: word of length <= depth maps R_i into R_j
    bool all_true = false;

    bool at(int i, int j) const { return reach[static_cast<std::size_t>(i * k + j)] != 0; }
};

// Region-mesh transitivity evidence: for region pair (i, j), does some word
// of length <= depth carry one of the sampled points of R_i into R_j.
TransitivityMatrix transitivity_matrix(const MapFamily& family, int depth,
                                       int samples_per_region = 16,
                                       std::int64_t node_budget = 200000,
                                       std::uint64_t seed = 23719);

}  // namespace ergolab
