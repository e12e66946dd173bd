#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/systems.hpp"

namespace ergolab {

// Numeric constant together with how it was obtained.
struct TaggedValue {
    double value = 0.0;
    bool exact = false;
    std::int64_t samples = 0;
    double tolerance = 0.0;

    static TaggedValue exactly(double v) { return {v, true, 0, 0.0}; }
    static TaggedValue sampled(double v, std::int64_t n, double tol) {
        return {v, false, n, tol};
    }
    std::string provenance() const;
};

// Every named constant of the expansion/distortion chain. epsilon0 is absent
// when no value in (0,1) satisfies the balance inequality at the given c.
struct ConstantsSheet {
    TaggedValue sigma1, sigma2, c;
    std::optional<TaggedValue> epsilon0;
    TaggedValue K1, K2, C0, alpha, L1, L2, r;
    bool not_expanding = false;

    bool usable() const { return !not_expanding && epsilon0.has_value(); }
};

struct PartitionReport {
    bool open_ok = false;
    bool disjoint_ok = false;
    bool covers_ok = false;
    std::optional<Vec> disjoint_witness;
    std::optional<Vec> cover_witness;
    double measure_total = 0.0;
    bool pass() const { return open_ok && disjoint_ok && covers_ok; }
};

PartitionReport validate_topological_partition(const Partition& partition,
                                               int cover_samples = 4096,
                                               std::uint64_t seed = 7081);

enum class MarkovStatus { Disjoint, Contains, Violation };

struct MarkovReport {
    int k = 0;
    std::vector<MarkovStatus> status;  // row-major (i applies f_i, column j)
    bool exact = false;
    bool pass = true;
    std::vector<std::pair<int, int>> violations;

    MarkovStatus at(int i, int j) const {
        return status[static_cast<std::size_t>(i * k + j)];
    }
};

MarkovReport check_markov(const Partition& partition, const MapFamily& family);

struct NfoldReport {
    bool holds = false;
    bool vacuous = false;  // some consecutive intersection is empty
    std::optional<std::pair<int, int>> empty_link;  // (step, symbol) of empty pair
    bool cylinder_nonempty = false;
};

// (n,omega)-fold intersection: pairwise consecutive image/region intersections
// nonempty must imply the full cylinder is nonempty.
NfoldReport check_nfold_intersection(const Partition& partition, const MapFamily& family,
                                     const Word& word);
inline bool nfold_holds(const NfoldReport& r) { return r.holds; }

struct SigmaReport {
    double sigma1 = 0.0;  // min over expanding members of inf smallest singular value
    double sigma2 = 1.0;  // max over near-neutral members of (inf smin)^{-1}; 1 when q=0
    bool exact = false;
    std::int64_t samples = 0;
    bool not_expanding = false;  // sigma1 <= 1
};

SigmaReport estimate_sigmas(const MapFamily& family, int samples = 4096,
                            std::uint64_t seed = 5519);

// Condition (A3): |det Df_{p+j}(x)| > q on every near-neutral region.
bool check_det_condition(const MapFamily& family, int samples = 4096,
                         std::uint64_t seed = 6143);

// Minimal epsilon0 with sigma1^{-e} sigma2^{1-e} <= e^{-c}, when it lies in
// the open interval (0,1).
std::optional<double> derive_epsilon0(double sigma1, double sigma2, double c);

struct ConstantsOptions {
    std::optional<double> c_override;
    int sigma_samples = 4096;
    int diameter_samples = 128;
    bool estimate_radius = true;
    int radius_configs = 1000;
    std::uint64_t seed = 40961;
};

// Assembles the full constants sheet for a family: sigma estimates, the
// bootstrapped (or overridden) c, epsilon0, inner-diameter constants, the
// distortion constants, and the sampled contraction radius.
ConstantsSheet constants_for(const MapFamily& family,
                             const ConstantsOptions& options = {});

}  // namespace ergolab
