#include "ergolab/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ergolab {

OrbitWalker::OrbitWalker(const MapFamily& family, Vec start, SymbolStream stream,
                         IterateOptions options)
    : family_(&family),
      stream_(std::move(stream)),
      options_(options),
      dither_{options.dither_seed},
      current_(start),
      itinerary_mode_(stream_.kind == SymbolStream::Kind::ItineraryDriven) {}

bool OrbitWalker::next(Step& out) {
    if (dead_) return false;
    int region = family_->partition.locate(current_, options_.boundary_tol);
    if (region < 0) {
        dead_ = true;
        return false;
    }
    int symbol = itinerary_mode_ ? region : stream_.at(index_);
    const SmoothMap& f = family_->maps[static_cast<std::size_t>(symbol)];
    out.point = current_;
    out.region = region;
    out.symbol = symbol;
    out.a = f.a_value(current_);
    Vec next_pt = f.eval(current_);
    if (options_.dither > 0.0) {
        Vec cand = next_pt;
        cand.x += (dither_.u01(2 * index_) - 0.5) * options_.dither;
        if (family_->dim() == 2)
            cand.y += (dither_.u01(2 * index_ + 1) - 0.5) * options_.dither;
        cand = family_->space().wrap(cand);
        if (family_->space().contains(cand, 0.0)) next_pt = cand;
    }
    current_ = next_pt;
    ++index_;
    return true;
}

OrbitRecord iterate(const MapFamily& family, Vec x, const SymbolStream& stream,
                    std::size_t n, const IterateOptions& options) {
    require(family.partition.locate(x, options.boundary_tol) >= 0, "boundary-start",
            "orbit start lies on the partition skeleton");
    OrbitRecord rec;
    rec.start = x;
    rec.symbols.alphabet_size = family.size();
    rec.points.push_back(x);
    OrbitWalker walker(family, x, stream, options);
    OrbitWalker::Step step;
    for (std::size_t j = 0; j < n; ++j) {
        if (!walker.next(step)) {
            rec.truncated = true;
            rec.error_token = "boundary-hit";
            break;
        }
        rec.symbols.symbols.push_back(step.symbol);
        rec.regions.push_back(step.region);
        rec.a.push_back(step.a);
        rec.points.push_back(walker.current());
    }
    return rec;
}

Word itinerary(const MapFamily& family, const Partition& partition, Vec x,
               std::size_t n) {
    Word w{{}, family.size()};
    Vec y = x;
    for (std::size_t j = 0; j < n; ++j) {
        int region = partition.locate(y, 1e-12);
        if (region < 0)
            fail("boundary-hit", "itinerary hit the skeleton at step " + std::to_string(j));
        w.symbols.push_back(region);
        y = family.maps[static_cast<std::size_t>(region)].eval(y);
    }
    return w;
}

HyperbolicTimeSet pliss_times(const std::vector<double>& a, double c) {
    require(c > 0.0, "bad-parameter", "Pliss level c must be positive");
    HyperbolicTimeSet out;
    out.c = c;
    out.horizon = static_cast<std::int64_t>(a.size());
    // n is hyperbolic iff T_n <= min(T_0..T_{n-1}) for T_n = sum (a_j + c)
    double prefix = 0.0;
    double run_min = 0.0;
    for (std::size_t n = 1; n <= a.size(); ++n) {
        prefix += a[n - 1] + c;
        if (prefix <= run_min) out.times.push_back(static_cast<std::int64_t>(n));
        run_min = std::min(run_min, prefix);
    }
    return out;
}

HyperbolicTimeSet pliss_times_bruteforce(const std::vector<double>& a, double c) {
    require(c > 0.0, "bad-parameter", "Pliss level c must be positive");
    HyperbolicTimeSet out;
    out.c = c;
    out.horizon = static_cast<std::int64_t>(a.size());
    for (std::size_t n = 1; n <= a.size(); ++n) {
        bool ok = true;
        double window = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            window += a[n - k];
            if (window > -c * static_cast<double>(k)) {
                ok = false;
                break;
            }
        }
        if (ok) out.times.push_back(static_cast<std::int64_t>(n));
    }
    return out;
}

double hyperbolic_frequency(const HyperbolicTimeSet& times, std::int64_t horizon) {
    require(horizon >= 1, "bad-parameter", "frequency horizon must be >= 1");
    auto it = std::upper_bound(times.times.begin(), times.times.end(), horizon);
    return static_cast<double>(it - times.times.begin()) / static_cast<double>(horizon);
}

double expanding_fraction(const OrbitRecord& record, int p) {
    require(!record.regions.empty(), "bad-parameter", "orbit record has no steps");
    std::int64_t hits = 0;
    for (int r : record.regions)
        if (r >= 0 && r < p) ++hits;
    return static_cast<double>(hits) / static_cast<double>(record.regions.size());
}

NueReport check_orbital_nue(const OrbitRecord& record, double c) {
    require(!record.a.empty(), "bad-parameter", "orbit record has no steps");
    NueReport rep;
    rep.c = c;
    rep.truncated = record.truncated;
    double sum = 0.0;
    std::int64_t next_rung = 10;
    for (std::size_t j = 0; j < record.a.size(); ++j) {
        sum += record.a[j];
        auto n = static_cast<std::int64_t>(j + 1);
        if (n == next_rung) {
            rep.ladder.emplace_back(n, sum / static_cast<double>(n));
            next_rung *= 10;
        }
    }
    auto horizon = static_cast<std::int64_t>(record.a.size());
    rep.final_average = sum / static_cast<double>(horizon);
    if (rep.ladder.empty() || rep.ladder.back().first != horizon)
        rep.ladder.emplace_back(horizon, rep.final_average);
    rep.pass = rep.final_average <= -c;
    return rep;
}

}  // namespace ergolab
