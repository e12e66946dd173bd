#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ergolab/error.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

// Finite word over the alphabet {0, ..., k-1}. The empty word is valid and
// denotes the identity composition.
struct Word {
    std::vector<int> symbols;
    int alphabet_size = 1;

    std::size_t length() const { return symbols.size(); }

    void validate() const {
        require(alphabet_size >= 1, "bad-parameter", "alphabet size must be >= 1");
        for (int s : symbols)
            require(s >= 0 && s < alphabet_size, "bad-parameter",
                    "word symbol out of alphabet range");
    }
};

inline Word drop_first(const Word& w, std::size_t s) {
    Word out{{}, w.alphabet_size};
    if (s < w.symbols.size())
        out.symbols.assign(w.symbols.begin() + static_cast<std::ptrdiff_t>(s),
                           w.symbols.end());
    return out;
}

// Lazily computed symbol source for itinerary-driven streams. The systems
// module provides the implementation (it needs the map family); symbol_at is
// addressed by absolute position and must be safe to call concurrently.
class ItinerarySource {
public:
    virtual ~ItinerarySource() = default;
    virtual int symbol_at(std::uint64_t index) const = 0;
};

// Infinite symbol sequence descriptor. Streams are immutable values: reading
// by position is pure, so shifted copies and concurrent readers are cheap.
struct SymbolStream {
    enum class Kind { FixedPeriodic, IidUniform, ItineraryDriven };

    Kind kind = Kind::IidUniform;
    int alphabet_size = 1;
    std::uint64_t offset = 0;

    Word period;                // FixedPeriodic
    std::uint64_t seed = 0;     // IidUniform
    std::shared_ptr<const ItinerarySource> itinerary;  // ItineraryDriven

    int at(std::uint64_t index) const {
        std::uint64_t i = offset + index;
        switch (kind) {
            case Kind::FixedPeriodic:
                require(!period.symbols.empty(), "bad-parameter",
                        "periodic stream needs a nonempty word");
                return period.symbols[i % period.symbols.size()];
            case Kind::IidUniform:
                return static_cast<int>(RandomStream{seed}.below(
                    i, static_cast<std::uint64_t>(alphabet_size)));
            case Kind::ItineraryDriven:
                require(itinerary != nullptr, "bad-parameter",
                        "itinerary stream has no source");
                return itinerary->symbol_at(i);
        }
        fail("bad-parameter", "unknown stream kind");
    }
};

inline SymbolStream fixed_periodic_stream(Word w) {
    w.validate();
    require(!w.symbols.empty(), "bad-parameter", "periodic stream needs a nonempty word");
    SymbolStream s;
    s.kind = SymbolStream::Kind::FixedPeriodic;
    s.alphabet_size = w.alphabet_size;
    s.period = std::move(w);
    return s;
}

inline SymbolStream iid_uniform_stream(int alphabet_size, std::uint64_t seed) {
    require(alphabet_size >= 1, "bad-parameter", "alphabet size must be >= 1");
    SymbolStream s;
    s.kind = SymbolStream::Kind::IidUniform;
    s.alphabet_size = alphabet_size;
    s.seed = seed;
    return s;
}

// Tail of the stream: element i of the result is element i+1 of the input.
inline SymbolStream shift(SymbolStream s) {
    s.offset += 1;
    return s;
}

inline SymbolStream shift_n(SymbolStream s, std::uint64_t n) {
    s.offset += n;
    return s;
}

// First n emissions as a word. Pure: does not disturb other readers.
inline Word prefix(const SymbolStream& s, std::size_t n) {
    Word w{{}, s.alphabet_size};
    w.symbols.reserve(n);
    for (std::size_t i = 0; i < n; ++i) w.symbols.push_back(s.at(i));
    return w;
}

}  // namespace ergolab
