#pragma once

#include <cstdint>

namespace popgrad {

// Seed plus stream id for a counter-based generator. Identical (seed, stream)
// always reproduces the same draw sequence, independent of thread scheduling.
struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    // Derive a per-trial stream so parallel sweeps stay deterministic.
    RngSeed derived(std::uint64_t index) const;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

inline RngSeed RngSeed::derived(std::uint64_t index) const {
    return RngSeed{seed, detail::mix64(stream ^ detail::mix64(index + 0x632be59bd9b4e019ULL))};
}

// Splitmix-style counter generator. State is just (key, counter), so draws are
// a pure function of (seed, stream, counter).
class CounterRng {
  public:
    explicit CounterRng(RngSeed s)
        : key_(detail::mix64(s.seed + 0x9e3779b97f4a7c15ULL) ^ detail::mix64(s.stream ^ 0xd1b54a32d192ed03ULL)) {}

    std::uint64_t next_u64() {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return detail::mix64(key_ + counter_);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe as a log argument.
    double next_double_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double next_gaussian();

    // Uniform in [-1/2, 1/2].
    double next_uniform_centered() { return next_double() - 0.5; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace popgrad
