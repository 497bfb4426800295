#pragma once

#include <array>
#include <cstdint>

namespace allee {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Pure function of (counter, key).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// SplitMix64 finalizer; used to spread user seeds over the key space.
std::uint64_t mix64(std::uint64_t z);

/// Seed for sub-experiment `index` of a run seeded with `base` (for example
/// one row of a sweep).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Counter-based random stream. The key is derived from the seed; the
/// stream id occupies the upper half of the Philox counter, so distinct
/// streams under one seed never share a block. The state is a plain value:
/// copying it forks an identical stream.
class RngState {
public:
    RngState(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double next_unit();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    /// Number of 64-bit words drawn so far.
    std::uint64_t draws() const { return block_index_ * 2 + used_ - 2; }

    bool operator==(const RngState&) const = default;

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    PhiloxKey key_;
    std::uint64_t block_index_ = 0;
    std::array<std::uint64_t, 2> block_{};
    unsigned used_ = 2;
};

/// The stream for trajectory `index` under base seed `seed`.
inline RngState derive_stream(std::uint64_t seed, std::uint64_t index) { return {seed, index}; }

}  // namespace allee
