#pragma once

#include <array>
#include <cstdint>

namespace stablesde {

/// Philox4x32-10 counter-based block cipher (Salmon et al., Random123).
///
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits. The
/// output depends only on (counter, key), so any block of any stream can be
/// generated independently of every other block.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter encrypt(Counter ctr, Key key) noexcept;
};

/// Sequential view over one Philox stream.
///
/// The key is the user seed; the upper half of the counter is the stream id
/// (typically a path index) and the lower half counts blocks. Identical
/// (seed, stream) pairs yield bit-identical sequences on every platform.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    double uniform() noexcept;
    /// Standard normal via Box-Muller; pairs are cached.
    double normal() noexcept;
    /// Unit-rate exponential.
    double exponential() noexcept;

private:
    void refill() noexcept;

    Philox4x32::Key key_{};
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

} // namespace stablesde
