#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace adl {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure: the same
/// (counter, key) always gives the same four output words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream keyed by (seed, stream_id).
///
/// The seed is the Philox key; the stream id occupies the upper half of
/// the 128-bit counter and the block index the lower half. Streams with
/// different ids never share a counter value, and a stream's output does
/// not depend on what any other stream has consumed.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept;

    /// Standard normal variate (Box-Muller; the second value of each pair
    /// is cached, so draws come in a fixed deterministic order).
    double normal() noexcept;

    /// Uniform integer in [0, n). Exact (Lemire's rejection method).
    std::size_t uniform_index(std::size_t n) noexcept;

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

inline RngStream rng_derive(std::uint64_t seed, std::uint64_t stream_id) noexcept
{
    return RngStream(seed, stream_id);
}

std::vector<double> rng_gaussian(RngStream& stream, std::size_t count);

} // namespace adl
