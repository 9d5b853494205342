/**
 * @file rng.hpp
 * @brief Counter-based random streams for reproducible parallel Monte Carlo.
 *
 * Every replicate owns an independent stream keyed by (seed, replicate index).
 * A draw depends only on that pair and on how many values the replicate has
 * already consumed, never on which thread runs it or in what order.
 *
 * Uniforms come from Philox4x32-10 (Salmon et al., SC'11). Normals use the
 * Box-Muller transform. Chi-square variates are sums of squared normals for
 * df <= 4 and 2 * Gamma(df/2) via Marsaglia-Tsang otherwise.
 */

#pragma once

#include <array>
#include <cstdint>

namespace spectra
{

    /// Philox4x32 with 10 rounds. Stateless: maps (key, counter) to 128 random bits.
    struct Philox4x32
    {
        using Counter = std::array<std::uint32_t, 4>;
        using Key = std::array<std::uint32_t, 2>;

        static Counter generate(Counter ctr, Key key) noexcept;
    };

    /// SplitMix64 finalizer over (seed, salt); used to give sub-experiments unrelated keys.
    std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

    class ReplicateStream
    {
    public:
        ReplicateStream(std::uint64_t seed, std::uint64_t replicate) noexcept;

        /// Uniform on the open interval (0, 1), 53-bit resolution.
        double uniform() noexcept;
        double normal() noexcept;
        /// Gamma(shape, 1), shape > 0.
        double gamma(double shape) noexcept;
        /// Chi-square with df > 0 degrees of freedom.
        double chi_square(double df) noexcept;

        std::uint64_t blocks_consumed() const noexcept { return block_; }

    private:
        std::uint64_t next_bits() noexcept;

        Philox4x32::Key key_;
        std::uint64_t replicate_;
        std::uint64_t block_ = 0;
        Philox4x32::Counter buffer_{};
        int buffered_ = 0; // 64-bit words left in buffer_
        double spare_normal_ = 0.0;
        bool has_spare_ = false;
    };

} // namespace spectra
