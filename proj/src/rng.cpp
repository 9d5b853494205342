#include "spectra/rng.hpp"

#include <cmath>
#include <numbers>

namespace spectra
{

    Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept
    {
        constexpr std::uint32_t kMul0 = 0xD2511F53u;
        constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
        constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
        constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

        for (int round = 0; round < 10; ++round)
        {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

    std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept
    {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    ReplicateStream::ReplicateStream(std::uint64_t seed, std::uint64_t replicate) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, replicate_(replicate)
    {
    }

    std::uint64_t ReplicateStream::next_bits() noexcept
    {
        if (buffered_ == 0)
        {
            const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                          static_cast<std::uint32_t>(replicate_),
                                          static_cast<std::uint32_t>(replicate_ >> 32)};
            buffer_ = Philox4x32::generate(ctr, key_);
            ++block_;
            buffered_ = 2;
        }
        const int word = 2 - buffered_;
        --buffered_;
        return (static_cast<std::uint64_t>(buffer_[2 * word]) << 32) | buffer_[2 * word + 1];
    }

    double ReplicateStream::uniform() noexcept
    {
        // (k + 0.5) / 2^53 never hits 0 or 1.
        return (static_cast<double>(next_bits() >> 11) + 0.5) * 0x1.0p-53;
    }

    double ReplicateStream::normal() noexcept
    {
        if (has_spare_)
        {
            has_spare_ = false;
            return spare_normal_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_normal_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double ReplicateStream::gamma(double shape) noexcept
    {
        if (shape < 1.0)
        {
            // Gamma(a) = Gamma(a + 1) * U^(1/a)
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;)
        {
            double x = 0.0;
            double v = 0.0;
            do
            {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x)
            {
                return d * v;
            }
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
            {
                return d * v;
            }
        }
    }

    double ReplicateStream::chi_square(double df) noexcept
    {
        if (df <= 4.0 && df == std::floor(df))
        {
            double s = 0.0;
            for (int k = 0; k < static_cast<int>(df); ++k)
            {
                const double z = normal();
                s += z * z;
            }
            return s;
        }
        return 2.0 * gamma(0.5 * df);
    }

} // namespace spectra
