/**
 * @file montecarlo.hpp
 * @brief Deterministic parallel replicate loops.
 *
 * Replicates are split into fixed-size blocks. Each block is evaluated
 * sequentially by one worker and its partial result stored by block index;
 * partials are then merged in index order. The outcome is therefore
 * bit-identical for any worker count.
 */

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spectra
{

    inline constexpr std::uint64_t kReplicateBlock = 256;

    /// Per-coordinate mean and variance (Welford, Chan merge).
    class RunningStats
    {
    public:
        RunningStats() = default;
        explicit RunningStats(Eigen::Index dim) : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

        void push(const Eigen::VectorXd &x)
        {
            ++count_;
            const Eigen::VectorXd delta = x - mean_;
            mean_ += delta / static_cast<double>(count_);
            m2_ += delta.cwiseProduct(x - mean_);
        }

        void push(double x)
        {
            push(Eigen::VectorXd::Constant(1, x));
        }

        void merge(const RunningStats &other)
        {
            if (other.count_ == 0)
            {
                return;
            }
            if (count_ == 0)
            {
                *this = other;
                return;
            }
            const double na = static_cast<double>(count_);
            const double nb = static_cast<double>(other.count_);
            const double nt = na + nb;
            const Eigen::VectorXd delta = other.mean_ - mean_;
            mean_ += delta * (nb / nt);
            m2_ += other.m2_ + delta.cwiseProduct(delta) * (na * nb / nt);
            count_ += other.count_;
        }

        std::uint64_t count() const noexcept { return count_; }
        const Eigen::VectorXd &mean() const noexcept { return mean_; }

        /// Unbiased sample variance.
        Eigen::VectorXd variance() const
        {
            if (count_ < 2)
            {
                return Eigen::VectorXd::Zero(mean_.size());
            }
            return m2_ / static_cast<double>(count_ - 1);
        }

        /// sample std / sqrt(count)
        Eigen::VectorXd std_error() const
        {
            if (count_ < 2)
            {
                return Eigen::VectorXd::Zero(mean_.size());
            }
            return (variance() / static_cast<double>(count_)).cwiseSqrt();
        }

    private:
        std::uint64_t count_ = 0;
        Eigen::VectorXd mean_;
        Eigen::VectorXd m2_;
    };

    /// Worker count used when the caller passes 0.
    inline unsigned default_jobs()
    {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1u : hw;
    }

    /**
     * Evaluates block_fn(begin, end) over [0, replicates) in kReplicateBlock
     * chunks on up to `jobs` threads, then folds the partials in block order
     * with merge(acc, partial). Exceptions from workers are rethrown.
     */
    template <typename Partial, typename BlockFn, typename MergeFn>
    Partial reduce_replicates(std::uint64_t replicates, unsigned jobs, Partial init, BlockFn block_fn, MergeFn merge)
    {
        const std::uint64_t blocks = (replicates + kReplicateBlock - 1) / kReplicateBlock;
        std::vector<Partial> partials(static_cast<std::size_t>(blocks));
        std::atomic<std::uint64_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;

        auto worker = [&]()
        {
            for (;;)
            {
                const std::uint64_t b = next.fetch_add(1);
                if (b >= blocks)
                {
                    return;
                }
                try
                {
                    const std::uint64_t begin = b * kReplicateBlock;
                    const std::uint64_t end = std::min(replicates, begin + kReplicateBlock);
                    partials[static_cast<std::size_t>(b)] = block_fn(begin, end);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure)
                    {
                        failure = std::current_exception();
                    }
                    next.store(blocks);
                    return;
                }
            }
        };

        if (jobs == 0)
        {
            jobs = default_jobs();
        }
        const auto threads = static_cast<unsigned>(std::min<std::uint64_t>(jobs, std::max<std::uint64_t>(blocks, 1)));
        if (threads <= 1)
        {
            worker();
        }
        else
        {
            std::vector<std::thread> pool;
            pool.reserve(threads);
            for (unsigned t = 0; t < threads; ++t)
            {
                pool.emplace_back(worker);
            }
            for (auto &th : pool)
            {
                th.join();
            }
        }
        if (failure)
        {
            std::rethrow_exception(failure);
        }

        Partial acc = std::move(init);
        for (auto &partial : partials)
        {
            merge(acc, partial);
        }
        return acc;
    }

} // namespace spectra
