#include "spectra/dimension.hpp"

#include "spectra/montecarlo.hpp"

#include <stdexcept>

namespace spectra
{

    std::string Criterion::label() const
    {
        return kind == Kind::cumulative ? "C.1" : "C.2";
    }

    int decide_cumulative(const ContributionRates &rates, double t_star)
    {
        if (!(t_star > 0.0 && t_star < 1.0))
        {
            throw std::invalid_argument("decide_cumulative: t* must lie in (0, 1), got " + std::to_string(t_star));
        }
        double cum = 0.0;
        for (std::size_t m = 0; m < rates.size(); ++m)
        {
            cum += rates[m];
            if (cum >= t_star)
            {
                return static_cast<int>(m + 1);
            }
        }
        return static_cast<int>(rates.size());
    }

    int decide_relative(const ContributionRates &rates)
    {
        const double threshold = 1.0 / static_cast<double>(rates.size());
        int count = 0;
        for (double r : rates.values())
        {
            count += r > threshold ? 1 : 0;
        }
        return count;
    }

    DimensionDecision decide(const ContributionRates &rates, const Criterion &criterion)
    {
        DimensionDecision out{criterion, 0, false};
        if (criterion.kind == Criterion::Kind::cumulative)
        {
            out.chosen_dim = decide_cumulative(rates, criterion.t_star);
        }
        else
        {
            out.chosen_dim = decide_relative(rates);
            out.degenerate = out.chosen_dim == 0;
        }
        return out;
    }

    std::uint64_t DimensionHistogram::total() const noexcept
    {
        std::uint64_t s = zero_count;
        for (auto c : counts)
        {
            s += c;
        }
        return s;
    }

    int DimensionHistogram::mode() const noexcept
    {
        int best = 0;
        std::uint64_t best_count = zero_count;
        for (std::size_t k = 0; k < counts.size(); ++k)
        {
            if (counts[k] > best_count)
            {
                best_count = counts[k];
                best = static_cast<int>(k + 1);
            }
        }
        return best;
    }

    double DimensionHistogram::proportion(int dim) const noexcept
    {
        if (replicates == 0)
        {
            return 0.0;
        }
        const std::uint64_t c =
            dim == 0 ? zero_count
                     : (dim >= 1 && dim <= static_cast<int>(counts.size()) ? counts[static_cast<std::size_t>(dim - 1)] : 0);
        return static_cast<double>(c) / static_cast<double>(replicates);
    }

    std::vector<DimensionHistogram> dimension_experiment(const SpikedModel &model, int n,
                                                         const std::vector<ShrinkageWeights> &estimators,
                                                         const std::vector<Criterion> &criteria,
                                                         const DimensionExperimentOptions &opts)
    {
        if (opts.monte_carlo.replicates < 100)
        {
            throw std::invalid_argument("dimension_experiment: need at least 100 replicates");
        }
        if (estimators.empty() || criteria.empty())
        {
            throw std::invalid_argument("dimension_experiment: need at least one estimator and one criterion");
        }
        const Spectrum spectrum = spiked_spectrum(model);
        const std::size_t p = spectrum.size();
        for (const auto &w : estimators)
        {
            if (w.size() != p)
            {
                throw std::invalid_argument("dimension_experiment: weight length does not match p");
            }
        }
        for (const auto &c : criteria)
        {
            if (c.kind == Criterion::Kind::cumulative && !(c.t_star > 0.0 && c.t_star < 1.0))
            {
                throw std::invalid_argument("dimension_experiment: t* must lie in (0, 1)");
            }
        }

        const std::size_t cells = criteria.size() * estimators.size();
        // Layout: cell * (p + 1) + dim, dim 0 is the degenerate bin.
        using Counts = std::vector<std::uint64_t>;

        auto block = [&](std::uint64_t begin, std::uint64_t end)
        {
            Counts counts(cells * (p + 1), 0);
            for (std::uint64_t r = begin; r < end; ++r)
            {
                const SamplerConfig cfg{opts.monte_carlo.distribution, opts.monte_carlo.seed, r};
                const SampleDecomposition decomp = symmetric_eigendecompose(sample_scatter(spectrum, n, cfg));
                for (std::size_t e = 0; e < estimators.size(); ++e)
                {
                    const ContributionRates est = shrink_estimate(decomp, estimators[e]);
                    for (std::size_t c = 0; c < criteria.size(); ++c)
                    {
                        const bool renormalize =
                            opts.normalize_for_relative && criteria[c].kind == Criterion::Kind::relative;
                        const int dim = decide(renormalize ? est.normalized() : est, criteria[c]).chosen_dim;
                        ++counts[(c * estimators.size() + e) * (p + 1) + static_cast<std::size_t>(dim)];
                    }
                }
            }
            return counts;
        };
        auto merge = [](Counts &acc, const Counts &part)
        {
            for (std::size_t i = 0; i < acc.size(); ++i)
            {
                acc[i] += part[i];
            }
        };
        const Counts total =
            reduce_replicates(opts.monte_carlo.replicates, opts.monte_carlo.jobs, Counts(cells * (p + 1), 0), block, merge);

        const ContributionRates tau = contribution_rates(spectrum);
        std::vector<DimensionHistogram> out;
        out.reserve(cells);
        for (std::size_t c = 0; c < criteria.size(); ++c)
        {
            const int truth = decide(tau, criteria[c]).chosen_dim;
            for (std::size_t e = 0; e < estimators.size(); ++e)
            {
                const std::size_t base = (c * estimators.size() + e) * (p + 1);
                DimensionHistogram h;
                h.criterion = criteria[c];
                h.estimator = estimators[e].label();
                h.zero_count = total[base];
                h.counts.assign(total.begin() + static_cast<std::ptrdiff_t>(base + 1),
                                total.begin() + static_cast<std::ptrdiff_t>(base + p + 1));
                h.replicates = opts.monte_carlo.replicates;
                h.true_dim = truth;
                out.push_back(std::move(h));
            }
        }
        return out;
    }

} // namespace spectra
