/**
 * @file dimension.hpp
 * @brief Dimension rules driven by contribution rates, and the Monte Carlo
 *        histogram experiment comparing them across estimators.
 */

#pragma once

#include "spectra/core.hpp"
#include "spectra/estimators.hpp"
#include "spectra/evaluation.hpp"
#include "spectra/sampling.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spectra
{

    struct Criterion
    {
        enum class Kind
        {
            cumulative, ///< smallest m with sum_{i<=m} rate_i >= t*
            relative    ///< number of rates exceeding 1/p
        };

        Kind kind = Kind::cumulative;
        double t_star = 0.8;

        static Criterion cumulative(double t_star) { return {Kind::cumulative, t_star}; }
        static Criterion relative() { return {Kind::relative, 0.0}; }

        /// "C.1" / "C.2"
        std::string label() const;
    };

    struct DimensionDecision
    {
        Criterion criterion;
        int chosen_dim = 0;
        bool degenerate = false; ///< relative criterion with no rate above 1/p; chosen_dim is 0
    };

    /// Returns p when the rates never reach t* (possible for unnormalized estimates).
    int decide_cumulative(const ContributionRates &rates, double t_star);

    /// Count of rates strictly above 1/p; 0 when none qualifies.
    int decide_relative(const ContributionRates &rates);

    DimensionDecision decide(const ContributionRates &rates, const Criterion &criterion);

    struct DimensionHistogram
    {
        Criterion criterion;
        std::string estimator; ///< weights label
        std::vector<std::uint64_t> counts; ///< counts[k] = decisions equal to k + 1
        std::uint64_t zero_count = 0;      ///< degenerate (dimension 0) decisions
        std::uint64_t replicates = 0;
        int true_dim = 0; ///< criterion applied to the population rates

        std::uint64_t total() const noexcept;
        /// Most frequent dimension (ties to the smaller), 0 if the overflow bin wins.
        int mode() const noexcept;
        double proportion(int dim) const noexcept;
    };

    struct DimensionExperimentOptions
    {
        MonteCarloOptions monte_carlo;
        /// Rescale estimates to unit sum before the relative criterion.
        bool normalize_for_relative = false;
    };

    /**
     * One histogram per (criterion, estimator) pair, criterion-major: all
     * estimators for criteria[0] first. Every pair is evaluated on the same draws.
     */
    std::vector<DimensionHistogram> dimension_experiment(const SpikedModel &model, int n,
                                                         const std::vector<ShrinkageWeights> &estimators,
                                                         const std::vector<Criterion> &criteria,
                                                         const DimensionExperimentOptions &opts);

} // namespace spectra
