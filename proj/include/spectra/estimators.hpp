/**
 * @file estimators.hpp
 * @brief Classical and shrinkage estimators of contribution rates.
 *
 * A shrinkage estimate multiplies each sample rate by a positive weight,
 * tau_hat_i = beta_i * d_i, deflating the leading rates and inflating the
 * trailing ones. The result is deliberately not renormalized.
 */

#pragma once

#include "spectra/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spectra
{

    struct ShrinkageWeights
    {
        std::vector<double> beta;
        std::optional<int> q; ///< present for family weights
        int m = 0;            ///< floor(p/2) for family weights
        int dof = 0;          ///< n used in construction, 0 if not applicable

        std::size_t size() const noexcept { return beta.size(); }
        /// "classical", "q1", "q2", ... or "custom".
        std::string label() const;
    };

    /// All-ones weights; shrink_estimate() with these reproduces classical_estimate().
    ShrinkageWeights classical_weights(int p);

    /// Arbitrary positive user weights.
    ShrinkageWeights custom_weights(std::vector<double> beta);

    /**
     * The beta^(q) family, with m = floor(p/2):
     *
     *   beta_i = n / (n + p - 2q + 1 - 2i)   for i <= m - q
     *   beta_i = 1                            for m - q + 1 <= i <= p - m + q
     *   beta_i = n / (n + p + 2q + 1 - 2i)   for i >= p - m + q + 1
     *
     * Requires p >= 4, n >= p and 1 <= q <= p/2 - 1.
     */
    ShrinkageWeights family_weights(int p, int n, int q);

    /// True when q is admissible for dimension p.
    bool family_q_valid(int p, int q) noexcept;

    ContributionRates classical_estimate(const SampleDecomposition &decomp);

    /// beta_i * d_i, not renormalized.
    ContributionRates shrink_estimate(const SampleDecomposition &decomp, const ShrinkageWeights &weights);

    /// H diag(estimate) H'.
    Eigen::MatrixXd plugin_covariance(const SampleDecomposition &decomp, const ContributionRates &estimate);

    struct ConditionReport
    {
        bool c1_holds = false; ///< 0 < b_1 <= ... <= b_m <= 1 <= b_{m+1} <= ... <= b_p
        double c2_value = 0.0;
        bool c2_holds = false; ///< c2_value <= tolerance
        double c3_value = 0.0; ///< sum of 1/b_i
        bool c3_holds = false; ///< c3_value <= p + tolerance
        int m_used = 0;

        bool all_hold() const noexcept { return c1_holds && c2_holds && c3_holds; }
    };

    inline constexpr double kConditionTolerance = 1e-9;

    /// Weighted sum sum_{i<=m}(n+p-1-2i)(b_i-1) + sum_{i>m}(n+p+1-2i)(b_i-1).
    double condition2_sum(const std::vector<double> &beta, int n, int m);

    /**
     * Checks the three dominance conditions.
     *
     * When the monotone pattern holds, m is the largest split index in
     * [1, p-1] with b_m <= 1 <= b_{m+1}; condition 2 does not depend on which
     * valid split is used. Otherwise c1 fails and m is the split minimizing
     * the condition-2 sum.
     */
    ConditionReport check_conditions(const ShrinkageWeights &weights, int n);

    /**
     * The looser bound used to show condition 2 for family weights:
     * sum_{i<=m-q}(n+p-2q+1-2i)(b_i-1) + sum_{i>=p-m+q+1}(n+p+2q+1-2i)(b_i-1).
     * Identically zero for the family. Requires weights.q.
     */
    double family_bounding_sum(const ShrinkageWeights &weights);

} // namespace spectra
