/**
 * @file evaluation.hpp
 * @brief Losses, the Stein-Haff functional, the first-order bias expansion
 *        of the sample rates, and Monte Carlo risk/bias estimation.
 */

#pragma once

#include "spectra/core.hpp"
#include "spectra/estimators.hpp"
#include "spectra/sampling.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace spectra
{

    /// tr(E T^-1) - log det(E T^-1) - p. Both matrices must be positive definite.
    LossValue entropy_loss(const Eigen::MatrixXd &estimate, const Eigen::MatrixXd &truth);

    /// sum_i (1 - estimate_i / truth_i)^2.
    LossValue quadratic_loss(const ContributionRates &estimate, const ContributionRates &truth);

    /**
     * Stein-Haff functional for Sigma_hat = H diag(beta_i d_i) H', written in
     * terms of the sample eigenvalues:
     *
     *   G = (sum l)^-1 { 2 sum_{i<j} (b_i - b_j) l_j / (l_i - l_j)
     *                    + sum_i (n + p + 1 - 2i - 2 d_i) b_i }
     *
     * Under S ~ W_p(n, Sigma), E[tr(Sigma_hat Sigma^-1)] = E[G]. Rejects
     * eigenvalues that coincide within 1e-12 * sum(l).
     */
    double stein_haff_G(const SampleDecomposition &decomp, const ShrinkageWeights &weights, int n);

    /**
     * Pathwise integrand of the entropy-risk difference between beta and the
     * classical estimator:
     *
     *   (sum l)^-1 { 2 sum_{i<j} (b_i - b_j) l_j / (l_i - l_j)
     *                + sum_i (n + p + 1 - 2i - 2 d_i)(b_i - 1) } - sum_i log b_i
     *
     * Non-positive for every draw when beta satisfies the dominance conditions.
     */
    double risk_difference_integrand(const SampleDecomposition &decomp, const ShrinkageWeights &weights, int n);

    /// n^-1 coefficients of the expansion E(d_i) = tau_i + c_i / n + O(n^-2).
    std::vector<double> bias_expansion_coefficients(const Spectrum &truth);

    /// tau_i + c_i / n. Rejects spectra with repeated eigenvalues.
    std::vector<double> bias_expansion(const Spectrum &truth, int n);

    struct MonteCarloOptions
    {
        Distribution distribution = Distribution::wishart();
        std::uint64_t replicates = 10000;
        std::uint64_t seed = 0;
        unsigned jobs = 1; ///< 0 = hardware concurrency
    };

    struct RiskEstimate
    {
        double mean_loss = 0.0;
        double std_error = 0.0;
        std::uint64_t replicates = 0;
        LossKind loss_kind = LossKind::quadratic;
    };

    /// Risks of several estimators evaluated on the same draws.
    struct PairedRiskComparison
    {
        std::vector<RiskEstimate> risks;
        /// risk[k] - risk[0] and the standard error of the per-draw difference, k >= 1
        std::vector<double> diff_mean;
        std::vector<double> diff_std_error;
    };

    /**
     * Monte Carlo risk. Entropy loss compares the plug-in matrix with the
     * population matrix rescaled to unit trace; quadratic loss compares the
     * estimated rates with the population rates.
     */
    RiskEstimate estimate_risk(const Spectrum &spectrum, int n, const ShrinkageWeights &weights, LossKind loss_kind,
                               const MonteCarloOptions &opts);

    PairedRiskComparison compare_risks(const Spectrum &spectrum, int n, std::span<const ShrinkageWeights> estimators,
                                       LossKind loss_kind, const MonteCarloOptions &opts);

    struct BiasEstimate
    {
        Eigen::VectorXd mean;      ///< Monte Carlo mean of d_i
        Eigen::VectorXd std_error; ///< its standard error
        /// Control-variate mean: d_i minus its first-order term in S/n - Lambda,
        /// which has mean zero under the Wishart law. Wishart only.
        std::optional<Eigen::VectorXd> cv_mean;
        std::optional<Eigen::VectorXd> cv_std_error;
        std::uint64_t replicates = 0;
    };

    BiasEstimate estimate_bias(const Spectrum &spectrum, int n, const MonteCarloOptions &opts);

    struct SteinHaffCheck
    {
        double mean_trace = 0.0; ///< mean of tr(Sigma_hat Sigma^-1)
        double se_trace = 0.0;
        double mean_g = 0.0;
        double se_g = 0.0;
        double diff_mean = 0.0;    ///< mean_trace - mean_g
        double paired_se = 0.0;    ///< standard error of the per-draw difference
        double combined_se = 0.0;  ///< sqrt(se_trace^2 + se_g^2)
        std::uint64_t redraws = 0; ///< draws rejected for eigenvalue collisions
        std::uint64_t replicates = 0;
    };

    /// Empirical check of E[tr(Sigma_hat Sigma^-1)] = E[G]. Wishart only.
    SteinHaffCheck stein_haff_check(const Spectrum &spectrum, int n, const ShrinkageWeights &weights,
                                    const MonteCarloOptions &opts);

    struct PathwiseBoundCheck
    {
        double max_value = 0.0;
        std::uint64_t violations = 0; ///< draws with integrand > tolerance
        std::uint64_t replicates = 0;
    };

    PathwiseBoundCheck pathwise_bound_check(const Spectrum &spectrum, int n, const ShrinkageWeights &weights,
                                            const MonteCarloOptions &opts, double tolerance = 1e-12);

    /// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
    double ks_two_sample(std::vector<double> a, std::vector<double> b);

    /// Asymptotic critical value c(alpha) sqrt((n1 + n2) / (n1 n2)), c(alpha) = sqrt(-ln(alpha / 2) / 2).
    double ks_critical_value(double alpha, std::size_t n1, std::size_t n2);

    struct InvarianceCoordinate
    {
        double ks_statistic = 0.0;
        double critical_value = 0.0;
        bool accepted = false;
        double mean_reference = 0.0; ///< mean of d_i under the reference (Wishart) law
        double mean_alternative = 0.0;
    };

    /**
     * Draws `replicates` rate vectors under Wishart and under `alternative`
     * (independent streams) and runs a per-coordinate two-sample KS test.
     */
    std::vector<InvarianceCoordinate> invariance_check(const Spectrum &spectrum, int n, const Distribution &alternative,
                                                       const MonteCarloOptions &opts, double alpha = 0.01);

} // namespace spectra
