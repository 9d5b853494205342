/**
 * @file sampling.hpp
 * @brief Scatter-matrix samplers: Wishart (Bartlett and data-matrix routes),
 *        matrix-elliptical t, and spiked-covariance spectra.
 */

#pragma once

#include "spectra/core.hpp"
#include "spectra/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spectra
{

    /// Law of the n x p data matrix Z behind S = Z'Z.
    struct Distribution
    {
        enum class Kind
        {
            wishart,
            elliptical_t
        };

        Kind kind = Kind::wishart;
        int nu = 0; ///< t degrees of freedom, used only for elliptical_t

        static Distribution wishart() { return {}; }
        static Distribution elliptical_t(int nu) { return {Kind::elliptical_t, nu}; }

        /// Parses "wishart" or "t:<nu>".
        static Distribution parse(const std::string &text);
        std::string to_string() const;
    };

    struct SamplerConfig
    {
        Distribution distribution;
        std::uint64_t seed = 0;
        std::uint64_t replicate_index = 0;

        ReplicateStream stream() const { return ReplicateStream(seed, replicate_index); }
    };

    /**
     * Bartlett draw of W_p(n, diag(variances)) from an existing stream.
     *
     * S = L A A' L' with L = diag(sqrt(variances)), A lower triangular,
     * A_ii ~ chi_{n-i+1}, A_ij ~ N(0, 1) below the diagonal. Accepts p >= 1.
     */
    Eigen::MatrixXd bartlett_scatter(std::span<const double> variances, int n, ReplicateStream &stream);

    /// Bartlett draw for a general SPD population matrix, S = C A A' C' with C = chol(sigma).
    Eigen::MatrixXd bartlett_scatter(const Eigen::MatrixXd &sigma, int n, ReplicateStream &stream);

    /// n x p matrix with independent N(0, variances_j) entries in column j.
    Eigen::MatrixXd normal_data_matrix(std::span<const double> variances, int n, ReplicateStream &stream);

    /// S ~ W_p(n, diag(spectrum)) through the Bartlett decomposition. Requires n >= p.
    ScatterSample sample_wishart(const Spectrum &spectrum, int n, const SamplerConfig &cfg);

    /// S ~ W_p(n, sigma) for a general SPD sigma. Requires n >= p.
    ScatterSample sample_wishart(const Eigen::MatrixXd &sigma, int n, const SamplerConfig &cfg);

    /// S = Z'Z with Z an explicit n x p normal data matrix. Same law as sample_wishart().
    ScatterSample sample_wishart_data(const Spectrum &spectrum, int n, const SamplerConfig &cfg);

    /**
     * Matrix-elliptical t scatter: Z = G / sqrt(w / nu), S = Z'Z.
     *
     * G has i.i.d. N(0, diag(spectrum)) rows and w ~ chi^2_nu is a single
     * scalar shared by the whole matrix, so the density of Z has the form
     * f(tr Z'Z Sigma^-1) |Sigma|^(-n/2). Requires n >= p and nu >= 3.
     */
    ScatterSample sample_elliptical_t(const Spectrum &spectrum, int n, int nu, const SamplerConfig &cfg);

    /// Dispatches on cfg.distribution.
    ScatterSample sample_scatter(const Spectrum &spectrum, int n, const SamplerConfig &cfg);

    /// m-factor model: lambda_i = xi_i + sigma2 for i <= m, sigma2 otherwise.
    struct SpikedModel
    {
        int dimension = 0;
        std::vector<double> spikes; ///< xi_1 >= ... >= xi_m > 0
        double noise = 1.0;         ///< sigma^2

        int factor_count() const noexcept { return static_cast<int>(spikes.size()); }
        void validate() const;
    };

    Spectrum spiked_spectrum(const SpikedModel &model);

} // namespace spectra
