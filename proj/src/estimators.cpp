#include "spectra/estimators.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spectra
{

    std::string ShrinkageWeights::label() const
    {
        if (q)
        {
            return "q" + std::to_string(*q);
        }
        for (double b : beta)
        {
            if (b != 1.0)
            {
                return "custom";
            }
        }
        return "classical";
    }

    ShrinkageWeights classical_weights(int p)
    {
        if (p < 1)
        {
            throw std::invalid_argument("classical_weights: p must be positive");
        }
        return ShrinkageWeights{std::vector<double>(static_cast<std::size_t>(p), 1.0), std::nullopt, p / 2, 0};
    }

    ShrinkageWeights custom_weights(std::vector<double> beta)
    {
        for (double b : beta)
        {
            if (!(b > 0.0) || !std::isfinite(b))
            {
                throw std::invalid_argument("custom_weights: weights must be positive and finite");
            }
        }
        const int p = static_cast<int>(beta.size());
        return ShrinkageWeights{std::move(beta), std::nullopt, p / 2, 0};
    }

    bool family_q_valid(int p, int q) noexcept
    {
        // q <= p/2 - 1  <=>  2q + 2 <= p
        return q >= 1 && 2 * q + 2 <= p;
    }

    ShrinkageWeights family_weights(int p, int n, int q)
    {
        if (p < 4)
        {
            throw std::invalid_argument("family_weights: need p >= 4, got p=" + std::to_string(p));
        }
        if (n < p)
        {
            throw std::invalid_argument("family_weights: need n >= p, got n=" + std::to_string(n) +
                                        ", p=" + std::to_string(p));
        }
        if (!family_q_valid(p, q))
        {
            throw std::invalid_argument("family_weights: q must satisfy 1 <= q <= p/2 - 1, got q=" +
                                        std::to_string(q) + " for p=" + std::to_string(p));
        }
        const int m = p / 2;
        std::vector<double> beta(static_cast<std::size_t>(p), 1.0);
        for (int i = 1; i <= p; ++i)
        {
            int denom = 0;
            if (i <= m - q)
            {
                denom = n + p - 2 * q + 1 - 2 * i;
            }
            else if (i >= p - m + q + 1)
            {
                denom = n + p + 2 * q + 1 - 2 * i;
            }
            else
            {
                continue;
            }
            if (denom <= 0)
            {
                throw std::logic_error("family_weights: non-positive denominator");
            }
            beta[static_cast<std::size_t>(i - 1)] = static_cast<double>(n) / static_cast<double>(denom);
        }
        return ShrinkageWeights{std::move(beta), q, m, n};
    }

    ContributionRates classical_estimate(const SampleDecomposition &decomp)
    {
        return decomp.contribution_rates();
    }

    ContributionRates shrink_estimate(const SampleDecomposition &decomp, const ShrinkageWeights &weights)
    {
        const Eigen::Index p = decomp.dim();
        if (static_cast<Eigen::Index>(weights.size()) != p)
        {
            throw std::invalid_argument("shrink_estimate: weight length " + std::to_string(weights.size()) +
                                        " does not match p=" + std::to_string(p));
        }
        std::vector<double> est(static_cast<std::size_t>(p));
        for (Eigen::Index i = 0; i < p; ++i)
        {
            est[static_cast<std::size_t>(i)] = weights.beta[static_cast<std::size_t>(i)] * decomp.rates()(i);
        }
        return ContributionRates(std::move(est));
    }

    Eigen::MatrixXd plugin_covariance(const SampleDecomposition &decomp, const ContributionRates &estimate)
    {
        if (static_cast<Eigen::Index>(estimate.size()) != decomp.dim())
        {
            throw std::invalid_argument("plugin_covariance: estimate length does not match p");
        }
        const Eigen::MatrixXd &h = decomp.eigenvectors();
        Eigen::MatrixXd out = h * estimate.as_vector().asDiagonal() * h.transpose();
        return 0.5 * (out + out.transpose());
    }

    double condition2_sum(const std::vector<double> &beta, int n, int m)
    {
        const int p = static_cast<int>(beta.size());
        double s = 0.0;
        for (int i = 1; i <= p; ++i)
        {
            const double coef = (i <= m) ? (n + p - 1 - 2 * i) : (n + p + 1 - 2 * i);
            s += coef * (beta[static_cast<std::size_t>(i - 1)] - 1.0);
        }
        return s;
    }

    ConditionReport check_conditions(const ShrinkageWeights &weights, int n)
    {
        const auto &beta = weights.beta;
        const int p = static_cast<int>(beta.size());
        if (p < 2)
        {
            throw std::invalid_argument("check_conditions: need at least two weights");
        }
        for (double b : beta)
        {
            if (!(b > 0.0))
            {
                throw std::invalid_argument("check_conditions: weights must be positive");
            }
        }

        ConditionReport report;
        bool monotone = true;
        for (int i = 1; i < p; ++i)
        {
            monotone = monotone && beta[static_cast<std::size_t>(i - 1)] <= beta[static_cast<std::size_t>(i)];
        }
        int split = 0;
        if (monotone)
        {
            for (int m = 1; m <= p - 1; ++m)
            {
                if (beta[static_cast<std::size_t>(m - 1)] <= 1.0 && beta[static_cast<std::size_t>(m)] >= 1.0)
                {
                    split = m;
                }
            }
        }

        if (split > 0)
        {
            report.c1_holds = true;
            report.m_used = split;
            report.c2_value = condition2_sum(beta, n, split);
        }
        else
        {
            report.c1_holds = false;
            report.c2_value = std::numeric_limits<double>::infinity();
            for (int m = 1; m <= p - 1; ++m)
            {
                const double v = condition2_sum(beta, n, m);
                if (v < report.c2_value)
                {
                    report.c2_value = v;
                    report.m_used = m;
                }
            }
        }
        report.c2_holds = report.c2_value <= kConditionTolerance;

        double inv = 0.0;
        for (double b : beta)
        {
            inv += 1.0 / b;
        }
        report.c3_value = inv;
        report.c3_holds = inv <= static_cast<double>(p) + kConditionTolerance;
        return report;
    }

    double family_bounding_sum(const ShrinkageWeights &weights)
    {
        if (!weights.q)
        {
            throw std::invalid_argument("family_bounding_sum: weights are not from the beta^(q) family");
        }
        const int q = *weights.q;
        const int p = static_cast<int>(weights.size());
        const int n = weights.dof;
        const int m = p / 2;
        double s = 0.0;
        for (int i = 1; i <= m - q; ++i)
        {
            s += (n + p - 2 * q + 1 - 2 * i) * (weights.beta[static_cast<std::size_t>(i - 1)] - 1.0);
        }
        for (int i = p - m + q + 1; i <= p; ++i)
        {
            s += (n + p + 2 * q + 1 - 2 * i) * (weights.beta[static_cast<std::size_t>(i - 1)] - 1.0);
        }
        return s;
    }

} // namespace spectra
