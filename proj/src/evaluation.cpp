#include "spectra/evaluation.hpp"

#include "spectra/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace spectra
{

    // ---------------------------------------------------------------------
    // Losses

    LossValue entropy_loss(const Eigen::MatrixXd &estimate, const Eigen::MatrixXd &truth)
    {
        const Eigen::Index p = truth.rows();
        if (truth.cols() != p || estimate.rows() != p || estimate.cols() != p)
        {
            throw std::invalid_argument("entropy_loss: matrices must be square and of equal size");
        }
        Eigen::LLT<Eigen::MatrixXd> truth_llt(truth);
        if (truth_llt.info() != Eigen::Success)
        {
            throw std::invalid_argument("entropy_loss: truth matrix is singular or not positive definite");
        }
        Eigen::LLT<Eigen::MatrixXd> est_llt(estimate);
        if (est_llt.info() != Eigen::Success)
        {
            throw std::invalid_argument("entropy_loss: estimate is not positive definite");
        }
        const double trace = truth_llt.solve(estimate).trace();
        const double logdet_est = 2.0 * est_llt.matrixLLT().diagonal().array().log().sum();
        const double logdet_truth = 2.0 * truth_llt.matrixLLT().diagonal().array().log().sum();
        double value = trace - (logdet_est - logdet_truth) - static_cast<double>(p);
        // Exact zero at equality can come out as -1e-16.
        if (value < 0.0 && value > -1e-12 * std::max(1.0, trace))
        {
            value = 0.0;
        }
        return {value, LossKind::entropy};
    }

    LossValue quadratic_loss(const ContributionRates &estimate, const ContributionRates &truth)
    {
        if (estimate.size() != truth.size())
        {
            throw std::invalid_argument("quadratic_loss: length mismatch");
        }
        double s = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i)
        {
            if (!(truth[i] > 0.0))
            {
                throw std::invalid_argument("quadratic_loss: truth coordinate " + std::to_string(i + 1) +
                                            " must be positive");
            }
            const double r = 1.0 - estimate[i] / truth[i];
            s += r * r;
        }
        return {s, LossKind::quadratic};
    }

    // ---------------------------------------------------------------------
    // Stein-Haff functional

    namespace
    {
        void require_weights(const SampleDecomposition &decomp, const ShrinkageWeights &weights, const char *who)
        {
            if (static_cast<Eigen::Index>(weights.size()) != decomp.dim())
            {
                throw std::invalid_argument(std::string(who) + ": weight length does not match p");
            }
        }

        bool has_collision(const Eigen::VectorXd &l, double total)
        {
            for (Eigen::Index i = 1; i < l.size(); ++i)
            {
                if (l(i - 1) - l(i) < 1e-12 * total)
                {
                    return true;
                }
            }
            return false;
        }

        void require_distinct(const SampleDecomposition &decomp, const char *who)
        {
            if (has_collision(decomp.eigenvalues(), decomp.trace()))
            {
                throw std::invalid_argument(std::string(who) +
                                            ": sample eigenvalues coincide within 1e-12 * tr(S); identity undefined");
            }
        }

        // sum_{i<j} (b_i - b_j) l_j / (l_i - l_j)
        double pair_term(const Eigen::VectorXd &l, const std::vector<double> &b)
        {
            double s = 0.0;
            const Eigen::Index p = l.size();
            for (Eigen::Index i = 0; i < p; ++i)
            {
                for (Eigen::Index j = i + 1; j < p; ++j)
                {
                    s += (b[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)]) * l(j) / (l(i) - l(j));
                }
            }
            return s;
        }
    } // namespace

    double stein_haff_G(const SampleDecomposition &decomp, const ShrinkageWeights &weights, int n)
    {
        require_weights(decomp, weights, "stein_haff_G");
        require_distinct(decomp, "stein_haff_G");
        const Eigen::VectorXd &l = decomp.eigenvalues();
        const Eigen::VectorXd &d = decomp.rates();
        const Eigen::Index p = decomp.dim();
        double linear = 0.0;
        for (Eigen::Index i = 0; i < p; ++i)
        {
            const double index = static_cast<double>(i + 1);
            linear += (n + p + 1 - 2.0 * index - 2.0 * d(i)) * weights.beta[static_cast<std::size_t>(i)];
        }
        return (2.0 * pair_term(l, weights.beta) + linear) / decomp.trace();
    }

    double risk_difference_integrand(const SampleDecomposition &decomp, const ShrinkageWeights &weights, int n)
    {
        require_weights(decomp, weights, "risk_difference_integrand");
        require_distinct(decomp, "risk_difference_integrand");
        const Eigen::VectorXd &l = decomp.eigenvalues();
        const Eigen::VectorXd &d = decomp.rates();
        const Eigen::Index p = decomp.dim();
        double linear = 0.0;
        double log_beta = 0.0;
        for (Eigen::Index i = 0; i < p; ++i)
        {
            const double b = weights.beta[static_cast<std::size_t>(i)];
            const double index = static_cast<double>(i + 1);
            linear += (n + p + 1 - 2.0 * index - 2.0 * d(i)) * (b - 1.0);
            log_beta += std::log(b);
        }
        return (2.0 * pair_term(l, weights.beta) + linear) / decomp.trace() - log_beta;
    }

    // ---------------------------------------------------------------------
    // Bias expansion

    std::vector<double> bias_expansion_coefficients(const Spectrum &truth)
    {
        if (truth.has_multiplicity())
        {
            throw std::invalid_argument(
                "bias_expansion: population eigenvalues must have no multiplicity (expansion assumes distinct lambda)");
        }
        const auto &lam = truth.values();
        const double s1 = truth.total();
        double s2 = 0.0;
        for (double v : lam)
        {
            s2 += v * v;
        }
        std::vector<double> c(lam.size());
        for (std::size_t i = 0; i < lam.size(); ++i)
        {
            double pair = 0.0;
            for (std::size_t j = 0; j < lam.size(); ++j)
            {
                if (j != i)
                {
                    pair += lam[j] / (lam[i] - lam[j]);
                }
            }
            c[i] = 2.0 * lam[i] * s2 / (s1 * s1 * s1) - 2.0 * lam[i] * lam[i] / (s1 * s1) + (lam[i] / s1) * pair;
        }
        return c;
    }

    std::vector<double> bias_expansion(const Spectrum &truth, int n)
    {
        if (n <= 0)
        {
            throw std::invalid_argument("bias_expansion: n must be positive");
        }
        std::vector<double> c = bias_expansion_coefficients(truth);
        const double total = truth.total();
        for (std::size_t i = 0; i < c.size(); ++i)
        {
            c[i] = truth[i] / total + c[i] / static_cast<double>(n);
        }
        return c;
    }

    // ---------------------------------------------------------------------
    // Monte Carlo estimation

    namespace
    {
        void require_replicates(const MonteCarloOptions &opts, const char *who)
        {
            if (opts.replicates < 100)
            {
                throw std::invalid_argument(std::string(who) + ": need at least 100 replicates, got " +
                                            std::to_string(opts.replicates));
            }
        }

        SamplerConfig sampler(const MonteCarloOptions &opts, std::uint64_t k)
        {
            return SamplerConfig{opts.distribution, opts.seed, k};
        }

        auto merge_stats = [](RunningStats &acc, const RunningStats &part)
        { acc.merge(part); };
    } // namespace

    PairedRiskComparison compare_risks(const Spectrum &spectrum, int n, std::span<const ShrinkageWeights> estimators,
                                       LossKind loss_kind, const MonteCarloOptions &opts)
    {
        require_replicates(opts, "estimate_risk");
        if (estimators.empty())
        {
            throw std::invalid_argument("estimate_risk: no estimators given");
        }
        const auto p = static_cast<Eigen::Index>(spectrum.size());
        for (const auto &w : estimators)
        {
            if (static_cast<Eigen::Index>(w.size()) != p)
            {
                throw std::invalid_argument("estimate_risk: weight length does not match p");
            }
        }
        const ContributionRates tau = contribution_rates(spectrum);
        const Eigen::MatrixXd sigma_unit = tau.as_vector().asDiagonal();
        const auto k = static_cast<Eigen::Index>(estimators.size());

        auto block = [&](std::uint64_t begin, std::uint64_t end)
        {
            RunningStats stats(2 * k - 1);
            Eigen::VectorXd row(2 * k - 1);
            for (std::uint64_t r = begin; r < end; ++r)
            {
                const SampleDecomposition decomp = symmetric_eigendecompose(sample_scatter(spectrum, n, sampler(opts, r)));
                for (Eigen::Index e = 0; e < k; ++e)
                {
                    const ContributionRates est = shrink_estimate(decomp, estimators[static_cast<std::size_t>(e)]);
                    row(e) = loss_kind == LossKind::quadratic
                                 ? quadratic_loss(est, tau).value
                                 : entropy_loss(plugin_covariance(decomp, est), sigma_unit).value;
                }
                for (Eigen::Index e = 1; e < k; ++e)
                {
                    row(k + e - 1) = row(e) - row(0);
                }
                stats.push(row);
            }
            return stats;
        };

        const RunningStats total = reduce_replicates(opts.replicates, opts.jobs, RunningStats(2 * k - 1), block, merge_stats);
        const Eigen::VectorXd se = total.std_error();

        PairedRiskComparison out;
        for (Eigen::Index e = 0; e < k; ++e)
        {
            out.risks.push_back(RiskEstimate{total.mean()(e), se(e), total.count(), loss_kind});
        }
        for (Eigen::Index e = 1; e < k; ++e)
        {
            out.diff_mean.push_back(total.mean()(k + e - 1));
            out.diff_std_error.push_back(se(k + e - 1));
        }
        return out;
    }

    RiskEstimate estimate_risk(const Spectrum &spectrum, int n, const ShrinkageWeights &weights, LossKind loss_kind,
                               const MonteCarloOptions &opts)
    {
        return compare_risks(spectrum, n, std::span<const ShrinkageWeights>(&weights, 1), loss_kind, opts).risks.front();
    }

    BiasEstimate estimate_bias(const Spectrum &spectrum, int n, const MonteCarloOptions &opts)
    {
        require_replicates(opts, "estimate_bias");
        const auto p = static_cast<Eigen::Index>(spectrum.size());
        const bool use_cv = opts.distribution.kind == Distribution::Kind::wishart;
        const double total_lambda = spectrum.total();
        const Eigen::Map<const Eigen::VectorXd> lambda(spectrum.values().data(), p);

        auto block = [&](std::uint64_t begin, std::uint64_t end)
        {
            RunningStats stats(2 * p);
            Eigen::VectorXd row(2 * p);
            for (std::uint64_t r = begin; r < end; ++r)
            {
                const ScatterSample s = sample_scatter(spectrum, n, sampler(opts, r));
                const SampleDecomposition decomp = symmetric_eigendecompose(s);
                row.head(p) = decomp.rates();
                if (use_cv)
                {
                    const Eigen::VectorXd delta = s.matrix().diagonal() / static_cast<double>(n) - lambda;
                    const Eigen::VectorXd linear =
                        delta / total_lambda - lambda * (delta.sum() / (total_lambda * total_lambda));
                    row.tail(p) = decomp.rates() - linear;
                }
                else
                {
                    row.tail(p) = decomp.rates();
                }
                stats.push(row);
            }
            return stats;
        };

        const RunningStats total = reduce_replicates(opts.replicates, opts.jobs, RunningStats(2 * p), block, merge_stats);
        const Eigen::VectorXd se = total.std_error();
        BiasEstimate out;
        out.mean = total.mean().head(p);
        out.std_error = se.head(p);
        if (use_cv)
        {
            out.cv_mean = total.mean().tail(p);
            out.cv_std_error = se.tail(p);
        }
        out.replicates = total.count();
        return out;
    }

    SteinHaffCheck stein_haff_check(const Spectrum &spectrum, int n, const ShrinkageWeights &weights,
                                    const MonteCarloOptions &opts)
    {
        require_replicates(opts, "stein_haff_check");
        if (opts.distribution.kind != Distribution::Kind::wishart)
        {
            throw std::invalid_argument("stein_haff_check: the identity requires Wishart draws");
        }
        const auto p = static_cast<Eigen::Index>(spectrum.size());
        if (static_cast<Eigen::Index>(weights.size()) != p)
        {
            throw std::invalid_argument("stein_haff_check: weight length does not match p");
        }
        const Eigen::Map<const Eigen::VectorXd> lambda(spectrum.values().data(), p);
        const Eigen::VectorXd inv_lambda = lambda.cwiseInverse();

        struct Partial
        {
            RunningStats stats{3};
            std::uint64_t redraws = 0;
        };

        auto block = [&](std::uint64_t begin, std::uint64_t end)
        {
            Partial part;
            Eigen::VectorXd row(3);
            for (std::uint64_t r = begin; r < end; ++r)
            {
                ReplicateStream stream(opts.seed, r);
                for (;;)
                {
                    const SampleDecomposition decomp = symmetric_eigendecompose(
                        ScatterSample(bartlett_scatter(spectrum.values(), n, stream), n));
                    if (has_collision(decomp.eigenvalues(), decomp.trace()))
                    {
                        ++part.redraws;
                        continue;
                    }
                    const Eigen::MatrixXd est = plugin_covariance(decomp, shrink_estimate(decomp, weights));
                    const double trace = est.diagonal().dot(inv_lambda);
                    const double g = stein_haff_G(decomp, weights, n);
                    row << trace, g, trace - g;
                    part.stats.push(row);
                    break;
                }
            }
            return part;
        };
        auto merge = [](Partial &acc, const Partial &part)
        {
            acc.stats.merge(part.stats);
            acc.redraws += part.redraws;
        };

        const Partial total = reduce_replicates(opts.replicates, opts.jobs, Partial{}, block, merge);
        const Eigen::VectorXd se = total.stats.std_error();
        SteinHaffCheck out;
        out.mean_trace = total.stats.mean()(0);
        out.mean_g = total.stats.mean()(1);
        out.diff_mean = total.stats.mean()(2);
        out.se_trace = se(0);
        out.se_g = se(1);
        out.paired_se = se(2);
        out.combined_se = std::hypot(se(0), se(1));
        out.redraws = total.redraws;
        out.replicates = total.stats.count();
        return out;
    }

    PathwiseBoundCheck pathwise_bound_check(const Spectrum &spectrum, int n, const ShrinkageWeights &weights,
                                            const MonteCarloOptions &opts, double tolerance)
    {
        require_replicates(opts, "pathwise_bound_check");
        PathwiseBoundCheck init;
        init.max_value = -std::numeric_limits<double>::infinity();

        auto block = [&](std::uint64_t begin, std::uint64_t end)
        {
            PathwiseBoundCheck part;
            part.max_value = -std::numeric_limits<double>::infinity();
            for (std::uint64_t r = begin; r < end; ++r)
            {
                const SampleDecomposition decomp = symmetric_eigendecompose(sample_scatter(spectrum, n, sampler(opts, r)));
                if (has_collision(decomp.eigenvalues(), decomp.trace()))
                {
                    continue;
                }
                const double v = risk_difference_integrand(decomp, weights, n);
                part.max_value = std::max(part.max_value, v);
                part.violations += v > tolerance ? 1 : 0;
                ++part.replicates;
            }
            return part;
        };
        auto merge = [](PathwiseBoundCheck &acc, const PathwiseBoundCheck &part)
        {
            acc.max_value = std::max(acc.max_value, part.max_value);
            acc.violations += part.violations;
            acc.replicates += part.replicates;
        };
        return reduce_replicates(opts.replicates, opts.jobs, init, block, merge);
    }

    // ---------------------------------------------------------------------
    // Distributional invariance

    double ks_two_sample(std::vector<double> a, std::vector<double> b)
    {
        if (a.empty() || b.empty())
        {
            throw std::invalid_argument("ks_two_sample: samples must be non-empty");
        }
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        const double na = static_cast<double>(a.size());
        const double nb = static_cast<double>(b.size());
        std::size_t i = 0;
        std::size_t j = 0;
        double d = 0.0;
        while (i < a.size() && j < b.size())
        {
            const double x = std::min(a[i], b[j]);
            while (i < a.size() && a[i] == x)
            {
                ++i;
            }
            while (j < b.size() && b[j] == x)
            {
                ++j;
            }
            d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
        }
        return d;
    }

    double ks_critical_value(double alpha, std::size_t n1, std::size_t n2)
    {
        if (!(alpha > 0.0 && alpha < 1.0) || n1 == 0 || n2 == 0)
        {
            throw std::invalid_argument("ks_critical_value: need alpha in (0,1) and non-empty samples");
        }
        const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
        const double a = static_cast<double>(n1);
        const double b = static_cast<double>(n2);
        return c * std::sqrt((a + b) / (a * b));
    }

    std::vector<InvarianceCoordinate> invariance_check(const Spectrum &spectrum, int n, const Distribution &alternative,
                                                       const MonteCarloOptions &opts, double alpha)
    {
        require_replicates(opts, "invariance_check");
        const auto p = static_cast<Eigen::Index>(spectrum.size());

        using Rows = std::vector<Eigen::VectorXd>;
        auto collect = [&](const Distribution &dist, std::uint64_t seed)
        {
            auto block = [&](std::uint64_t begin, std::uint64_t end)
            {
                Rows rows;
                rows.reserve(static_cast<std::size_t>(end - begin));
                for (std::uint64_t r = begin; r < end; ++r)
                {
                    const SamplerConfig cfg{dist, seed, r};
                    rows.push_back(symmetric_eigendecompose(sample_scatter(spectrum, n, cfg)).rates());
                }
                return rows;
            };
            auto merge = [](Rows &acc, const Rows &part)
            { acc.insert(acc.end(), part.begin(), part.end()); };
            return reduce_replicates(opts.replicates, opts.jobs, Rows{}, block, merge);
        };

        const Rows reference = collect(Distribution::wishart(), derive_seed(opts.seed, 0));
        const Rows other = collect(alternative, derive_seed(opts.seed, 1));

        std::vector<InvarianceCoordinate> out(static_cast<std::size_t>(p));
        const double crit = ks_critical_value(alpha, reference.size(), other.size());
        for (Eigen::Index i = 0; i < p; ++i)
        {
            std::vector<double> a;
            std::vector<double> b;
            a.reserve(reference.size());
            b.reserve(other.size());
            for (const auto &row : reference)
            {
                a.push_back(row(i));
            }
            for (const auto &row : other)
            {
                b.push_back(row(i));
            }
            auto &c = out[static_cast<std::size_t>(i)];
            c.mean_reference = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
            c.mean_alternative = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
            c.ks_statistic = ks_two_sample(std::move(a), std::move(b));
            c.critical_value = crit;
            c.accepted = c.ks_statistic <= crit;
        }
        return out;
    }

} // namespace spectra
