#include "spectra/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace spectra
{

    namespace
    {
        void check_dof(std::size_t p, int n, const char *who)
        {
            if (n < static_cast<int>(p))
            {
                throw std::invalid_argument(std::string(who) + ": need n >= p, got n=" + std::to_string(n) +
                                            ", p=" + std::to_string(p));
            }
        }

        // Lower triangle of L A A' L' mirrored, so the result is exactly symmetric.
        Eigen::MatrixXd gram_lower(const Eigen::MatrixXd &la)
        {
            const Eigen::Index p = la.rows();
            Eigen::MatrixXd s(p, p);
            for (Eigen::Index i = 0; i < p; ++i)
            {
                for (Eigen::Index j = 0; j <= i; ++j)
                {
                    double acc = 0.0;
                    for (Eigen::Index k = 0; k <= j; ++k)
                    {
                        acc += la(i, k) * la(j, k);
                    }
                    s(i, j) = acc;
                    s(j, i) = acc;
                }
            }
            return s;
        }

        Eigen::MatrixXd bartlett_factor(Eigen::Index p, int n, ReplicateStream &stream)
        {
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
            for (Eigen::Index i = 0; i < p; ++i)
            {
                // zero-based row i has chi_{n-i} on the diagonal
                a(i, i) = std::sqrt(stream.chi_square(static_cast<double>(n - i)));
                for (Eigen::Index j = 0; j < i; ++j)
                {
                    a(i, j) = stream.normal();
                }
            }
            return a;
        }

        Eigen::MatrixXd cross_product(const Eigen::MatrixXd &z)
        {
            Eigen::MatrixXd s = z.transpose() * z;
            return 0.5 * (s + s.transpose());
        }
    } // namespace

    Distribution Distribution::parse(const std::string &text)
    {
        if (text == "wishart" || text == "normal")
        {
            return wishart();
        }
        if (text.rfind("t:", 0) == 0)
        {
            std::size_t used = 0;
            int nu = 0;
            try
            {
                nu = std::stoi(text.substr(2), &used);
            }
            catch (const std::exception &)
            {
                used = 0;
            }
            if (used == 0 || used != text.size() - 2)
            {
                throw std::invalid_argument("distribution: cannot parse degrees of freedom in '" + text + "'");
            }
            if (nu < 3)
            {
                throw std::invalid_argument("distribution: t requires nu >= 3, got nu=" + std::to_string(nu));
            }
            return elliptical_t(nu);
        }
        throw std::invalid_argument("distribution: expected 'wishart' or 't:<nu>', got '" + text + "'");
    }

    std::string Distribution::to_string() const
    {
        return kind == Kind::wishart ? "wishart" : "t:" + std::to_string(nu);
    }

    Eigen::MatrixXd bartlett_scatter(std::span<const double> variances, int n, ReplicateStream &stream)
    {
        const auto p = static_cast<Eigen::Index>(variances.size());
        if (p < 1)
        {
            throw std::invalid_argument("bartlett_scatter: empty variance vector");
        }
        check_dof(variances.size(), n, "bartlett_scatter");
        Eigen::MatrixXd la = bartlett_factor(p, n, stream);
        for (Eigen::Index i = 0; i < p; ++i)
        {
            la.row(i) *= std::sqrt(variances[static_cast<std::size_t>(i)]);
        }
        return gram_lower(la);
    }

    Eigen::MatrixXd bartlett_scatter(const Eigen::MatrixXd &sigma, int n, ReplicateStream &stream)
    {
        if (sigma.rows() != sigma.cols() || sigma.rows() < 1)
        {
            throw std::invalid_argument("bartlett_scatter: sigma must be square");
        }
        check_dof(static_cast<std::size_t>(sigma.rows()), n, "bartlett_scatter");
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() != Eigen::Success)
        {
            throw std::invalid_argument("bartlett_scatter: sigma is not positive definite");
        }
        const Eigen::MatrixXd c = llt.matrixL();
        const Eigen::MatrixXd a = bartlett_factor(sigma.rows(), n, stream);
        const Eigen::MatrixXd ca = c * a;
        Eigen::MatrixXd s = ca * ca.transpose();
        return 0.5 * (s + s.transpose());
    }

    Eigen::MatrixXd normal_data_matrix(std::span<const double> variances, int n, ReplicateStream &stream)
    {
        const auto p = static_cast<Eigen::Index>(variances.size());
        Eigen::MatrixXd z(n, p);
        for (Eigen::Index r = 0; r < n; ++r)
        {
            for (Eigen::Index c = 0; c < p; ++c)
            {
                z(r, c) = std::sqrt(variances[static_cast<std::size_t>(c)]) * stream.normal();
            }
        }
        return z;
    }

    ScatterSample sample_wishart(const Spectrum &spectrum, int n, const SamplerConfig &cfg)
    {
        check_dof(spectrum.size(), n, "sample_wishart");
        ReplicateStream stream = cfg.stream();
        return ScatterSample(bartlett_scatter(spectrum.values(), n, stream), n);
    }

    ScatterSample sample_wishart(const Eigen::MatrixXd &sigma, int n, const SamplerConfig &cfg)
    {
        ReplicateStream stream = cfg.stream();
        return ScatterSample(bartlett_scatter(sigma, n, stream), n);
    }

    ScatterSample sample_wishart_data(const Spectrum &spectrum, int n, const SamplerConfig &cfg)
    {
        check_dof(spectrum.size(), n, "sample_wishart_data");
        ReplicateStream stream = cfg.stream();
        return ScatterSample(cross_product(normal_data_matrix(spectrum.values(), n, stream)), n);
    }

    ScatterSample sample_elliptical_t(const Spectrum &spectrum, int n, int nu, const SamplerConfig &cfg)
    {
        check_dof(spectrum.size(), n, "sample_elliptical_t");
        if (nu < 3)
        {
            throw std::invalid_argument("sample_elliptical_t: need nu >= 3 for a finite covariance, got nu=" +
                                        std::to_string(nu));
        }
        ReplicateStream stream = cfg.stream();
        const double w = stream.chi_square(static_cast<double>(nu));
        Eigen::MatrixXd z = normal_data_matrix(spectrum.values(), n, stream);
        z /= std::sqrt(w / static_cast<double>(nu));
        return ScatterSample(cross_product(z), n);
    }

    ScatterSample sample_scatter(const Spectrum &spectrum, int n, const SamplerConfig &cfg)
    {
        switch (cfg.distribution.kind)
        {
        case Distribution::Kind::wishart:
            return sample_wishart(spectrum, n, cfg);
        case Distribution::Kind::elliptical_t:
            return sample_elliptical_t(spectrum, n, cfg.distribution.nu, cfg);
        }
        throw std::logic_error("sample_scatter: unknown distribution");
    }

    void SpikedModel::validate() const
    {
        if (dimension < 2)
        {
            throw std::invalid_argument("SpikedModel: dimension must be >= 2");
        }
        if (factor_count() >= dimension)
        {
            throw std::invalid_argument("SpikedModel: need m < p, got m=" + std::to_string(factor_count()) +
                                        ", p=" + std::to_string(dimension));
        }
        if (!(noise > 0.0))
        {
            throw std::invalid_argument("SpikedModel: noise variance must be positive");
        }
        for (std::size_t i = 0; i < spikes.size(); ++i)
        {
            if (!(spikes[i] > 0.0))
            {
                throw std::invalid_argument("SpikedModel: spikes must be positive");
            }
            if (i > 0 && spikes[i] > spikes[i - 1])
            {
                throw std::invalid_argument("SpikedModel: spikes must be descending");
            }
        }
    }

    Spectrum spiked_spectrum(const SpikedModel &model)
    {
        model.validate();
        std::vector<double> lambda(static_cast<std::size_t>(model.dimension), model.noise);
        for (std::size_t i = 0; i < model.spikes.size(); ++i)
        {
            lambda[i] += model.spikes[i];
        }
        return Spectrum(std::move(lambda));
    }

} // namespace spectra
