#include "spectra/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spectra
{

    namespace
    {
        void require(bool ok, const std::string &message)
        {
            if (!ok)
            {
                throw std::invalid_argument(message);
            }
        }
    } // namespace

    // ---------------------------------------------------------------------
    // Spectrum

    Spectrum::Spectrum(std::vector<double> values) : values_(std::move(values))
    {
        require(values_.size() >= 2,
                "Spectrum: need p >= 2, got p=" + std::to_string(values_.size()));
        for (std::size_t i = 0; i < values_.size(); ++i)
        {
            require(std::isfinite(values_[i]) && values_[i] > 0.0,
                    "Spectrum: eigenvalue " + std::to_string(i + 1) + " must be positive");
            if (i > 0)
            {
                require(values_[i] <= values_[i - 1],
                        "Spectrum: eigenvalues must be sorted non-increasing");
            }
        }
    }

    double Spectrum::total() const noexcept
    {
        return std::accumulate(values_.begin(), values_.end(), 0.0);
    }

    Spectrum Spectrum::normalized() const
    {
        const double t = total();
        std::vector<double> out(values_);
        for (double &v : out)
        {
            v /= t;
        }
        return Spectrum(std::move(out));
    }

    bool Spectrum::has_multiplicity(double rel_tol) const noexcept
    {
        const double scale = values_.front();
        for (std::size_t i = 1; i < values_.size(); ++i)
        {
            if (values_[i - 1] - values_[i] <= rel_tol * scale)
            {
                return true;
            }
        }
        return false;
    }

    // ---------------------------------------------------------------------
    // ContributionRates

    ContributionRates::ContributionRates(std::vector<double> rates) : rates_(std::move(rates))
    {
        require(!rates_.empty(), "ContributionRates: empty rate vector");
        for (std::size_t i = 0; i < rates_.size(); ++i)
        {
            require(std::isfinite(rates_[i]) && rates_[i] > 0.0,
                    "ContributionRates: rate " + std::to_string(i + 1) + " must be positive");
        }
    }

    ContributionRates::ContributionRates(const Eigen::VectorXd &rates)
        : ContributionRates(std::vector<double>(rates.data(), rates.data() + rates.size()))
    {
    }

    double ContributionRates::sum() const noexcept
    {
        return std::accumulate(rates_.begin(), rates_.end(), 0.0);
    }

    ContributionRates ContributionRates::normalized() const
    {
        const double s = sum();
        std::vector<double> out(rates_);
        for (double &r : out)
        {
            r /= s;
        }
        return ContributionRates(std::move(out));
    }

    Eigen::VectorXd ContributionRates::as_vector() const
    {
        return Eigen::Map<const Eigen::VectorXd>(rates_.data(), static_cast<Eigen::Index>(rates_.size()));
    }

    ContributionRates contribution_rates(const Spectrum &spectrum)
    {
        const double t = spectrum.total();
        std::vector<double> rates(spectrum.values());
        for (double &r : rates)
        {
            r /= t;
        }
        return ContributionRates(std::move(rates));
    }

    // ---------------------------------------------------------------------
    // ScatterSample

    namespace
    {
        void require_symmetric(const Eigen::MatrixXd &a, const char *who)
        {
            require(a.rows() == a.cols(), std::string(who) + ": matrix must be square, got " +
                                              std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
            require(a.allFinite(), std::string(who) + ": matrix has non-finite entries");
            const double scale = a.cwiseAbs().maxCoeff();
            const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
            if (asym > 1e-10 * scale)
            {
                throw std::invalid_argument(std::string(who) + ": matrix is not symmetric (max |a_ij - a_ji| = " +
                                            std::to_string(asym) + ", scale " + std::to_string(scale) + ")");
            }
        }
    } // namespace

    ScatterSample::ScatterSample(Eigen::MatrixXd matrix, int dof) : matrix_(std::move(matrix)), dof_(dof)
    {
        require(dof_ > 0, "ScatterSample: degrees of freedom must be positive, got " + std::to_string(dof_));
        require_symmetric(matrix_, "ScatterSample");
    }

    // ---------------------------------------------------------------------
    // Jacobi eigensolver

    EigenPairs jacobi_eigen(const Eigen::MatrixXd &input)
    {
        require_symmetric(input, "jacobi_eigen");
        const Eigen::Index p = input.rows();

        Eigen::MatrixXd a = 0.5 * (input + input.transpose());
        Eigen::MatrixXd v = Eigen::MatrixXd::Identity(p, p);
        const double tol = 1e-12 * a.norm();

        auto off_norm = [&a, p]()
        {
            double s = 0.0;
            for (Eigen::Index j = 0; j < p; ++j)
            {
                for (Eigen::Index i = 0; i < p; ++i)
                {
                    if (i != j)
                    {
                        s += a(i, j) * a(i, j);
                    }
                }
            }
            return std::sqrt(s);
        };

        int sweep = 0;
        while (off_norm() > tol)
        {
            if (sweep == kMaxJacobiSweeps)
            {
                throw ConvergenceError("jacobi_eigen: no convergence after " +
                                       std::to_string(kMaxJacobiSweeps) + " sweeps (iteration cap)");
            }
            ++sweep;
            for (Eigen::Index r = 0; r < p - 1; ++r)
            {
                for (Eigen::Index c = r + 1; c < p; ++c)
                {
                    const double arc = a(r, c);
                    if (arc == 0.0)
                    {
                        continue;
                    }
                    // Rotation zeroing a(r, c), smaller-angle root.
                    const double theta = (a(c, c) - a(r, r)) / (2.0 * arc);
                    const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
                    const double cs = 1.0 / std::sqrt(t * t + 1.0);
                    const double sn = t * cs;

                    for (Eigen::Index k = 0; k < p; ++k)
                    {
                        const double akr = a(k, r);
                        const double akc = a(k, c);
                        a(k, r) = cs * akr - sn * akc;
                        a(k, c) = sn * akr + cs * akc;
                    }
                    for (Eigen::Index k = 0; k < p; ++k)
                    {
                        const double ark = a(r, k);
                        const double ack = a(c, k);
                        a(r, k) = cs * ark - sn * ack;
                        a(c, k) = sn * ark + cs * ack;
                    }
                    a(r, c) = 0.0;
                    a(c, r) = 0.0;

                    for (Eigen::Index k = 0; k < p; ++k)
                    {
                        const double vkr = v(k, r);
                        const double vkc = v(k, c);
                        v(k, r) = cs * vkr - sn * vkc;
                        v(k, c) = sn * vkr + cs * vkc;
                    }
                }
            }
        }

        std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&a](Eigen::Index x, Eigen::Index y)
                         { return a(x, x) > a(y, y); });

        EigenPairs out;
        out.values.resize(p);
        out.vectors.resize(p, p);
        out.sweeps = sweep;
        for (Eigen::Index k = 0; k < p; ++k)
        {
            const Eigen::Index src = order[static_cast<std::size_t>(k)];
            out.values(k) = a(src, src);
            Eigen::VectorXd col = v.col(src);
            Eigen::Index arg = 0;
            for (Eigen::Index i = 1; i < p; ++i)
            {
                if (std::abs(col(i)) > std::abs(col(arg)))
                {
                    arg = i;
                }
            }
            if (col(arg) < 0.0)
            {
                col = -col;
            }
            out.vectors.col(k) = col;
        }
        return out;
    }

    // ---------------------------------------------------------------------
    // SampleDecomposition

    SampleDecomposition::SampleDecomposition(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors)
        : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors))
    {
        const Eigen::Index p = eigenvalues_.size();
        require(p >= 2, "SampleDecomposition: need p >= 2, got p=" + std::to_string(p));
        require(eigenvectors_.rows() == p && eigenvectors_.cols() == p,
                "SampleDecomposition: eigenvector matrix must be p x p");
        for (Eigen::Index i = 0; i < p; ++i)
        {
            require(eigenvalues_(i) > 0.0, "SampleDecomposition: scatter matrix is not positive definite (l_" +
                                               std::to_string(i + 1) + " = " + std::to_string(eigenvalues_(i)) + ")");
            if (i > 0)
            {
                require(eigenvalues_(i) <= eigenvalues_(i - 1), "SampleDecomposition: eigenvalues must be descending");
            }
        }
        trace_ = eigenvalues_.sum();
        rates_ = eigenvalues_ / trace_;
    }

    SampleDecomposition symmetric_eigendecompose(const ScatterSample &sample)
    {
        require(sample.dim() >= 2, "symmetric_eigendecompose: need p >= 2, got p=" + std::to_string(sample.dim()));
        EigenPairs pairs = jacobi_eigen(sample.matrix());
        return SampleDecomposition(std::move(pairs.values), std::move(pairs.vectors));
    }

    std::string to_string(LossKind kind)
    {
        return kind == LossKind::entropy ? "entropy" : "quadratic";
    }

} // namespace spectra
