/**
 * @file core.hpp
 * @brief Domain types shared by every module: population spectra, contribution
 *        rates, scatter matrices and their spectral decompositions.
 *
 * All types are immutable after construction. Constructors validate their
 * invariants and throw std::invalid_argument on violation.
 */

#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectra
{

    /// Thrown when the iterative eigensolver exhausts its sweep budget.
    class ConvergenceError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /**
     * @brief Ordered population eigenvalues lambda_1 >= ... >= lambda_p > 0.
     *
     * Requires p >= 2.
     */
    class Spectrum
    {
    public:
        explicit Spectrum(std::vector<double> values);

        const std::vector<double> &values() const noexcept { return values_; }
        std::size_t size() const noexcept { return values_.size(); }
        double operator[](std::size_t i) const { return values_[i]; }
        double total() const noexcept;

        /// Same spectrum scaled to unit total.
        Spectrum normalized() const;

        /// True when two adjacent eigenvalues agree within rel_tol * lambda_1.
        bool has_multiplicity(double rel_tol = 1e-12) const noexcept;

    private:
        std::vector<double> values_;
    };

    /**
     * @brief Estimated or population contribution rates.
     *
     * Population rates sum to one. Shrinkage estimates generally do not, so
     * the only invariant enforced here is strict positivity.
     */
    class ContributionRates
    {
    public:
        explicit ContributionRates(std::vector<double> rates);
        explicit ContributionRates(const Eigen::VectorXd &rates);

        const std::vector<double> &values() const noexcept { return rates_; }
        std::size_t size() const noexcept { return rates_.size(); }
        double operator[](std::size_t i) const { return rates_[i]; }
        double sum() const noexcept;

        /// Rescaled copy summing to one. Reporting only; estimators never call it.
        ContributionRates normalized() const;

        Eigen::VectorXd as_vector() const;

    private:
        std::vector<double> rates_;
    };

    /// tau_i = lambda_i / sum_j lambda_j.
    ContributionRates contribution_rates(const Spectrum &spectrum);

    /**
     * @brief Symmetric scatter matrix S = Z'Z together with its degrees of freedom.
     *
     * Symmetry is checked to 1e-10 relative to the largest entry. Positive
     * definiteness is not checked here; it is a property of the sampler and
     * is enforced by symmetric_eigendecompose().
     */
    class ScatterSample
    {
    public:
        ScatterSample(Eigen::MatrixXd matrix, int dof);

        const Eigen::MatrixXd &matrix() const noexcept { return matrix_; }
        int dof() const noexcept { return dof_; }
        Eigen::Index dim() const noexcept { return matrix_.rows(); }

    private:
        Eigen::MatrixXd matrix_;
        int dof_;
    };

    /// Eigenpairs of a symmetric matrix, eigenvalues descending.
    struct EigenPairs
    {
        Eigen::VectorXd values;
        Eigen::MatrixXd vectors; ///< column k pairs with values(k)
        int sweeps = 0;
    };

    inline constexpr int kMaxJacobiSweeps = 100;

    /**
     * Cyclic Jacobi eigensolver.
     *
     * Stops once the off-diagonal Frobenius norm drops below
     * 1e-12 * ||A||_F. Eigenvalues are stably sorted descending and each
     * eigenvector is sign-fixed so that its largest-magnitude entry is positive.
     *
     * Throws std::invalid_argument for non-square or non-symmetric input and
     * ConvergenceError after kMaxJacobiSweeps sweeps.
     */
    EigenPairs jacobi_eigen(const Eigen::MatrixXd &a);

    /// Spectral decomposition S = H diag(l) H' with rates d = l / sum(l).
    class SampleDecomposition
    {
    public:
        SampleDecomposition(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors);

        const Eigen::VectorXd &eigenvalues() const noexcept { return eigenvalues_; }
        const Eigen::VectorXd &rates() const noexcept { return rates_; }
        const Eigen::MatrixXd &eigenvectors() const noexcept { return eigenvectors_; }
        Eigen::Index dim() const noexcept { return eigenvalues_.size(); }
        double trace() const noexcept { return trace_; }

        ContributionRates contribution_rates() const { return ContributionRates(rates_); }

    private:
        Eigen::VectorXd eigenvalues_;
        Eigen::VectorXd rates_;
        Eigen::MatrixXd eigenvectors_;
        double trace_;
    };

    /// Decomposes S. Rejects p < 2 and scatter matrices that are not positive definite.
    SampleDecomposition symmetric_eigendecompose(const ScatterSample &sample);

    enum class LossKind
    {
        entropy,
        quadratic
    };

    std::string to_string(LossKind kind);

    struct LossValue
    {
        double value = 0.0;
        LossKind kind = LossKind::entropy;
    };

} // namespace spectra
