#include <doctest.h>

#include "spectra/core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace spectra;

namespace
{
    Eigen::MatrixXd random_spd(int p, std::mt19937 &gen)
    {
        std::normal_distribution<double> z;
        Eigen::MatrixXd a(p + 3, p);
        for (int i = 0; i < a.rows(); ++i)
        {
            for (int j = 0; j < p; ++j)
            {
                a(i, j) = z(gen);
            }
        }
        Eigen::MatrixXd s = a.transpose() * a;
        return 0.5 * (s + s.transpose());
    }
}

TEST_CASE("spectrum invariants")
{
    CHECK_THROWS_AS(Spectrum({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Spectrum({1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Spectrum({1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Spectrum({1.0, 2.0}), std::invalid_argument);

    const Spectrum s({3.0, 1.0});
    CHECK(s.total() == doctest::Approx(4.0));
    CHECK(s.normalized()[0] == doctest::Approx(0.75));
    CHECK_FALSE(s.has_multiplicity());
    CHECK(Spectrum({2.0, 2.0, 1.0}).has_multiplicity());
}

TEST_CASE("contribution rates")
{
    const ContributionRates tau = contribution_rates(Spectrum({3.0, 1.0}));
    CHECK(tau[0] == doctest::Approx(0.75));
    CHECK(tau[1] == doctest::Approx(0.25));
    CHECK(tau.sum() == doctest::Approx(1.0));

    const ContributionRates uniform = contribution_rates(Spectrum(std::vector<double>(10, 0.1)));
    for (double t : uniform.values())
    {
        CHECK(t == doctest::Approx(0.1));
    }

    CHECK_THROWS_AS(ContributionRates(std::vector<double>{0.5, 0.0}), std::invalid_argument);
    const ContributionRates r(std::vector<double>{0.2, 0.2});
    CHECK(r.normalized()[0] == doctest::Approx(0.5));
    CHECK(r.as_vector()(1) == doctest::Approx(0.2));
}

TEST_CASE("scatter sample checks shape and symmetry")
{
    CHECK_THROWS_AS(ScatterSample(Eigen::MatrixXd::Identity(2, 3), 5), std::invalid_argument);
    Eigen::MatrixXd a(2, 2);
    a << 1, 0.5, 0.4, 1;
    CHECK_THROWS_AS(ScatterSample(a, 5), std::invalid_argument);
    a(1, 0) = 0.5;
    CHECK_NOTHROW(ScatterSample(a, 5));
}

TEST_CASE("jacobi on a 2x2 example")
{
    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 2;
    const EigenPairs e = jacobi_eigen(a);
    CHECK(e.values(0) == doctest::Approx(3.0));
    CHECK(e.values(1) == doctest::Approx(1.0));
    CHECK(e.vectors(0, 0) == doctest::Approx(std::sqrt(0.5)));
    CHECK(e.vectors(1, 0) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("jacobi on a diagonal matrix sorts without rotating")
{
    const Eigen::MatrixXd a = Eigen::Vector3d(1.0, 5.0, 3.0).asDiagonal();
    const EigenPairs e = jacobi_eigen(a);
    CHECK(e.sweeps == 0);
    CHECK(e.values(0) == 5.0);
    CHECK(e.values(1) == 3.0);
    CHECK(e.values(2) == 1.0);
    CHECK(e.vectors(1, 0) == 1.0);
}

TEST_CASE("jacobi agrees with Eigen's self-adjoint solver")
{
    std::mt19937 gen(12345);
    for (int p = 2; p <= 12; ++p)
    {
        for (int rep = 0; rep < 5; ++rep)
        {
            const Eigen::MatrixXd a = random_spd(p, gen);
            const EigenPairs e = jacobi_eigen(a);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
            const Eigen::VectorXd ref_desc = ref.eigenvalues().reverse();
            CHECK(e.sweeps <= kMaxJacobiSweeps);
            CHECK((e.values - ref_desc).norm() <= 1e-10 * a.norm());
            for (int k = 0; k + 1 < p; ++k)
            {
                CHECK(e.values(k) >= e.values(k + 1));
            }
            const Eigen::MatrixXd recon = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
            CHECK((recon - a).norm() <= 1e-10 * a.norm());
            CHECK((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(p, p)).norm() <= 1e-10);
            for (int k = 0; k < p; ++k)
            {
                Eigen::Index arg = 0;
                e.vectors.col(k).cwiseAbs().maxCoeff(&arg);
                CHECK(e.vectors(arg, k) > 0.0);
            }
        }
    }
}

TEST_CASE("jacobi rejects non-symmetric input")
{
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 0, 1;
    CHECK_THROWS_AS(jacobi_eigen(a), std::invalid_argument);
}

TEST_CASE("sample decomposition")
{
    std::mt19937 gen(7);
    const Eigen::MatrixXd s = random_spd(6, gen);
    const SampleDecomposition d = symmetric_eigendecompose(ScatterSample(s, 9));
    CHECK(d.dim() == 6);
    CHECK(d.trace() == doctest::Approx(s.trace()));
    CHECK(d.rates().sum() == doctest::Approx(1.0));
    CHECK(d.contribution_rates()[0] == doctest::Approx(d.eigenvalues()(0) / s.trace()));

    Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(3, 3);
    singular(0, 0) = 1.0;
    singular(1, 1) = 1.0;
    CHECK_THROWS(symmetric_eigendecompose(ScatterSample(singular, 3)));

    CHECK_THROWS(SampleDecomposition(Eigen::Vector2d(1.0, 2.0), Eigen::MatrixXd::Identity(2, 2)));
}

TEST_CASE("loss kind names")
{
    CHECK(to_string(LossKind::entropy) == "entropy");
    CHECK(to_string(LossKind::quadratic) == "quadratic");
}
