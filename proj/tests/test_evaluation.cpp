#include <doctest.h>

#include "spectra/evaluation.hpp"
#include "spectra/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

using namespace spectra;

namespace
{
    SampleDecomposition from_eigenvalues(const std::vector<double> &l)
    {
        const Eigen::Index p = static_cast<Eigen::Index>(l.size());
        return SampleDecomposition(Eigen::Map<const Eigen::VectorXd>(l.data(), p), Eigen::MatrixXd::Identity(p, p));
    }

    // Generic Stein-Haff functional for Sigma_hat = H diag(phi(l)) H':
    //   sum_i [(n-p-1) phi_i / l_i + 2 d phi_i / d l_i] + 2 sum_{i<j} (phi_i - phi_j) / (l_i - l_j)
    // with phi_i = b_i l_i / sum(l), derivatives by central differences.
    double generic_functional(const std::vector<double> &l, const std::vector<double> &b, int n)
    {
        const std::size_t p = l.size();
        auto phi = [&](const std::vector<double> &x, std::size_t i)
        {
            double t = 0.0;
            for (double v : x)
            {
                t += v;
            }
            return b[i] * x[i] / t;
        };
        double g = 0.0;
        for (std::size_t i = 0; i < p; ++i)
        {
            const double h = 1e-6 * l[i];
            std::vector<double> up = l;
            std::vector<double> dn = l;
            up[i] += h;
            dn[i] -= h;
            const double deriv = (phi(up, i) - phi(dn, i)) / (2.0 * h);
            g += (n - static_cast<double>(p) - 1.0) * phi(l, i) / l[i] + 2.0 * deriv;
            for (std::size_t j = i + 1; j < p; ++j)
            {
                g += 2.0 * (phi(l, i) - phi(l, j)) / (l[i] - l[j]);
            }
        }
        return g;
    }

    MonteCarloOptions mc(std::uint64_t reps, std::uint64_t seed, unsigned jobs = 1)
    {
        MonteCarloOptions o;
        o.replicates = reps;
        o.seed = seed;
        o.jobs = jobs;
        return o;
    }
}

TEST_CASE("entropy loss examples")
{
    const Eigen::MatrixXd est = Eigen::Vector2d(std::exp(1.0), 1.0).asDiagonal();
    const LossValue v = entropy_loss(est, Eigen::MatrixXd::Identity(2, 2));
    CHECK(v.value == doctest::Approx(std::exp(1.0) - 2.0));
    CHECK(v.kind == LossKind::entropy);

    Eigen::MatrixXd s(2, 2);
    s << 2.0, 0.3, 0.3, 1.0;
    CHECK(entropy_loss(s, s).value == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(entropy_loss(s, Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("quadratic loss examples")
{
    const ContributionRates truth(std::vector<double>{0.5, 0.5});
    const ContributionRates est(std::vector<double>{0.4, 0.6});
    const LossValue v = quadratic_loss(est, truth);
    CHECK(v.value == doctest::Approx(0.08));
    CHECK(v.kind == LossKind::quadratic);
    CHECK(quadratic_loss(truth, truth).value == 0.0);
    CHECK_THROWS_AS(quadratic_loss(est, ContributionRates(std::vector<double>{1.0})), std::invalid_argument);
}

TEST_CASE("Stein-Haff functional, closed-form cases")
{
    CHECK(stein_haff_G(from_eigenvalues({3.0, 1.0}), classical_weights(2), 5) == doctest::Approx(2.0));

    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int p = 2; p <= 10; ++p)
    {
        std::vector<double> l(static_cast<std::size_t>(p));
        for (double &x : l)
        {
            x = u(gen);
        }
        std::sort(l.begin(), l.end(), std::greater<>());
        const double total = std::accumulate(l.begin(), l.end(), 0.0);
        const int n = p + 7;
        CHECK(stein_haff_G(from_eigenvalues(l), classical_weights(p), n) ==
              doctest::Approx((n * p - 2.0) / total));
    }
    CHECK_THROWS_AS(stein_haff_G(from_eigenvalues({2.0, 2.0, 1.0}), classical_weights(3), 5), std::invalid_argument);
}

TEST_CASE("Stein-Haff functional matches the generic form by finite differences")
{
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> u(0.2, 8.0);
    for (int p : {4, 6, 10})
    {
        for (int rep = 0; rep < 5; ++rep)
        {
            std::vector<double> l(static_cast<std::size_t>(p));
            for (double &x : l)
            {
                x = u(gen);
            }
            std::sort(l.begin(), l.end(), std::greater<>());
            const int n = 3 * p;
            for (int q = 1; family_q_valid(p, q); ++q)
            {
                const ShrinkageWeights w = family_weights(p, n, q);
                CHECK(stein_haff_G(from_eigenvalues(l), w, n) ==
                      doctest::Approx(generic_functional(l, w.beta, n)).epsilon(1e-7));
            }
        }
    }
}

TEST_CASE("pathwise integrand")
{
    const SampleDecomposition d = from_eigenvalues({5.0, 3.0, 2.0, 1.5, 1.0, 0.2});
    CHECK(risk_difference_integrand(d, classical_weights(6), 20) == doctest::Approx(0.0));
    CHECK(risk_difference_integrand(d, family_weights(6, 20, 1), 20) <= 0.0);
    CHECK(risk_difference_integrand(d, family_weights(6, 20, 2), 20) <= 0.0);

    const PathwiseBoundCheck check =
        pathwise_bound_check(Spectrum({4, 3, 2, 1, 0.5, 0.25, 0.2, 0.1}), 12, family_weights(8, 12, 1), mc(2000, 5));
    CHECK(check.violations == 0);
    CHECK(check.max_value <= 0.0);
    CHECK(check.replicates == 2000);
}

TEST_CASE("bias expansion coefficients")
{
    const std::vector<double> c = bias_expansion_coefficients(Spectrum({0.75, 0.25}));
    CHECK(c[0] == doctest::Approx(0.1875));
    CHECK(c[1] == doctest::Approx(-0.1875));

    const std::vector<double> c3 = bias_expansion_coefficients(Spectrum({0.5, 0.3, 0.2}));
    CHECK(c3[0] + c3[1] + c3[2] == doctest::Approx(0.0).epsilon(1e-14));

    const std::vector<double> e = bias_expansion(Spectrum({3.0, 1.0}), 40);
    CHECK(e[0] == doctest::Approx(0.75 + 0.1875 / 40));
    CHECK_THROWS_AS(bias_expansion_coefficients(Spectrum({1.0, 1.0})), std::invalid_argument);
}

TEST_CASE("Monte Carlo bias: plain and control-variate means agree")
{
    const BiasEstimate b = estimate_bias(Spectrum({0.5, 0.3, 0.2}), 50, mc(20000, 2));
    REQUIRE(b.cv_mean.has_value());
    for (Eigen::Index i = 0; i < 3; ++i)
    {
        CHECK(std::abs(b.mean(i) - (*b.cv_mean)(i)) <= 5.0 * b.std_error(i));
        CHECK((*b.cv_std_error)(i) < b.std_error(i));
    }
    CHECK(b.mean.sum() == doctest::Approx(1.0));
    CHECK_THROWS_AS(estimate_bias(Spectrum({0.5, 0.5}), 50, mc(99, 2)), std::invalid_argument);
}

TEST_CASE("paired risk comparison")
{
    const Spectrum s({0.4, 0.2, 0.15, 0.1, 0.08, 0.07});
    const std::vector<ShrinkageWeights> est{classical_weights(6), family_weights(6, 20, 1), family_weights(6, 20, 2)};
    const PairedRiskComparison a = compare_risks(s, 20, est, LossKind::entropy, mc(1000, 9, 1));
    const PairedRiskComparison b = compare_risks(s, 20, est, LossKind::entropy, mc(1000, 9, 3));
    REQUIRE(a.risks.size() == 3);
    REQUIRE(a.diff_mean.size() == 2);
    for (std::size_t k = 0; k < 3; ++k)
    {
        CHECK(a.risks[k].mean_loss == b.risks[k].mean_loss);
        CHECK(a.risks[k].std_error == b.risks[k].std_error);
    }
    CHECK(a.diff_mean[0] == doctest::Approx(a.risks[1].mean_loss - a.risks[0].mean_loss));
    CHECK(a.diff_mean[0] < 0.0);

    const RiskEstimate single = estimate_risk(s, 20, est[1], LossKind::entropy, mc(1000, 9));
    CHECK(single.mean_loss == doctest::Approx(a.risks[1].mean_loss).epsilon(1e-12));
}

TEST_CASE("Stein-Haff check at modest size")
{
    const SteinHaffCheck c =
        stein_haff_check(Spectrum({0.4, 0.3, 0.2, 0.1}), 10, family_weights(4, 10, 1), mc(20000, 4));
    CHECK(std::abs(c.diff_mean) <= 4.0 * c.combined_se);
    CHECK(c.combined_se == doctest::Approx(std::hypot(c.se_trace, c.se_g)));
    MonteCarloOptions t = mc(1000, 4);
    t.distribution = Distribution::elliptical_t(5);
    CHECK_THROWS_AS(stein_haff_check(Spectrum({0.5, 0.5}), 10, classical_weights(2), t), std::invalid_argument);
}

TEST_CASE("two-sample KS")
{
    CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_two_sample({1, 2}, {3, 4, 5}) == 1.0);
    CHECK(ks_two_sample({0.1, 0.4, 0.7, 1.3, 2.2}, {0.2, 0.3, 0.5, 0.9, 1.0, 1.1, 3.0}) ==
          doctest::Approx(0.2571428571428571));
    CHECK(ks_critical_value(0.01, 5000, 5000) == doctest::Approx(0.032552472614374585));
    CHECK_THROWS_AS(ks_two_sample({}, {1.0}), std::invalid_argument);
}

TEST_CASE("invariance check: Wishart against itself")
{
    const auto coords = invariance_check(Spectrum({0.4, 0.3, 0.2, 0.1}), 12, Distribution::wishart(), mc(2000, 3));
    REQUIRE(coords.size() == 4);
    for (const auto &c : coords)
    {
        CHECK(c.accepted);
        CHECK(c.ks_statistic > 0.0);
    }
}

TEST_CASE("running statistics merge like a single pass")
{
    RunningStats all(1);
    RunningStats left(1);
    RunningStats right(1);
    for (int i = 1; i <= 10; ++i)
    {
        all.push(static_cast<double>(i));
        (i <= 4 ? left : right).push(static_cast<double>(i));
    }
    left.merge(right);
    CHECK(left.count() == 10);
    CHECK(left.mean()(0) == doctest::Approx(5.5));
    CHECK(left.variance()(0) == doctest::Approx(all.variance()(0)));
    CHECK(all.variance()(0) == doctest::Approx(55.0 / 6.0));
}

TEST_CASE("replicate reduction is order-fixed and propagates errors")
{
    auto block = [](std::uint64_t b, std::uint64_t e)
    {
        std::vector<std::uint64_t> v;
        for (std::uint64_t r = b; r < e; ++r)
        {
            v.push_back(r);
        }
        return v;
    };
    auto merge = [](std::vector<std::uint64_t> &acc, const std::vector<std::uint64_t> &part)
    { acc.insert(acc.end(), part.begin(), part.end()); };
    const auto seq = reduce_replicates(1000, 4, std::vector<std::uint64_t>{}, block, merge);
    REQUIRE(seq.size() == 1000);
    for (std::uint64_t r = 0; r < 1000; ++r)
    {
        CHECK(seq[r] == r);
    }
    auto failing = [](std::uint64_t b, std::uint64_t) -> int
    {
        if (b >= 512)
        {
            throw std::runtime_error("boom");
        }
        return 1;
    };
    CHECK_THROWS_AS(reduce_replicates(1000, 3, 0, failing, [](int &a, int b) { a += b; }), std::runtime_error);
}
