#include <doctest.h>

#include "spectra/dimension.hpp"
#include "spectra/experiments.hpp"

using namespace spectra;

namespace
{
    ContributionRates rates(std::vector<double> v)
    {
        return ContributionRates(std::move(v));
    }
}

TEST_CASE("cumulative rule")
{
    CHECK(decide_cumulative(rates({0.5, 0.3, 0.2}), 0.8) == 2);
    CHECK(decide_cumulative(rates({0.5, 0.3, 0.2}), 0.5) == 1);
    CHECK(decide_cumulative(rates({0.5, 0.3, 0.2}), 0.81) == 3);
    // Unnormalized estimates may never reach t*.
    CHECK(decide_cumulative(rates({0.3, 0.2, 0.1}), 0.9) == 3);
    CHECK_THROWS_AS(decide_cumulative(rates({0.5, 0.5}), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(decide_cumulative(rates({0.5, 0.5}), 0.0), std::invalid_argument);
}

TEST_CASE("relative rule")
{
    CHECK(decide_relative(rates({0.5, 0.3, 0.2})) == 1);
    CHECK(decide_relative(rates({0.4, 0.35, 0.25})) == 2);
    const DimensionDecision flat = decide(rates({0.25, 0.25, 0.25, 0.25}), Criterion::relative());
    CHECK(flat.chosen_dim == 0);
    CHECK(flat.degenerate);
    CHECK(Criterion::relative().label() == "C.2");
    CHECK(Criterion::cumulative(0.8).label() == "C.1");
}

TEST_CASE("histogram accessors")
{
    DimensionHistogram h;
    h.counts = {1, 5, 3};
    h.zero_count = 1;
    h.replicates = 10;
    CHECK(h.total() == 10);
    CHECK(h.mode() == 2);
    CHECK(h.proportion(2) == doctest::Approx(0.5));
    CHECK(h.proportion(0) == doctest::Approx(0.1));
    CHECK(h.proportion(7) == 0.0);
}

TEST_CASE("dimension experiment layout and determinism")
{
    const SpikedModel model = spiked_case(1);
    const auto est = resolve_estimators({}, 10, 30);
    const std::vector<Criterion> crit{Criterion::cumulative(0.8), Criterion::relative()};
    DimensionExperimentOptions opts;
    opts.monte_carlo.replicates = 1000;
    opts.monte_carlo.seed = 4;
    const auto a = dimension_experiment(model, 30, est, crit, opts);
    opts.monte_carlo.jobs = 3;
    const auto b = dimension_experiment(model, 30, est, crit, opts);
    REQUIRE(a.size() == 6);
    for (std::size_t k = 0; k < 6; ++k)
    {
        CHECK(a[k].total() == 1000);
        CHECK(a[k].counts.size() == 10);
        CHECK(a[k].true_dim == 5);
        CHECK(a[k].counts == b[k].counts);
    }
    CHECK(a[0].criterion.label() == "C.1");
    CHECK(a[0].estimator == "classical");
    CHECK(a[1].estimator == "q1");
    CHECK(a[2].estimator == "q2");
    CHECK(a[3].criterion.label() == "C.2");
}

TEST_CASE("classical rates underestimate the dimension, q1 does not")
{
    const auto est = resolve_estimators({"classical", "q1"}, 10, 30);
    DimensionExperimentOptions opts;
    opts.monte_carlo.replicates = 2000;
    opts.monte_carlo.seed = 21;
    const auto h = dimension_experiment(spiked_case(1), 30, est, {Criterion::cumulative(0.8)}, opts);
    CHECK(h[0].mode() < h[0].true_dim);
    CHECK(h[1].mode() >= h[1].true_dim);
}

TEST_CASE("dimension experiment preconditions")
{
    DimensionExperimentOptions opts;
    opts.monte_carlo.replicates = 50;
    CHECK_THROWS_AS(dimension_experiment(spiked_case(2), 30, resolve_estimators({}, 10, 30),
                                         {Criterion::relative()}, opts),
                    std::invalid_argument);
    opts.monte_carlo.replicates = 200;
    CHECK_THROWS_AS(dimension_experiment(spiked_case(2), 30, {classical_weights(9)}, {Criterion::relative()}, opts),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        dimension_experiment(spiked_case(2), 30, {classical_weights(10)}, {Criterion::cumulative(1.5)}, opts),
        std::invalid_argument);
}
