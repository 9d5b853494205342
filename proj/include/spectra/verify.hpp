/**
 * @file verify.hpp
 * @brief The acceptance suite behind `spectra-shrink verify`.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace spectra
{

    struct CriterionResult
    {
        int id = 0;
        std::string name;
        bool passed = false;
        std::string observed;
        std::string expected;
    };

    inline constexpr int kCriterionCount = 10;

    /// Runs one criterion (1..10). Each criterion draws from derive_seed(seed, id).
    CriterionResult run_criterion(int id, std::uint64_t seed, unsigned jobs);

    /**
     * Runs criteria 1..10 in order, invoking `on_result` after each one.
     * An empty `only` list means all criteria.
     */
    std::vector<CriterionResult> run_acceptance(std::uint64_t seed, unsigned jobs,
                                                const std::function<void(const CriterionResult &)> &on_result = {},
                                                const std::vector<int> &only = {});

    /// One "PASS|FAIL [id] name: observed ...; expected ..." line.
    std::string format_result_line(const CriterionResult &r);

    /// CSV with columns id,name,status,observed,expected and the metadata trailer.
    std::string acceptance_csv(const std::vector<CriterionResult> &results, std::uint64_t seed);

} // namespace spectra
