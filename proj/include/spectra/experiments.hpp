/**
 * @file experiments.hpp
 * @brief Experiment descriptions, the built-in case catalog, and CSV reports.
 *
 * An ExperimentSpec is validated in full before any sampling starts; every
 * violated precondition raises SpecError naming it. Reports are plain CSV
 * with a header row and a trailing "# seed=..., reps=..., version=..." line,
 * and are byte-identical for a given spec regardless of the worker count.
 */

#pragma once

#include "spectra/dimension.hpp"
#include "spectra/estimators.hpp"
#include "spectra/evaluation.hpp"
#include "spectra/sampling.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectra
{

    inline constexpr const char *kVersion = "0.1.0";

    /// An experiment description violates a precondition.
    class SpecError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    enum class ExperimentKind
    {
        bias,
        risk,
        dimension,
        invariance,
        stein_haff,
        weights
    };

    std::string to_string(ExperimentKind kind);

    struct ExperimentSpec
    {
        ExperimentKind kind = ExperimentKind::bias;

        /// Population spectrum: a comma list ("0.5,0.3,0.2") or a builtin name
        /// ("uniform10", "table1:<row>", "table2:<row>", "case:<k>").
        std::optional<std::string> spectrum;
        std::optional<int> spiked_case; ///< 1..10
        bool table1 = false;            ///< bias over every built-in bias spectrum
        bool table2 = false;            ///< risk over every built-in risk spectrum

        int p = 10; ///< used by `weights` only; otherwise p comes from the spectrum
        int n = 30;
        int q = 1; ///< used by `weights`
        std::uint64_t replicates = 10000;
        std::uint64_t seed = 0;
        /// "classical", "q1", "q2", ... Empty means classical, q1 and q2 (when admissible).
        std::vector<std::string> estimators;
        Distribution distribution = Distribution::wishart();
        double t_star = 0.8;
        LossKind loss = LossKind::quadratic;
        bool normalize_for_relative = false;
        bool control_variate = false;
        std::string output_path;
        unsigned jobs = 1;
    };

    struct NamedExperiment
    {
        std::string name;
        ExperimentSpec spec;
    };

    /// The eleven built-in bias spectra (unit total).
    const std::vector<std::vector<double>> &table1_spectra();

    /// The eighteen quadratic-risk spectra (unit total).
    const std::vector<std::vector<double>> &table2_spectra();

    /// Built-in spiked cases 1..10, p = 10, sigma^2 = 1.
    SpikedModel spiked_case(int k);

    /// Named specs for every built-in spectrum and case, the latter at n = 30 and n = 100.
    std::vector<NamedExperiment> builtin_cases();

    /// Parses a comma list or builtin spectrum name.
    Spectrum resolve_spectrum(const std::string &text);

    /// Estimator names resolved against (p, n).
    std::vector<ShrinkageWeights> resolve_estimators(const std::vector<std::string> &names, int p, int n);

    /// Throws SpecError on the first violated precondition.
    void validate(const ExperimentSpec &spec);

    struct ExperimentResult
    {
        std::string csv;
        std::string summary;
    };

    /// Validates, runs and formats the report. Does not touch the filesystem.
    ExperimentResult run_experiment(const ExperimentSpec &spec);

    /// "%.6g" formatting used throughout the reports.
    std::string format_number(double value);

    std::string metadata_line(std::uint64_t seed, std::uint64_t replicates);

} // namespace spectra
