#include "spectra/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace spectra
{

    namespace
    {
        std::vector<double> repeat_split(double head, int head_count, double tail, int tail_count)
        {
            std::vector<double> v(static_cast<std::size_t>(head_count), head);
            v.insert(v.end(), static_cast<std::size_t>(tail_count), tail);
            return v;
        }

        // One leading rate t, the remaining 1 - t spread evenly over nine coordinates.
        std::vector<double> single_spike(double t)
        {
            return repeat_split(t, 1, (1.0 - t) / 9.0, 9);
        }

        int parse_int(const std::string &text, const std::string &what)
        {
            std::size_t used = 0;
            int v = 0;
            try
            {
                v = std::stoi(text, &used);
            }
            catch (const std::exception &)
            {
                used = 0;
            }
            if (used == 0 || used != text.size())
            {
                throw SpecError(what + ": cannot parse integer '" + text + "'");
            }
            return v;
        }

        std::vector<double> parse_list(const std::string &text)
        {
            std::vector<double> out;
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ','))
            {
                std::size_t used = 0;
                double v = 0.0;
                try
                {
                    v = std::stod(item, &used);
                }
                catch (const std::exception &)
                {
                    used = 0;
                }
                // allow surrounding blanks
                while (used < item.size() && item[used] == ' ')
                {
                    ++used;
                }
                if (used == 0 || used != item.size())
                {
                    throw SpecError("spectrum: cannot parse value '" + item + "'");
                }
                out.push_back(v);
            }
            return out;
        }

        std::string join_numbers(const std::vector<double> &v)
        {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i)
            {
                s += (i ? "," : "") + format_number(v[i]);
            }
            return s;
        }

        SpikedModel model_from_spectrum(const Spectrum &s)
        {
            const double noise = s.values().back();
            SpikedModel m;
            m.dimension = static_cast<int>(s.size());
            m.noise = noise;
            for (double v : s.values())
            {
                if (v > noise)
                {
                    m.spikes.push_back(v - noise);
                }
            }
            return m;
        }

        Spectrum spectrum_of(const ExperimentSpec &spec)
        {
            if (spec.spiked_case)
            {
                return spiked_spectrum(spiked_case(*spec.spiked_case));
            }
            if (!spec.spectrum)
            {
                throw SpecError(to_string(spec.kind) + ": a spectrum (--spectrum) is required");
            }
            return resolve_spectrum(*spec.spectrum);
        }

        std::vector<ShrinkageWeights> estimators_of(const ExperimentSpec &spec, int p)
        {
            return resolve_estimators(spec.estimators, p, spec.n);
        }

        MonteCarloOptions monte_carlo_of(const ExperimentSpec &spec)
        {
            return MonteCarloOptions{spec.distribution, spec.replicates, spec.seed, spec.jobs};
        }

        std::string header_join(const std::vector<std::string> &cols)
        {
            std::string s;
            for (std::size_t i = 0; i < cols.size(); ++i)
            {
                s += (i ? "," : "") + cols[i];
            }
            return s + "\n";
        }
    } // namespace

    std::string to_string(ExperimentKind kind)
    {
        switch (kind)
        {
        case ExperimentKind::bias:
            return "bias";
        case ExperimentKind::risk:
            return "risk";
        case ExperimentKind::dimension:
            return "dimension";
        case ExperimentKind::invariance:
            return "invariance";
        case ExperimentKind::stein_haff:
            return "stein-haff";
        case ExperimentKind::weights:
            return "weights";
        }
        return "unknown";
    }

    std::string format_number(double value)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", value);
        return buf;
    }

    std::string metadata_line(std::uint64_t seed, std::uint64_t replicates)
    {
        return "# seed=" + std::to_string(seed) + ", reps=" + std::to_string(replicates) + ", version=" + kVersion +
               "\n";
    }

    // ---------------------------------------------------------------------
    // Catalog

    const std::vector<std::vector<double>> &table1_spectra()
    {
        static const std::vector<std::vector<double>> rows = {
            std::vector<double>(10, 0.1),
            repeat_split(0.12, 5, 0.08, 5),
            repeat_split(0.14, 5, 0.06, 5),
            repeat_split(0.16, 5, 0.04, 5),
            repeat_split(0.18, 5, 0.02, 5),
            repeat_split(0.198, 5, 0.002, 5),
            single_spike(0.2),
            single_spike(0.4),
            single_spike(0.6),
            single_spike(0.8),
            single_spike(0.99),
        };
        return rows;
    }

    const std::vector<std::vector<double>> &table2_spectra()
    {
        static const std::vector<std::vector<double>> rows = []
        {
            std::vector<std::vector<double>> r;
            for (int k = 0; k <= 9; ++k)
            {
                r.push_back(repeat_split(0.10 + 0.01 * k, 5, 0.10 - 0.01 * k, 5));
            }
            for (int k = 2; k <= 9; ++k)
            {
                r.push_back(single_spike(0.1 * k));
            }
            return r;
        }();
        return rows;
    }

    SpikedModel spiked_case(int k)
    {
        static const std::vector<std::vector<double>> spikes = {
            {18, 18, 18, 18, 18},
            {22.5, 22.5, 22.5, 22.5},
            {30, 30, 30},
            {45, 45},
            {90},
            {26, 22, 18, 14, 10},
            {31, 24.5, 18, 11.5, 5},
            {36, 27, 18, 9},
            {45, 30, 15},
            {80, 10},
        };
        if (k < 1 || k > static_cast<int>(spikes.size()))
        {
            throw SpecError("case must be in 1..10, got " + std::to_string(k));
        }
        return SpikedModel{10, spikes[static_cast<std::size_t>(k - 1)], 1.0};
    }

    std::vector<NamedExperiment> builtin_cases()
    {
        std::vector<NamedExperiment> out;
        for (std::size_t r = 0; r < table1_spectra().size(); ++r)
        {
            ExperimentSpec s;
            s.kind = ExperimentKind::bias;
            s.spectrum = "table1:" + std::to_string(r + 1);
            s.n = 30;
            out.push_back({"table1-row" + std::to_string(r + 1), s});
        }
        for (std::size_t r = 0; r < table2_spectra().size(); ++r)
        {
            ExperimentSpec s;
            s.kind = ExperimentKind::risk;
            s.spectrum = "table2:" + std::to_string(r + 1);
            s.n = 30;
            out.push_back({"table2-row" + std::to_string(r + 1), s});
        }
        for (int n : {30, 100})
        {
            for (int k = 1; k <= 10; ++k)
            {
                ExperimentSpec s;
                s.kind = ExperimentKind::dimension;
                s.spiked_case = k;
                s.n = n;
                out.push_back({"case" + std::to_string(k) + "-n" + std::to_string(n), s});
            }
        }
        return out;
    }

    Spectrum resolve_spectrum(const std::string &text)
    {
        auto pick = [&](const std::vector<std::vector<double>> &rows, const std::string &idx, const char *table)
        {
            const int k = parse_int(idx, table);
            if (k < 1 || k > static_cast<int>(rows.size()))
            {
                throw SpecError(std::string(table) + " row must be in 1.." + std::to_string(rows.size()) + ", got " +
                                std::to_string(k));
            }
            return Spectrum(rows[static_cast<std::size_t>(k - 1)]);
        };
        try
        {
            if (text.rfind("uniform", 0) == 0)
            {
                const int p = parse_int(text.substr(7), "uniform spectrum");
                if (p < 2)
                {
                    throw SpecError("uniform spectrum needs p >= 2");
                }
                return Spectrum(std::vector<double>(static_cast<std::size_t>(p), 1.0 / p));
            }
            if (text.rfind("table1:", 0) == 0)
            {
                return pick(table1_spectra(), text.substr(7), "table1");
            }
            if (text.rfind("table2:", 0) == 0)
            {
                return pick(table2_spectra(), text.substr(7), "table2");
            }
            if (text.rfind("case:", 0) == 0)
            {
                return spiked_spectrum(spiked_case(parse_int(text.substr(5), "case")));
            }
            return Spectrum(parse_list(text));
        }
        catch (const SpecError &)
        {
            throw;
        }
        catch (const std::invalid_argument &e)
        {
            throw SpecError(std::string("spectrum: ") + e.what());
        }
    }

    std::vector<ShrinkageWeights> resolve_estimators(const std::vector<std::string> &names, int p, int n)
    {
        std::vector<std::string> list = names;
        if (list.empty())
        {
            list = {"classical"};
            for (int q = 1; q <= 2 && family_q_valid(p, q); ++q)
            {
                list.push_back("q" + std::to_string(q));
            }
        }
        std::vector<ShrinkageWeights> out;
        for (const auto &name : list)
        {
            if (name == "classical" || name == "q0")
            {
                out.push_back(classical_weights(p));
                continue;
            }
            if (name.size() < 2 || name[0] != 'q')
            {
                throw SpecError("estimator: expected 'classical' or 'q<k>', got '" + name + "'");
            }
            const int q = parse_int(name.substr(1), "estimator");
            if (!family_q_valid(p, q))
            {
                throw SpecError("estimator " + name + ": q must satisfy 1 <= q <= p/2 - 1 for p=" + std::to_string(p));
            }
            if (n < p)
            {
                throw SpecError("estimator " + name + ": need n >= p");
            }
            out.push_back(family_weights(p, n, q));
        }
        return out;
    }

    // ---------------------------------------------------------------------
    // Validation

    void validate(const ExperimentSpec &spec)
    {
        if (spec.kind == ExperimentKind::weights)
        {
            if (spec.p < 4)
            {
                throw SpecError("weights: need p >= 4, got p=" + std::to_string(spec.p));
            }
            if (spec.n < spec.p)
            {
                throw SpecError("weights: need n >= p, got n=" + std::to_string(spec.n) + ", p=" + std::to_string(spec.p));
            }
            if (!family_q_valid(spec.p, spec.q))
            {
                throw SpecError("weights: q must satisfy 1 <= q <= p/2 - 1, got q=" + std::to_string(spec.q) +
                                " for p=" + std::to_string(spec.p));
            }
            return;
        }

        if (spec.replicates < 100)
        {
            throw SpecError("replicates must be >= 100, got " + std::to_string(spec.replicates));
        }
        if (spec.distribution.kind == Distribution::Kind::elliptical_t && spec.distribution.nu < 3)
        {
            throw SpecError("t distribution needs nu >= 3");
        }

        std::vector<Spectrum> spectra;
        if (spec.kind == ExperimentKind::bias && spec.table1)
        {
            for (const auto &row : table1_spectra())
            {
                spectra.emplace_back(row);
            }
        }
        else if (spec.kind == ExperimentKind::risk && spec.table2)
        {
            for (const auto &row : table2_spectra())
            {
                spectra.emplace_back(row);
            }
        }
        else if (spec.kind == ExperimentKind::dimension && !spec.spiked_case && !spec.spectrum)
        {
            throw SpecError("dimension: --case or --spectrum is required");
        }
        else
        {
            spectra.push_back(spectrum_of(spec));
        }

        for (const auto &s : spectra)
        {
            const int p = static_cast<int>(s.size());
            if (spec.n < p)
            {
                throw SpecError("need n >= p, got n=" + std::to_string(spec.n) + ", p=" + std::to_string(p));
            }
            if (spec.kind == ExperimentKind::risk || spec.kind == ExperimentKind::dimension ||
                spec.kind == ExperimentKind::stein_haff)
            {
                resolve_estimators(spec.estimators, p, spec.n);
            }
        }

        switch (spec.kind)
        {
        case ExperimentKind::bias:
            if (spec.control_variate && spec.distribution.kind != Distribution::Kind::wishart)
            {
                throw SpecError("bias: the control-variate estimate needs Wishart draws");
            }
            break;
        case ExperimentKind::dimension:
            if (!(spec.t_star > 0.0 && spec.t_star < 1.0))
            {
                throw SpecError("t* must lie in (0, 1), got " + format_number(spec.t_star));
            }
            if (spec.spiked_case)
            {
                spiked_case(*spec.spiked_case);
            }
            break;
        case ExperimentKind::stein_haff:
            if (spec.distribution.kind != Distribution::Kind::wishart)
            {
                throw SpecError("stein-haff: the identity holds for Wishart draws only");
            }
            break;
        default:
            break;
        }
    }

    // ---------------------------------------------------------------------
    // Runners

    namespace
    {
        ExperimentResult run_bias(const ExperimentSpec &spec)
        {
            std::vector<std::pair<std::string, Spectrum>> rows;
            if (spec.table1)
            {
                for (std::size_t r = 0; r < table1_spectra().size(); ++r)
                {
                    rows.emplace_back(std::to_string(r + 1), Spectrum(table1_spectra()[r]));
                }
            }
            else
            {
                rows.emplace_back("", spectrum_of(spec));
            }

            std::string csv = spec.table1 ? "row," : "";
            csv += "i,lambda,mc_mean_d,expansion,stderr\n";
            for (const auto &[label, spectrum] : rows)
            {
                const BiasEstimate est = estimate_bias(spectrum, spec.n, monte_carlo_of(spec));
                std::vector<double> expansion;
                if (!spectrum.has_multiplicity())
                {
                    expansion = bias_expansion(spectrum, spec.n);
                }
                const Eigen::VectorXd &mean = spec.control_variate ? *est.cv_mean : est.mean;
                const Eigen::VectorXd &se = spec.control_variate ? *est.cv_std_error : est.std_error;
                for (std::size_t i = 0; i < spectrum.size(); ++i)
                {
                    if (spec.table1)
                    {
                        csv += label + ",";
                    }
                    csv += std::to_string(i + 1) + "," + format_number(spectrum[i]) + "," +
                           format_number(mean(static_cast<Eigen::Index>(i))) + "," +
                           (expansion.empty() ? std::string() : format_number(expansion[i])) + "," +
                           format_number(se(static_cast<Eigen::Index>(i))) + "\n";
                }
            }
            csv += metadata_line(spec.seed, spec.replicates);
            return {csv, "bias: " + std::to_string(rows.size()) + " spectrum(s), n=" + std::to_string(spec.n) + ", " +
                             std::to_string(spec.replicates) + " replicates, seed " + std::to_string(spec.seed)};
        }

        ExperimentResult run_risk(const ExperimentSpec &spec)
        {
            std::vector<Spectrum> rows;
            if (spec.table2)
            {
                for (const auto &r : table2_spectra())
                {
                    rows.emplace_back(r);
                }
            }
            else
            {
                rows.push_back(spectrum_of(spec));
            }
            const int p = static_cast<int>(rows.front().size());
            const auto estimators = estimators_of(spec, p);
            const std::size_t k = estimators.size();

            std::vector<std::string> cols;
            for (int i = 1; i <= p; ++i)
            {
                cols.push_back("tau" + std::to_string(i));
            }
            for (std::size_t e = 0; e < k; ++e)
            {
                cols.push_back("risk" + std::to_string(e));
            }
            for (std::size_t e = 0; e < k; ++e)
            {
                cols.push_back("se" + std::to_string(e));
            }
            std::string csv = header_join(cols);

            for (std::size_t r = 0; r < rows.size(); ++r)
            {
                MonteCarloOptions mc = monte_carlo_of(spec);
                const PairedRiskComparison cmp = compare_risks(rows[r], spec.n, estimators, spec.loss, mc);
                const ContributionRates tau = contribution_rates(rows[r]);
                std::vector<double> line(tau.values());
                for (const auto &risk : cmp.risks)
                {
                    line.push_back(risk.mean_loss);
                }
                for (const auto &risk : cmp.risks)
                {
                    line.push_back(risk.std_error);
                }
                csv += join_numbers(line) + "\n";
            }
            csv += metadata_line(spec.seed, spec.replicates);
            std::string labels;
            for (const auto &w : estimators)
            {
                labels += (labels.empty() ? "" : "/") + w.label();
            }
            return {csv, "risk (" + to_string(spec.loss) + "): " + std::to_string(rows.size()) + " spectrum row(s), " +
                             labels + ", n=" + std::to_string(spec.n) + ", " + std::to_string(spec.replicates) +
                             " replicates, seed " + std::to_string(spec.seed)};
        }

        ExperimentResult run_dimension(const ExperimentSpec &spec)
        {
            const SpikedModel model =
                spec.spiked_case ? spiked_case(*spec.spiked_case) : model_from_spectrum(resolve_spectrum(*spec.spectrum));
            const auto estimators = estimators_of(spec, model.dimension);
            const std::vector<Criterion> criteria{Criterion::cumulative(spec.t_star), Criterion::relative()};
            DimensionExperimentOptions opts{monte_carlo_of(spec), spec.normalize_for_relative};
            const auto hists = dimension_experiment(model, spec.n, estimators, criteria, opts);

            std::vector<std::string> cols{"criterion", "estimator", "true_dim"};
            for (int d = 1; d <= model.dimension; ++d)
            {
                cols.push_back("dim" + std::to_string(d));
            }
            cols.push_back("dim0");
            std::string csv = header_join(cols);
            for (const auto &h : hists)
            {
                csv += h.criterion.label() + "," + h.estimator + "," + std::to_string(h.true_dim);
                for (auto c : h.counts)
                {
                    csv += "," + std::to_string(c);
                }
                csv += "," + std::to_string(h.zero_count) + "\n";
            }
            csv += metadata_line(spec.seed, spec.replicates);
            return {csv, "dimension: " + std::to_string(hists.size()) + " histograms, n=" + std::to_string(spec.n) + ", " +
                             std::to_string(spec.replicates) + " replicates, seed " + std::to_string(spec.seed)};
        }

        ExperimentResult run_invariance(const ExperimentSpec &spec)
        {
            const Spectrum spectrum = spectrum_of(spec);
            MonteCarloOptions mc = monte_carlo_of(spec);
            mc.distribution = Distribution::wishart();
            const auto coords = invariance_check(spectrum, spec.n, spec.distribution, mc);
            std::string csv = "i,ks_statistic,critical_value,accept,mean_wishart,mean_alt\n";
            int accepted = 0;
            for (std::size_t i = 0; i < coords.size(); ++i)
            {
                const auto &c = coords[i];
                accepted += c.accepted ? 1 : 0;
                csv += std::to_string(i + 1) + "," + format_number(c.ks_statistic) + "," + format_number(c.critical_value) +
                       "," + (c.accepted ? "true" : "false") + "," + format_number(c.mean_reference) + "," +
                       format_number(c.mean_alternative) + "\n";
            }
            csv += metadata_line(spec.seed, spec.replicates);
            return {csv, "invariance: wishart vs " + spec.distribution.to_string() + ", " + std::to_string(accepted) + "/" +
                             std::to_string(coords.size()) + " coordinates accepted at 1%"};
        }

        ExperimentResult run_stein_haff(const ExperimentSpec &spec)
        {
            const Spectrum spectrum = spectrum_of(spec);
            const auto estimators = estimators_of(spec, static_cast<int>(spectrum.size()));
            std::string csv = "estimator,mean_trace,se_trace,mean_g,se_g,diff,combined_se,paired_se,redraws\n";
            double worst = 0.0;
            for (const auto &w : estimators)
            {
                const SteinHaffCheck c = stein_haff_check(spectrum, spec.n, w, monte_carlo_of(spec));
                worst = std::max(worst, std::abs(c.diff_mean) / c.combined_se);
                csv += w.label() + "," + format_number(c.mean_trace) + "," + format_number(c.se_trace) + "," +
                       format_number(c.mean_g) + "," + format_number(c.se_g) + "," + format_number(c.diff_mean) + "," +
                       format_number(c.combined_se) + "," + format_number(c.paired_se) + "," + std::to_string(c.redraws) +
                       "\n";
            }
            csv += metadata_line(spec.seed, spec.replicates);
            return {csv, "stein-haff: max |diff| = " + format_number(worst) + " combined standard errors"};
        }

        ExperimentResult run_weights(const ExperimentSpec &spec)
        {
            const ShrinkageWeights w = family_weights(spec.p, spec.n, spec.q);
            const ConditionReport rep = check_conditions(w, spec.n);
            std::string csv = "i,beta\n";
            for (std::size_t i = 0; i < w.size(); ++i)
            {
                csv += std::to_string(i + 1) + "," + format_number(w.beta[i]) + "\n";
            }
            auto flag = [](bool b)
            { return b ? "true" : "false"; };
            csv += std::string("# m=") + std::to_string(rep.m_used) + ", c1=" + flag(rep.c1_holds) +
                   ", c2=" + format_number(rep.c2_value) + " (" + flag(rep.c2_holds) + ")" +
                   ", c3=" + format_number(rep.c3_value) + " (" + flag(rep.c3_holds) + ")" +
                   ", bounding_sum=" + format_number(family_bounding_sum(w)) + "\n";
            csv += std::string("# seed=n/a, reps=n/a, version=") + kVersion + "\n";
            return {csv, "weights: p=" + std::to_string(spec.p) + ", n=" + std::to_string(spec.n) + ", q=" +
                             std::to_string(spec.q) + ", conditions " + (rep.all_hold() ? "hold" : "FAIL")};
        }
    } // namespace

    ExperimentResult run_experiment(const ExperimentSpec &spec)
    {
        validate(spec);
        switch (spec.kind)
        {
        case ExperimentKind::bias:
            return run_bias(spec);
        case ExperimentKind::risk:
            return run_risk(spec);
        case ExperimentKind::dimension:
            return run_dimension(spec);
        case ExperimentKind::invariance:
            return run_invariance(spec);
        case ExperimentKind::stein_haff:
            return run_stein_haff(spec);
        case ExperimentKind::weights:
            return run_weights(spec);
        }
        throw std::logic_error("run_experiment: unknown kind");
    }

} // namespace spectra
