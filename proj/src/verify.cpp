#include "spectra/verify.hpp"

#include "spectra/dimension.hpp"
#include "spectra/evaluation.hpp"
#include "spectra/experiments.hpp"
#include "spectra/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spectra
{

    namespace
    {
        std::string vec_text(const std::vector<double> &v)
        {
            std::string s = "(";
            for (std::size_t i = 0; i < v.size(); ++i)
            {
                s += (i ? " " : "") + format_number(v[i]);
            }
            return s + ")";
        }

        MonteCarloOptions mc(std::uint64_t replicates, std::uint64_t seed, unsigned jobs)
        {
            MonteCarloOptions o;
            o.replicates = replicates;
            o.seed = seed;
            o.jobs = jobs;
            return o;
        }

        double max_abs_diff(const Eigen::VectorXd &a, const std::vector<double> &b)
        {
            double worst = 0.0;
            for (std::size_t i = 0; i < b.size(); ++i)
            {
                worst = std::max(worst, std::abs(a(static_cast<Eigen::Index>(i)) - b[i]));
            }
            return worst;
        }

        std::vector<double> to_std(const Eigen::VectorXd &v)
        {
            return {v.data(), v.data() + v.size()};
        }

        // Bias of the sample rates on the uniform and the two-level spectrum.
        CriterionResult bias_rows(std::uint64_t seed, unsigned jobs)
        {
            CriterionResult r{1, "mean sample rates, p=10 n=30", false, "", ""};
            const std::vector<double> ref_uniform{0.216, 0.172, 0.142, 0.118, 0.097, 0.080, 0.064, 0.050, 0.037, 0.024};
            const std::vector<double> ref_split{0.328, 0.245, 0.187, 0.139, 0.094, 0.003, 0.002, 0.002, 0.001, 0.001};
            const BiasEstimate a = estimate_bias(Spectrum(table1_spectra()[0]), 30, mc(10000, seed, jobs));
            const BiasEstimate b =
                estimate_bias(Spectrum(table1_spectra()[5]), 30, mc(10000, derive_seed(seed, 1), jobs));
            const double da = max_abs_diff(a.mean, ref_uniform);
            const double db = max_abs_diff(b.mean, ref_split);
            r.passed = da <= 0.005 && db <= 0.005;
            r.observed = "uniform " + vec_text(to_std(a.mean)) + " max dev " + format_number(da) + "; two-level " +
                         vec_text(to_std(b.mean)) + " max dev " + format_number(db);
            r.expected = vec_text(ref_uniform) + " and " + vec_text(ref_split) + " within 0.005";
            return r;
        }

        std::vector<PairedRiskComparison> table2_comparisons(LossKind loss, std::uint64_t seed, unsigned jobs)
        {
            std::vector<PairedRiskComparison> out;
            const auto &rows = table2_spectra();
            for (std::size_t k = 0; k < rows.size(); ++k)
            {
                const Spectrum s(rows[k]);
                const auto est = resolve_estimators({}, 10, 30);
                out.push_back(compare_risks(s, 30, est, loss, mc(10000, derive_seed(seed, k), jobs)));
            }
            return out;
        }

        CriterionResult quadratic_risk_rows(std::uint64_t seed, unsigned jobs)
        {
            CriterionResult r{2, "quadratic risk of classical/q1/q2, 18 spectra", false, "", ""};
            const auto cmp = table2_comparisons(LossKind::quadratic, seed, jobs);
            auto risks = [](const PairedRiskComparison &c)
            {
                std::vector<double> v;
                for (const auto &x : c.risks)
                {
                    v.push_back(x.mean_loss);
                }
                return v;
            };
            const std::vector<double> first = risks(cmp.front());
            const std::vector<double> last = risks(cmp.back());
            const std::vector<double> ref_first{3.57, 2.11, 2.56};
            const std::vector<double> ref_last{3.94, 2.79, 3.28};
            bool ok = true;
            for (std::size_t e = 0; e < 3; ++e)
            {
                ok = ok && std::abs(first[e] - ref_first[e]) <= 0.1 && std::abs(last[e] - ref_last[e]) <= 0.15;
            }
            int ordered = 0;
            for (const auto &c : cmp)
            {
                const auto v = risks(c);
                ordered += (v[1] < v[2] && v[2] < v[0]) ? 1 : 0;
            }
            r.passed = ok && ordered == static_cast<int>(cmp.size());
            r.observed = "first row " + vec_text(first) + ", last row " + vec_text(last) + ", ordering q1<q2<classical on " +
                         std::to_string(ordered) + "/" + std::to_string(cmp.size()) + " rows";
            r.expected = vec_text(ref_first) + " +-0.1, " + vec_text(ref_last) + " +-0.15, ordering on 18/18";
            return r;
        }

        CriterionResult entropy_dominance(std::uint64_t seed, unsigned jobs)
        {
            CriterionResult r{3, "entropy-risk dominance over classical, 18 spectra", false, "", ""};
            const auto cmp = table2_comparisons(LossKind::entropy, seed, jobs);
            int good = 0;
            double weakest = -std::numeric_limits<double>::infinity();
            for (const auto &c : cmp)
            {
                bool row_ok = true;
                for (std::size_t k = 0; k < c.diff_mean.size(); ++k)
                {
                    const double z = c.diff_mean[k] / c.diff_std_error[k];
                    weakest = std::max(weakest, z);
                    row_ok = row_ok && c.diff_mean[k] <= -3.0 * c.diff_std_error[k];
                }
                good += row_ok ? 1 : 0;
            }
            r.passed = good == static_cast<int>(cmp.size());
            r.observed = std::to_string(good) + "/" + std::to_string(cmp.size()) +
                         " rows; weakest paired difference = " + format_number(weakest) + " SE";
            r.expected = "q1 and q2 below classical by >= 3 paired SE on 18/18 rows";
            return r;
        }

        CriterionResult condition_identities()
        {
            CriterionResult r{4, "weight-family identities, p=4..20", false, "", ""};
            double worst_inverse = 0.0;
            double worst_c2 = -std::numeric_limits<double>::infinity();
            double worst_bound = 0.0;
            int checked = 0;
            for (int p = 4; p <= 20; ++p)
            {
                for (int n : {p, p + 1, 30, 100, 200})
                {
                    if (n < p)
                    {
                        continue;
                    }
                    for (int q = 1; family_q_valid(p, q); ++q)
                    {
                        const ShrinkageWeights w = family_weights(p, n, q);
                        double inv = 0.0;
                        for (double b : w.beta)
                        {
                            inv += 1.0 / b;
                        }
                        worst_inverse = std::max(worst_inverse, std::abs(inv - p));
                        worst_c2 = std::max(worst_c2, condition2_sum(w.beta, n, w.m));
                        worst_bound = std::max(worst_bound, std::abs(family_bounding_sum(w)));
                        ++checked;
                    }
                }
            }
            r.passed = worst_inverse <= 1e-12 && worst_c2 <= 1e-12 && worst_bound <= 1e-12;
            r.observed = std::to_string(checked) + " (p,n,q) triples; max |sum 1/beta - p| = " +
                         format_number(worst_inverse) + ", max split sum = " + format_number(worst_c2) +
                         ", max |bounding sum| = " + format_number(worst_bound);
            r.expected = "|sum 1/beta - p| <= 1e-12, split sum <= 0, |bounding sum| <= 1e-12";
            return r;
        }

        CriterionResult stein_haff(std::uint64_t seed, unsigned jobs)
        {
            CriterionResult r{5, "Stein-Haff identity, 1e5 draws", false, "", ""};
            struct Case
            {
                std::string label;
                Spectrum spectrum;
                int n;
                ShrinkageWeights weights;
            };
            const Spectrum s3({0.5, 0.3, 0.2});
            const Spectrum s10(table2_spectra()[12]);
            // p = 3 admits no q >= 1; the q = 1 formula degenerates to all ones there,
            // so an extra non-constant weight vector of the same shape is checked too.
            const std::vector<Case> cases{
                {"p3 classical", s3, 10, classical_weights(3)},
                {"p3 outer", s3, 10, custom_weights({10.0 / 12.0, 1.0, 10.0 / 8.0})},
                {"p10 classical", s10, 30, classical_weights(10)},
                {"p10 q1", s10, 30, family_weights(10, 30, 1)},
            };
            bool ok = true;
            std::string obs;
            for (std::size_t k = 0; k < cases.size(); ++k)
            {
                const auto &c = cases[k];
                const SteinHaffCheck sh = stein_haff_check(c.spectrum, c.n, c.weights, mc(100000, derive_seed(seed, k), jobs));
                const double z = std::abs(sh.diff_mean) / sh.combined_se;
                ok = ok && z <= 3.0;
                obs += (k ? "; " : "") + c.label + " |diff|=" + format_number(std::abs(sh.diff_mean)) + " (" +
                       format_number(z) + " SE)";
            }
            r.passed = ok;
            r.observed = obs;
            r.expected = "|mean trace - mean G| <= 3 combined SE in every case";
            return r;
        }

        CriterionResult invariance(std::uint64_t seed, unsigned jobs)
        {
            CriterionResult r{6, "rate law under Wishart vs t(5), p=5 n=20", false, "", ""};
            const Spectrum s({0.4, 0.25, 0.15, 0.12, 0.08});
            const auto coords = invariance_check(s, 20, Distribution::elliptical_t(5), mc(5000, seed, jobs), 0.01);
            int accepted = 0;
            std::vector<double> ks;
            for (const auto &c : coords)
            {
                accepted += c.accepted ? 1 : 0;
                ks.push_back(c.ks_statistic);
            }
            r.passed = accepted == static_cast<int>(coords.size());
            r.observed = "KS " + vec_text(ks) + ", critical " + format_number(coords.front().critical_value) + ", " +
                         std::to_string(accepted) + "/5 accepted";
            r.expected = "5/5 coordinates accepted at the 1% level";
            return r;
        }

        CriterionResult bias_expansion_check(std::uint64_t seed, unsigned jobs)
        {
            CriterionResult r{7, "first-order bias expansion, p=3", false, "", ""};
            const Spectrum s({0.5, 0.3, 0.2});
            double residual[2] = {0.0, 0.0};
            const int ns[2] = {200, 400};
            for (int k = 0; k < 2; ++k)
            {
                const BiasEstimate b = estimate_bias(s, ns[k], mc(1000000, derive_seed(seed, k), jobs));
                const std::vector<double> e = bias_expansion(s, ns[k]);
                residual[k] = max_abs_diff(*b.cv_mean, e);
            }
            const double ratio = residual[0] / residual[1];
            r.passed = residual[0] < 5e-4 && ratio >= 3.0 && ratio <= 5.0;
            r.observed = "residual n=200 " + format_number(residual[0]) + ", n=400 " + format_number(residual[1]) +
                         ", ratio " + format_number(ratio);
            r.expected = "residual < 5e-4 at n=200, ratio in [3, 5]";
            return r;
        }

        std::vector<DimensionHistogram> case_histograms(int k, int n, std::uint64_t seed, unsigned jobs)
        {
            const SpikedModel model = spiked_case(k);
            const auto est = resolve_estimators({}, 10, n);
            DimensionExperimentOptions opts{mc(10000, seed, jobs), false};
            return dimension_experiment(model, n, est, {Criterion::cumulative(0.8), Criterion::relative()}, opts);
        }

        const DimensionHistogram &find(const std::vector<DimensionHistogram> &h, Criterion::Kind kind,
                                       const std::string &estimator)
        {
            for (const auto &x : h)
            {
                if (x.criterion.kind == kind && x.estimator == estimator)
                {
                    return x;
                }
            }
            throw std::logic_error("histogram not found: " + estimator);
        }

        // Largest cell deviation from reference counts (dims 1..10, then dim 0).
        double cell_deviation(const DimensionHistogram &h, const std::vector<double> &ref_counts)
        {
            double worst = std::abs(h.proportion(0));
            for (int d = 1; d <= 10; ++d)
            {
                worst = std::max(worst, std::abs(h.proportion(d) - ref_counts[static_cast<std::size_t>(d - 1)] / 1e4));
            }
            return worst;
        }

        CriterionResult histograms_n30(std::uint64_t seed, unsigned jobs)
        {
            CriterionResult r{8, "dimension histograms at n=30", false, "", ""};
            const auto c1 = case_histograms(1, 30, seed, jobs);
            const auto c5 = case_histograms(5, 30, derive_seed(seed, 1), jobs);
            const auto &h0 = find(c1, Criterion::Kind::cumulative, "classical");
            const auto &h1 = find(c1, Criterion::Kind::cumulative, "q1");
            const std::vector<double> ref0{0, 0, 104, 9895, 1, 0, 0, 0, 0, 0};
            const std::vector<double> ref1{0, 0, 0, 9, 9991, 0, 0, 0, 0, 0};
            const std::vector<double> ref5{10000, 0, 0, 0, 0, 0, 0, 0, 0, 0};
            double dev = std::max(cell_deviation(h0, ref0), cell_deviation(h1, ref1));
            double worst5 = 1.0;
            double dev5 = 0.0;
            for (const auto &e : {"classical", "q1", "q2"})
            {
                const auto &h = find(c5, Criterion::Kind::relative, e);
                worst5 = std::min(worst5, h.proportion(1));
                dev5 = std::max(dev5, cell_deviation(h, ref5));
            }
            dev = std::max(dev, dev5);
            r.passed = h0.proportion(4) >= 0.95 && h1.proportion(5) >= 0.97 && worst5 >= 0.995 && dev <= 0.015;
            r.observed = "case 1 C.1 classical@4 " + format_number(h0.proportion(4)) + ", q1@5 " +
                         format_number(h1.proportion(5)) + "; case 5 C.2 min@1 " + format_number(worst5) +
                         "; max cell deviation " + format_number(dev);
            r.expected = ">= 0.95, >= 0.97, >= 0.995, cell deviation <= 0.015";
            return r;
        }

        CriterionResult histograms_n100(std::uint64_t seed, unsigned jobs)
        {
            CriterionResult r{9, "dimension histograms at n=100", false, "", ""};
            const auto c3 = case_histograms(3, 100, seed, jobs);
            const auto c1 = case_histograms(1, 100, derive_seed(seed, 1), jobs);
            double min3 = 1.0;
            for (const auto &h : c3)
            {
                min3 = std::min(min3, h.proportion(3));
            }
            double dev1 = 0.0;
            std::vector<double> at5;
            for (const auto &e : {"classical", "q1", "q2"})
            {
                const double p5 = find(c1, Criterion::Kind::relative, e).proportion(5);
                at5.push_back(p5);
                dev1 = std::max(dev1, std::abs(p5 - 0.995));
            }
            r.passed = min3 == 1.0 && dev1 <= 0.005;
            r.observed = "case 3 min share at 3 = " + format_number(min3) + "; case 1 C.2 share at 5 " + vec_text(at5);
            r.expected = "case 3: 1 for all six; case 1 C.2: 0.995 +-0.005";
            return r;
        }

        CriterionResult determinism(std::uint64_t seed, unsigned jobs)
        {
            CriterionResult r{10, "identical CSV across worker counts", false, "", ""};
            const unsigned a = 1;
            const unsigned b = std::max(4u, jobs);
            std::vector<ExperimentSpec> specs;
            auto base = [&](ExperimentKind kind)
            {
                ExperimentSpec s;
                s.kind = kind;
                s.replicates = 1000;
                s.seed = seed;
                return s;
            };
            ExperimentSpec bias = base(ExperimentKind::bias);
            bias.spectrum = "uniform10";
            specs.push_back(bias);
            ExperimentSpec risk = base(ExperimentKind::risk);
            risk.spectrum = "table2:18";
            risk.loss = LossKind::entropy;
            specs.push_back(risk);
            ExperimentSpec dim = base(ExperimentKind::dimension);
            dim.spiked_case = 7;
            specs.push_back(dim);
            ExperimentSpec inv = base(ExperimentKind::invariance);
            inv.spectrum = "0.4,0.25,0.15,0.12,0.08";
            inv.n = 20;
            inv.distribution = Distribution::elliptical_t(5);
            specs.push_back(inv);
            ExperimentSpec sh = base(ExperimentKind::stein_haff);
            sh.spectrum = "table1:8";
            specs.push_back(sh);

            int same = 0;
            std::size_t bytes = 0;
            for (auto s : specs)
            {
                s.jobs = a;
                const std::string x = run_experiment(s).csv;
                s.jobs = b;
                const std::string y = run_experiment(s).csv;
                same += x == y ? 1 : 0;
                bytes += x.size();
            }
            r.passed = same == static_cast<int>(specs.size());
            r.observed = std::to_string(same) + "/" + std::to_string(specs.size()) + " reports identical at jobs " +
                         std::to_string(a) + " vs " + std::to_string(b) + " (" + std::to_string(bytes) + " bytes)";
            r.expected = "all reports byte-identical";
            return r;
        }

        std::string csv_field(const std::string &s)
        {
            if (s.find_first_of(",\"\n") == std::string::npos)
            {
                return s;
            }
            std::string out = "\"";
            for (char c : s)
            {
                out += c == '"' ? std::string("\"\"") : std::string(1, c);
            }
            return out + "\"";
        }
    } // namespace

    CriterionResult run_criterion(int id, std::uint64_t seed, unsigned jobs)
    {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(id));
        switch (id)
        {
        case 1:
            return bias_rows(s, jobs);
        case 2:
            return quadratic_risk_rows(s, jobs);
        case 3:
            return entropy_dominance(s, jobs);
        case 4:
            return condition_identities();
        case 5:
            return stein_haff(s, jobs);
        case 6:
            return invariance(s, jobs);
        case 7:
            return bias_expansion_check(s, jobs);
        case 8:
            return histograms_n30(s, jobs);
        case 9:
            return histograms_n100(s, jobs);
        case 10:
            return determinism(s, jobs);
        default:
            throw std::invalid_argument("criterion id must be in 1.." + std::to_string(kCriterionCount) + ", got " +
                                        std::to_string(id));
        }
    }

    std::vector<CriterionResult> run_acceptance(std::uint64_t seed, unsigned jobs,
                                                const std::function<void(const CriterionResult &)> &on_result,
                                                const std::vector<int> &only)
    {
        std::vector<int> ids = only;
        if (ids.empty())
        {
            for (int id = 1; id <= kCriterionCount; ++id)
            {
                ids.push_back(id);
            }
        }
        std::vector<CriterionResult> out;
        for (int id : ids)
        {
            out.push_back(run_criterion(id, seed, jobs));
            if (on_result)
            {
                on_result(out.back());
            }
        }
        return out;
    }

    std::string format_result_line(const CriterionResult &r)
    {
        return std::string(r.passed ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name +
               ": observed " + r.observed + "; expected " + r.expected;
    }

    std::string acceptance_csv(const std::vector<CriterionResult> &results, std::uint64_t seed)
    {
        std::string csv = "id,name,status,observed,expected\n";
        for (const auto &r : results)
        {
            csv += std::to_string(r.id) + "," + csv_field(r.name) + "," + (r.passed ? "PASS" : "FAIL") + "," +
                   csv_field(r.observed) + "," + csv_field(r.expected) + "\n";
        }
        csv += std::string("# seed=") + std::to_string(seed) + ", reps=per-criterion, version=" + kVersion + "\n";
        return csv;
    }

} // namespace spectra
