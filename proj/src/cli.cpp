#include "spectra/cli.hpp"

#include "spectra/experiments.hpp"
#include "spectra/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace spectra
{

    namespace
    {
        struct IoError : std::runtime_error
        {
            using std::runtime_error::runtime_error;
        };

        const std::vector<std::string> kCommands{"bias",       "risk",    "dimension", "invariance",
                                                 "stein-haff", "weights", "verify"};

        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
            {
                return "";
            }
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }

        std::vector<std::string> split_commas(const std::string &s)
        {
            std::vector<std::string> out;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ','))
            {
                item = trim(item);
                if (!item.empty())
                {
                    out.push_back(item);
                }
            }
            return out;
        }

        /// key=value lines become "--key=value" arguments.
        std::vector<std::string> read_config(const std::string &path)
        {
            std::ifstream in(path);
            if (!in)
            {
                throw IoError("cannot read config file '" + path + "'");
            }
            std::vector<std::string> args;
            std::string line;
            int lineno = 0;
            while (std::getline(in, line))
            {
                ++lineno;
                line = trim(line);
                if (line.empty() || line[0] == '#')
                {
                    continue;
                }
                const auto eq = line.find('=');
                if (eq == std::string::npos)
                {
                    throw SpecError(path + ":" + std::to_string(lineno) + ": expected key=value");
                }
                std::string key = trim(line.substr(0, eq));
                while (!key.empty() && key[0] == '-')
                {
                    key.erase(0, 1);
                }
                if (key.empty() || key == "config")
                {
                    throw SpecError(path + ":" + std::to_string(lineno) + ": invalid key");
                }
                args.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
            }
            return args;
        }

        /// Splices config-file arguments in right after the subcommand so that later flags win.
        std::vector<std::string> expand_config(std::vector<std::string> args)
        {
            std::optional<std::string> path;
            for (std::size_t i = 1; i < args.size(); ++i)
            {
                if (args[i] == "--config" && i + 1 < args.size())
                {
                    path = args[i + 1];
                }
                else if (args[i].rfind("--config=", 0) == 0)
                {
                    path = args[i].substr(9);
                }
            }
            if (!path)
            {
                return args;
            }
            std::size_t at = 1;
            for (std::size_t i = 1; i < args.size(); ++i)
            {
                if (std::find(kCommands.begin(), kCommands.end(), args[i]) != kCommands.end())
                {
                    at = i + 1;
                    break;
                }
            }
            const auto extra = read_config(*path);
            args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
            return args;
        }

        std::uint64_t env_seed()
        {
            const char *v = std::getenv("SPECTRA_SHRINK_SEED");
            if (v == nullptr || *v == '\0')
            {
                return 0;
            }
            std::size_t used = 0;
            std::uint64_t seed = 0;
            try
            {
                seed = std::stoull(v, &used);
            }
            catch (const std::exception &)
            {
                used = 0;
            }
            if (used == 0 || v[used] != '\0')
            {
                throw SpecError(std::string("SPECTRA_SHRINK_SEED is not an unsigned integer: '") + v + "'");
            }
            return seed;
        }

        void write_file(const std::string &path, const std::string &text)
        {
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            if (!f)
            {
                throw IoError("cannot open '" + path + "' for writing");
            }
            f << text;
            f.flush();
            if (!f)
            {
                throw IoError("failed writing '" + path + "'");
            }
        }

        /// Raw flag values, resolved into an ExperimentSpec after parsing.
        struct Flags
        {
            int p = 10;
            int n = 30;
            int q = 1;
            std::string spectrum;
            int spiked_case = 0;
            std::uint64_t reps = 10000;
            std::optional<std::uint64_t> seed;
            std::string dist;
            double tstar = 0.8;
            std::string out;
            unsigned jobs = 1;
            std::string config;
            bool table1 = false;
            bool table2 = false;
            std::string loss = "quadratic";
            std::string estimators;
            bool normalize_c2 = false;
            bool control_variate = false;
            std::string only;
        };

        void add_common(CLI::App &sub, Flags &f)
        {
            sub.add_option("--seed", f.seed, "Master seed (default: $SPECTRA_SHRINK_SEED or 0)");
            sub.add_option("--jobs", f.jobs, "Worker threads, 0 = all cores; output does not depend on it");
            sub.add_option("--out", f.out, "Write the CSV here instead of stdout");
            sub.add_option("--config", f.config, "key=value file; command-line flags override it");
        }

        void add_experiment(CLI::App &sub, Flags &f)
        {
            add_common(sub, f);
            sub.add_option("--n", f.n, "Degrees of freedom of the scatter matrix");
            sub.add_option("--spectrum", f.spectrum,
                           "Comma list or builtin: uniform<p>, table1:<row>, table2:<row>, case:<k>");
            sub.add_option("--reps", f.reps, "Monte Carlo replicates (>= 100)");
            sub.add_option("--dist", f.dist, "wishart | normal | t:<nu>");
            sub.add_option("--estimators", f.estimators, "Comma list of classical, q1, q2, ...");
        }

        ExperimentSpec to_spec(ExperimentKind kind, const Flags &f)
        {
            ExperimentSpec s;
            s.kind = kind;
            if (!f.spectrum.empty())
            {
                s.spectrum = f.spectrum;
            }
            if (f.spiked_case != 0)
            {
                s.spiked_case = f.spiked_case;
            }
            s.table1 = f.table1;
            s.table2 = f.table2;
            s.p = f.p;
            s.n = f.n;
            s.q = f.q;
            s.replicates = f.reps;
            s.seed = f.seed ? *f.seed : env_seed();
            s.estimators = split_commas(f.estimators);
            if (!f.dist.empty())
            {
                try
                {
                    s.distribution = Distribution::parse(f.dist);
                }
                catch (const std::invalid_argument &e)
                {
                    throw SpecError(e.what());
                }
            }
            else if (kind == ExperimentKind::invariance)
            {
                s.distribution = Distribution::elliptical_t(5);
            }
            s.t_star = f.tstar;
            if (f.loss == "entropy")
            {
                s.loss = LossKind::entropy;
            }
            else if (f.loss == "quadratic")
            {
                s.loss = LossKind::quadratic;
            }
            else
            {
                throw SpecError("--loss must be entropy or quadratic, got '" + f.loss + "'");
            }
            s.normalize_for_relative = f.normalize_c2;
            s.control_variate = f.control_variate;
            s.output_path = f.out;
            s.jobs = f.jobs;
            return s;
        }

        int run_verify(const Flags &f, std::ostream &out)
        {
            const std::uint64_t seed = f.seed ? *f.seed : env_seed();
            std::vector<int> only;
            for (const auto &tok : split_commas(f.only))
            {
                try
                {
                    only.push_back(std::stoi(tok));
                }
                catch (const std::exception &)
                {
                    throw SpecError("--only expects criterion ids, got '" + tok + "'");
                }
                if (only.back() < 1 || only.back() > kCriterionCount)
                {
                    throw SpecError("--only: criterion id must be in 1.." + std::to_string(kCriterionCount));
                }
            }
            const auto results =
                run_acceptance(seed, f.jobs, [&](const CriterionResult &r) { out << format_result_line(r) << std::endl; },
                               only);
            int passed = 0;
            for (const auto &r : results)
            {
                passed += r.passed ? 1 : 0;
            }
            out << passed << "/" << results.size() << " criteria passed (seed " << seed << ")" << std::endl;
            if (!f.out.empty())
            {
                write_file(f.out, acceptance_csv(results, seed));
            }
            return passed == static_cast<int>(results.size()) ? kExitOk : kExitVerifyFailed;
        }
    } // namespace

    int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
    {
        Flags f;
        CLI::App app{"Shrinkage estimation of PCA contribution rates: simulation and verification harness",
                     "spectra-shrink"};
        app.set_version_flag("--version", std::string(kVersion));
        app.require_subcommand(1);
        app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

        auto *bias = app.add_subcommand("bias", "Mean sample rates against the first-order expansion");
        add_experiment(*bias, f);
        bias->add_flag("--table1", f.table1, "Run every built-in bias spectrum");
        bias->add_flag("--control-variate", f.control_variate, "Report the control-variate mean (Wishart only)");

        auto *risk = app.add_subcommand("risk", "Paired Monte Carlo risk of several estimators");
        add_experiment(*risk, f);
        risk->add_flag("--table2", f.table2, "Run every built-in risk spectrum");
        risk->add_option("--loss", f.loss, "quadratic | entropy");

        auto *dim = app.add_subcommand("dimension", "Histograms of chosen dimensions for a spiked model");
        add_experiment(*dim, f);
        dim->add_option("--case", f.spiked_case, "Built-in spiked case 1..10");
        dim->add_option("--tstar", f.tstar, "Cumulative-rate cut-off in (0, 1)");
        dim->add_flag("--normalize-c2", f.normalize_c2, "Rescale estimates to unit sum before the 1/p rule");

        auto *inv = app.add_subcommand("invariance", "KS comparison of rate laws, Wishart vs --dist");
        add_experiment(*inv, f);

        auto *sh = app.add_subcommand("stein-haff", "Empirical check of the Stein-Haff identity");
        add_experiment(*sh, f);

        auto *w = app.add_subcommand("weights", "Print a weight vector and its condition report");
        w->add_option("--p", f.p, "Dimension (>= 4)");
        w->add_option("--n", f.n, "Degrees of freedom (>= p)");
        w->add_option("--q", f.q, "Family index, 1 <= q <= p/2 - 1");
        add_common(*w, f);

        auto *ver = app.add_subcommand("verify", "Run the acceptance suite");
        add_common(*ver, f);
        ver->add_option("--only", f.only, "Comma list of criterion ids to run");

        for (auto *sub : {bias, risk, dim, inv, sh, w, ver})
        {
            sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            for (auto *opt : sub->get_options())
            {
                opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            }
        }

        try
        {
            std::vector<std::string> args(argv, argv + argc);
            args = expand_config(std::move(args));
            std::vector<const char *> cargs;
            for (const auto &a : args)
            {
                cargs.push_back(a.c_str());
            }
            try
            {
                app.parse(static_cast<int>(cargs.size()), cargs.data());
            }
            catch (const CLI::ParseError &e)
            {
                const int code = app.exit(e, out, err);
                return code == 0 ? kExitOk : kExitInvalidSpec;
            }

            if (ver->parsed())
            {
                return run_verify(f, out);
            }

            ExperimentKind kind = ExperimentKind::bias;
            if (risk->parsed())
            {
                kind = ExperimentKind::risk;
            }
            else if (dim->parsed())
            {
                kind = ExperimentKind::dimension;
            }
            else if (inv->parsed())
            {
                kind = ExperimentKind::invariance;
            }
            else if (sh->parsed())
            {
                kind = ExperimentKind::stein_haff;
            }
            else if (w->parsed())
            {
                kind = ExperimentKind::weights;
            }

            const ExperimentSpec spec = to_spec(kind, f);
            const ExperimentResult result = run_experiment(spec);
            if (spec.output_path.empty())
            {
                out << result.csv << std::flush;
                err << result.summary << std::endl;
            }
            else
            {
                write_file(spec.output_path, result.csv);
                out << result.summary << " -> " << spec.output_path << std::endl;
            }
            return kExitOk;
        }
        catch (const IoError &e)
        {
            err << "error: " << e.what() << std::endl;
            return kExitIo;
        }
        catch (const std::invalid_argument &e)
        {
            err << "invalid spec: " << e.what() << std::endl;
            return kExitInvalidSpec;
        }
        catch (const std::exception &e)
        {
            err << "error: " << e.what() << std::endl;
            return kExitVerifyFailed;
        }
    }

} // namespace spectra
