#include <doctest.h>

#include "spectra/cli.hpp"
#include "spectra/experiments.hpp"
#include "spectra/verify.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace spectra;
namespace fs = std::filesystem;

namespace
{
    struct CliRun
    {
        int code;
        std::string out;
        std::string err;
    };

    CliRun cli(std::vector<std::string> args)
    {
        args.insert(args.begin(), "spectra-shrink");
        std::vector<const char *> argv;
        for (const auto &a : args)
        {
            argv.push_back(a.c_str());
        }
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return {code, out.str(), err.str()};
    }

    std::vector<std::string> lines(const std::string &text)
    {
        std::vector<std::string> out;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line))
        {
            out.push_back(line);
        }
        return out;
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path scratch(const std::string &name)
    {
        const fs::path dir = fs::temp_directory_path() / "spectra_shrink_tests";
        fs::create_directories(dir);
        return dir / name;
    }

    const std::regex kTrailer(R"(# seed=\d+, reps=\d+, version=\d+\.\d+\.\d+)");
}

TEST_CASE("builtin catalog")
{
    CHECK(table1_spectra().size() == 11);
    CHECK(table2_spectra().size() == 18);
    const std::vector<double> row5{0.18, 0.18, 0.18, 0.18, 0.18, 0.02, 0.02, 0.02, 0.02, 0.02};
    for (std::size_t i = 0; i < 10; ++i)
    {
        CHECK(table1_spectra()[4][i] == doctest::Approx(row5[i]));
    }
    for (const auto &row : table2_spectra())
    {
        double s = 0.0;
        for (double v : row)
        {
            s += v;
        }
        CHECK(s == doctest::Approx(1.0));
    }
    CHECK(table2_spectra().back()[0] == doctest::Approx(0.9));
    CHECK(table2_spectra().back()[9] == doctest::Approx(0.1 / 9.0));

    const std::vector<double> case1{19, 19, 19, 19, 19, 1, 1, 1, 1, 1};
    CHECK(resolve_spectrum("case:1").values() == case1);
    const std::vector<double> case7{32, 25.5, 19, 12.5, 6, 1, 1, 1, 1, 1};
    CHECK(resolve_spectrum("case:7").values() == case7);

    const auto all = builtin_cases();
    CHECK(all.size() == 11 + 18 + 20);
    CHECK(all.back().spec.n == 100);
    CHECK(all.back().spec.spiked_case == 10);
}

TEST_CASE("spectrum names")
{
    CHECK(resolve_spectrum("uniform10").size() == 10);
    CHECK(resolve_spectrum("uniform4")[0] == doctest::Approx(0.25));
    CHECK(resolve_spectrum("0.5, 0.3,0.2").size() == 3);
    CHECK(resolve_spectrum("table2:18")[0] == doctest::Approx(0.9));
    CHECK_THROWS_AS(resolve_spectrum("table1:12"), SpecError);
    CHECK_THROWS_AS(resolve_spectrum("case:0"), SpecError);
    CHECK_THROWS_AS(resolve_spectrum("0.2,0.5"), SpecError);
    CHECK_THROWS_AS(resolve_spectrum("0.5,abc"), SpecError);
    CHECK_THROWS_AS(resolve_spectrum("uniform1"), SpecError);
}

TEST_CASE("estimator names")
{
    CHECK(resolve_estimators({}, 10, 30).size() == 3);
    CHECK(resolve_estimators({}, 5, 30).size() == 2);
    CHECK(resolve_estimators({}, 3, 30).size() == 1);
    CHECK(resolve_estimators({"q2"}, 10, 30)[0].label() == "q2");
    CHECK_THROWS_AS(resolve_estimators({"q5"}, 10, 30), SpecError);
    CHECK_THROWS_AS(resolve_estimators({"stein"}, 10, 30), SpecError);
}

TEST_CASE("validation names the violated precondition")
{
    ExperimentSpec w;
    w.kind = ExperimentKind::weights;
    w.q = 5;
    CHECK_THROWS_WITH_AS(validate(w), doctest::Contains("q must satisfy"), SpecError);
    w.q = 1;
    w.n = 9;
    CHECK_THROWS_WITH_AS(validate(w), doctest::Contains("n >= p"), SpecError);

    ExperimentSpec b;
    b.spectrum = "uniform10";
    b.replicates = 99;
    CHECK_THROWS_WITH_AS(validate(b), doctest::Contains("replicates"), SpecError);
    b.replicates = 100;
    b.n = 8;
    CHECK_THROWS_WITH_AS(validate(b), doctest::Contains("n >= p"), SpecError);

    ExperimentSpec d;
    d.kind = ExperimentKind::dimension;
    d.spiked_case = 1;
    d.t_star = 1.0;
    CHECK_THROWS_WITH_AS(validate(d), doctest::Contains("t*"), SpecError);
    d.t_star = 0.8;
    d.spiked_case = 11;
    CHECK_THROWS_AS(validate(d), SpecError);
    d.spiked_case.reset();
    CHECK_THROWS_AS(validate(d), SpecError);

    ExperimentSpec sh;
    sh.kind = ExperimentKind::stein_haff;
    sh.spectrum = "uniform10";
    sh.distribution = Distribution::elliptical_t(5);
    CHECK_THROWS_AS(validate(sh), SpecError);
}

TEST_CASE("bias report layout")
{
    ExperimentSpec s;
    s.spectrum = "uniform10";
    s.replicates = 500;
    s.seed = 42;
    const auto rows = lines(run_experiment(s).csv);
    REQUIRE(rows.size() == 12);
    CHECK(rows[0] == "i,lambda,mc_mean_d,expansion,stderr");
    CHECK(rows[1].rfind("1,0.1,", 0) == 0);
    CHECK(rows[1].find(",,") != std::string::npos); // no expansion under multiplicity
    CHECK(rows.back() == "# seed=42, reps=500, version=" + std::string(kVersion));

    s.spectrum = "0.5,0.3,0.2";
    s.control_variate = true;
    const auto cv = lines(run_experiment(s).csv);
    REQUIRE(cv.size() == 5);
    CHECK(cv[1].find(",,") == std::string::npos);
}

TEST_CASE("risk report over all built-in risk spectra")
{
    ExperimentSpec s;
    s.kind = ExperimentKind::risk;
    s.table2 = true;
    s.replicates = 200;
    s.seed = 7;
    const auto rows = lines(run_experiment(s).csv);
    REQUIRE(rows.size() == 20);
    CHECK(rows[0] == "tau1,tau2,tau3,tau4,tau5,tau6,tau7,tau8,tau9,tau10,risk0,risk1,risk2,se0,se1,se2");
    CHECK(std::regex_match(rows.back(), kTrailer));
}

TEST_CASE("dimension report layout")
{
    ExperimentSpec s;
    s.kind = ExperimentKind::dimension;
    s.spiked_case = 1;
    s.replicates = 300;
    s.seed = 9;
    const auto rows = lines(run_experiment(s).csv);
    REQUIRE(rows.size() == 8);
    CHECK(rows[0] == "criterion,estimator,true_dim,dim1,dim2,dim3,dim4,dim5,dim6,dim7,dim8,dim9,dim10,dim0");
    CHECK(rows[1].rfind("C.1,classical,5,", 0) == 0);
    CHECK(rows[6].rfind("C.2,q2,5,", 0) == 0);

    s.spiked_case.reset();
    s.spectrum = "case:3";
    CHECK(lines(run_experiment(s).csv)[1].rfind("C.1,classical,3,", 0) == 0);
}

TEST_CASE("weights report")
{
    ExperimentSpec s;
    s.kind = ExperimentKind::weights;
    s.p = 10;
    s.n = 30;
    const ExperimentResult r = run_experiment(s);
    const auto rows = lines(r.csv);
    REQUIRE(rows.size() == 13);
    CHECK(rows[1] == "1,0.810811");
    CHECK(rows[11].find("c1=true") != std::string::npos);
    CHECK(r.summary.find("hold") != std::string::npos);
}

TEST_CASE("csv acceptance export quotes fields")
{
    const std::vector<CriterionResult> rs{{4, "a, b", true, "x \"y\"", "z"}};
    const auto rows = lines(acceptance_csv(rs, 3));
    CHECK(rows[0] == "id,name,status,observed,expected");
    CHECK(rows[1] == "4,\"a, b\",PASS,\"x \"\"y\"\"\",z");
}

TEST_CASE("cli: success, usage and spec errors")
{
    const CliRun ok = cli({"weights", "--p", "10", "--n", "30", "--q", "2"});
    CHECK(ok.code == kExitOk);
    CHECK(ok.out.rfind("i,beta\n", 0) == 0);
    CHECK_FALSE(ok.err.empty());

    CHECK(cli({"weights", "--p", "10", "--q", "5"}).code == kExitInvalidSpec);
    CHECK(cli({"bias", "--spectrum", "uniform10", "--n", "5"}).code == kExitInvalidSpec);
    CHECK(cli({"bias", "--spectrum", "uniform10", "--reps", "50"}).code == kExitInvalidSpec);
    CHECK(cli({"dimension", "--case", "1", "--tstar", "1.2"}).code == kExitInvalidSpec);
    CHECK(cli({"invariance", "--spectrum", "uniform5", "--dist", "t:2"}).code == kExitInvalidSpec);
    CHECK(cli({"bias", "--bogus"}).code == kExitInvalidSpec);
    CHECK(cli({}).code == kExitInvalidSpec);
    CHECK(cli({"--help"}).code == kExitOk);
    const CliRun bad = cli({"risk", "--spectrum", "uniform10", "--loss", "huber", "--reps", "100"});
    CHECK(bad.code == kExitInvalidSpec);
    CHECK(bad.err.find("--loss") != std::string::npos);
}

TEST_CASE("cli: output file and I/O errors")
{
    const fs::path out = scratch("bias.csv");
    const CliRun r = cli({"bias", "--spectrum", "uniform10", "--reps", "200", "--seed", "3", "--out", out.string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("bias:") != std::string::npos);
    CHECK(lines(slurp(out)).size() == 12);

    const fs::path missing = scratch("no_such_dir") / "x.csv";
    CHECK(cli({"weights", "--out", missing.string()}).code == kExitIo);
    CHECK(cli({"weights", "--config", scratch("absent.cfg").string()}).code == kExitIo);
}

TEST_CASE("cli: config file with flag override")
{
    const fs::path cfg = scratch("run.cfg");
    {
        std::ofstream f(cfg);
        f << "# weights setup\np = 12\nn=40\nq=3\n";
    }
    const CliRun from_file = cli({"weights", "--config", cfg.string()});
    REQUIRE(from_file.code == kExitOk);
    CHECK(lines(from_file.out).size() == 15);
    CHECK(from_file.err.find("p=12, n=40, q=3") != std::string::npos);

    const CliRun overridden = cli({"weights", "--config", cfg.string(), "--q", "1"});
    REQUIRE(overridden.code == kExitOk);
    CHECK(overridden.err.find("p=12, n=40, q=1") != std::string::npos);

    {
        std::ofstream f(cfg);
        f << "not a pair\n";
    }
    CHECK(cli({"weights", "--config", cfg.string()}).code == kExitInvalidSpec);
}

TEST_CASE("cli: seed from the environment, flag wins")
{
    setenv("SPECTRA_SHRINK_SEED", "123", 1);
    const CliRun env = cli({"bias", "--spectrum", "0.6,0.4", "--reps", "100"});
    REQUIRE(env.code == kExitOk);
    CHECK(lines(env.out).back() == "# seed=123, reps=100, version=" + std::string(kVersion));
    const CliRun flag = cli({"bias", "--spectrum", "0.6,0.4", "--reps", "100", "--seed", "5"});
    CHECK(lines(flag.out).back() == "# seed=5, reps=100, version=" + std::string(kVersion));
    setenv("SPECTRA_SHRINK_SEED", "abc", 1);
    CHECK(cli({"bias", "--spectrum", "0.6,0.4", "--reps", "100"}).code == kExitInvalidSpec);
    unsetenv("SPECTRA_SHRINK_SEED");
    const CliRun none = cli({"bias", "--spectrum", "0.6,0.4", "--reps", "100"});
    CHECK(lines(none.out).back() == "# seed=0, reps=100, version=" + std::string(kVersion));
}

TEST_CASE("cli: identical output at any worker count")
{
    for (const std::vector<std::string> &base :
         {std::vector<std::string>{"bias", "--spectrum", "table1:6", "--reps", "700", "--seed", "1"},
          std::vector<std::string>{"risk", "--spectrum", "table2:4", "--reps", "600", "--loss", "entropy"},
          std::vector<std::string>{"dimension", "--case", "6", "--reps", "900", "--normalize-c2"},
          std::vector<std::string>{"invariance", "--spectrum", "0.4,0.3,0.2,0.1", "--n", "8", "--reps", "500"},
          std::vector<std::string>{"stein-haff", "--spectrum", "0.4,0.3,0.2,0.1", "--n", "8", "--reps", "500"}})
    {
        auto a = base;
        a.insert(a.end(), {"--jobs", "1"});
        auto b = base;
        b.insert(b.end(), {"--jobs", "3"});
        const CliRun x = cli(a);
        const CliRun y = cli(b);
        REQUIRE(x.code == kExitOk);
        CHECK(x.out == y.out);
    }
}

TEST_CASE("cli: verify subset")
{
    const fs::path out = scratch("verify.csv");
    const CliRun r = cli({"verify", "--only", "4", "--out", out.string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.rfind("PASS [4]", 0) == 0);
    CHECK(lines(slurp(out)).size() == 3);
    CHECK(cli({"verify", "--only", "11"}).code == kExitInvalidSpec);
}
