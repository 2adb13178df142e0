#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dicke/errors.hpp"
#include "dicke/expcli/config.hpp"
#include "dicke/expcli/experiments.hpp"
#include "dicke/expcli/output.hpp"
#include "fixtures.hpp"

using namespace dicke;
using namespace dicke::expcli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("dicke_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& experiment, const fs::path& out, std::vector<std::string> overrides = {},
            std::string config = testing::config_path("lab.cfg"))
{
    RunRequest req;
    req.experiment = experiment;
    req.config_path = std::move(config);
    req.overrides = std::move(overrides);
    req.out_dir = out.string();
    std::ostringstream o, e;
    return run(req, o, e);
}

} // namespace

TEST_CASE("quantities convert to internal units")
{
    CHECK(parse_quantity("1 MHz", Dimension::frequency, "k", 1) == doctest::Approx(units::MHz(1.0)));
    CHECK(parse_quantity("-127 GHz", Dimension::frequency, "k", 1) == doctest::Approx(units::GHz(-127.0)));
    CHECK(parse_quantity("10 kHz", Dimension::frequency, "k", 1) == doctest::Approx(units::kHz(10.0)));
    CHECK(parse_quantity("3 rad/us", Dimension::frequency, "k", 1) == doctest::Approx(3.0));
    CHECK(parse_quantity("2e6 rad/s", Dimension::frequency, "k", 1) == doctest::Approx(2.0));
    CHECK(parse_quantity("1 ms", Dimension::time, "k", 1) == doctest::Approx(1000.0));
    CHECK(parse_quantity("500 ns", Dimension::time, "k", 1) == doctest::Approx(0.5));
    CHECK(parse_quantity("1 W", Dimension::power, "k", 1) == doctest::Approx(1000.0));
    CHECK(parse_quantity("250 uW", Dimension::power, "k", 1) == doctest::Approx(0.25));
    CHECK(parse_quantity("0.66", Dimension::dimensionless, "k", 1) == doctest::Approx(0.66));
}

TEST_CASE("unit errors name the key")
{
    try {
        ConfigFile::parse("g = 1.1 MHz\nDelta_c = -127 parsecs\n");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "Delta_c");
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(ConfigFile::parse("kappa = 5 mW\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("kappa = MHz\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("no_such_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("g = 1 MHz\ng = 2 MHz\n"), ConfigError);
}

TEST_CASE("lists and scoped lookups")
{
    auto f = ConfigFile::parse("zeta = -11.95 MHz\ntc.zeta = -11.553 MHz\n"
                               "threshold_map.omega_d = linspace(-0.2 MHz, -0.4 MHz, 3)\n");
    CHECK(f.number("zeta", "tc") == doctest::Approx(units::MHz(-11.553)));
    CHECK(f.number("zeta", "dicke") == doctest::Approx(units::MHz(-11.95)));
    const auto l = f.list("threshold_map.omega_d");
    REQUIRE(l.size() == 3);
    CHECK(l[1] == doctest::Approx(units::MHz(-0.3)));
    f.set("zeta=-12 MHz");
    CHECK(f.number("zeta", "dicke") == doctest::Approx(units::MHz(-12.0)));
    CHECK_THROWS_AS(f.set("bogus=1"), ConfigError);
    const auto b = parse_list("[1 mW, 2 mW]", Dimension::power, "k", 1);
    CHECK(b.size() == 2);
}

TEST_CASE("counts model closes the detection arithmetic")
{
    const double kappa = units::MHz(0.07);
    CHECK(counts_model(10.0, 0.177, 5.0, kappa) == doctest::Approx(7.8).epsilon(0.01));
    CHECK(counts_model(0.0, 0.177, 5.0, kappa) == 0.0);
    const auto v = counts_model(std::vector<double>{0.0, 5.0, 10.0}, 0.2, 5.0, kappa);
    CHECK(v[2] == doctest::Approx(2.0 * v[1]));
    CHECK(testing::lab_scenario().detection_efficiency == doctest::Approx(0.177).epsilon(0.01));
}

TEST_CASE("CSV fields are quoted when needed")
{
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
    CsvTable t({"x", "y"});
    t.add_row(std::vector<double>{0.1, -2.0});
    CHECK(t.str() == "x,y\r\n0.1,-2\r\n");
}

TEST_CASE("numbers format in shortest round-trip form")
{
    for (const double v : {0.1, 1.0 / 3.0, -2.5e-17, 119271.0})
        CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("identical configurations give byte-identical data files")
{
    for (const std::string exp : {"params", "ramp"}) {
        const auto a = scratch(exp + "_a");
        const auto b = scratch(exp + "_b");
        REQUIRE(run_cli(exp, a) == exit_ok);
        REQUIRE(run_cli(exp, b) == exit_ok);
        int compared = 0;
        for (const auto& entry : fs::directory_iterator(a)) {
            const auto name = entry.path().filename();
            if (name == "manifest.json")
                continue;
            CHECK(slurp(entry.path()) == slurp(b / name));
            ++compared;
        }
        CHECK(compared >= 2);
        CHECK(fs::exists(a / "manifest.json"));
        fs::remove_all(a);
        fs::remove_all(b);
    }
}

TEST_CASE("exit codes")
{
    const auto out = scratch("exit");
    CHECK(run_cli("params", out, {"Delta_c=-127 parsecs"}) == exit_config);
    CHECK(run_cli("no-such-experiment", out) == exit_config);
    CHECK(run_cli("params", out, {}, testing::config_path("missing.cfg")) == exit_config);
    CHECK(run_cli("ramp", out, {"ramp.P_end=4 mW"}) == exit_runtime);

    fs::create_directories(out);
    std::ofstream(out / "keep.txt") << "user data";
    CHECK(run_cli("params", out) == exit_config);
    CHECK(fs::exists(out / "keep.txt"));
    fs::remove_all(out);

    CHECK(run_cli("params", out) == exit_ok);
    CHECK(run_cli("params", out) == exit_ok);
    fs::remove_all(out);
}

TEST_CASE("quantum check rejects oversized systems")
{
    const auto f = ConfigFile::parse("quantum.n_lambda = 9\n");
    CHECK_THROWS_AS(build_scenario(f, Experiment::quantum_check), ConfigError);
    const auto g = ConfigFile::parse("quantum.fault = something\n");
    CHECK_THROWS_AS(build_scenario(g, Experiment::quantum_check), ConfigError);
}
