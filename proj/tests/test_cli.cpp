#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "config.hpp"
#include "experiments.hpp"
#include "fraccaloric/errors.hpp"

using namespace fc;
namespace fs = std::filesystem;

TEST_CASE("config files parse with comments and overrides win") {
    auto path = fs::temp_directory_path() / "fc_test.cfg";
    {
        std::ofstream f(path);
        f << "# comment line\n";
        f << "alpha = 1.2   # trailing comment\n";
        f << "domain=unit-disk\n";
        f << "times = 1,4,16\n";
    }
    Config cfg = Config::from_file(path.string());
    CHECK(cfg.num("alpha", 0.0) == doctest::Approx(1.2));
    CHECK(cfg.str("domain", "") == "unit-disk");
    CHECK(cfg.list("times", {}).size() == 3);
    cfg.set("alpha", "1.5");  // flag override
    CHECK(cfg.num("alpha", 0.0) == doctest::Approx(1.5));
    auto echo = cfg.echo();
    CHECK(echo.contains("alpha"));
    fs::remove(path);
}

TEST_CASE("domain construction from config") {
    Config cfg;
    cfg.set("domain", "ball");
    cfg.set("center", "0.5,0.5");
    cfg.set("radius", "2");
    Domain d = cfg.domain();
    CHECK(d.signed_distance(pt(0.5, 0.5)) == doctest::Approx(2.0));
    Config bad;
    bad.set("domain", "dodecahedron");
    CHECK_THROWS_AS(bad.domain(), ConfigError);
    Config poly;
    poly.set("domain", "polygon");
    poly.set("vertices", "0,0,1,0,0.5,1");
    CHECK(poly.domain().contains(pt(0.5, 0.3)));
}

TEST_CASE("unknown experiment lists the valid names") {
    Config cfg;
    try {
        run_experiment("no-such-thing", cfg, (fs::temp_directory_path() / "fc_none").string());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("yaglom") != std::string::npos);
        CHECK(msg.find("ball-exit-law") != std::string::npos);
    }
}

TEST_CASE("experiment validation rejects bad numerics before work starts") {
    Config cfg;
    cfg.set("dt", "-1");
    CHECK_THROWS_AS(
        run_experiment("survival", cfg, (fs::temp_directory_path() / "fc_bad").string()),
        ConfigError);
}

TEST_CASE("a small experiment writes summary and csv artifacts") {
    Config cfg;
    cfg.set("N", "20000");
    cfg.set("seed", "3");
    auto out = fs::temp_directory_path() / "fc_smoke_ball";
    ExperimentResult res = run_experiment("ball-exit-law", cfg, out.string());
    CHECK(res.pass);
    CHECK(fs::exists(out / "summary.json"));
    CHECK(fs::exists(out / "ball_exit_histogram.csv"));
    CHECK(res.summary["schema_version"] == 1);
    CHECK(res.summary["experiment"] == "ball-exit-law");
    CHECK(res.summary.contains("checks"));
    fs::remove_all(out);
}

TEST_CASE("experiment names cover the documented set") {
    const auto& names = experiment_names();
    CHECK(names.size() == 18);
    for (const char* want :
         {"ball-exit-law", "survival", "heat-kernel", "green", "spectral-weyl", "l38", "c1",
          "martin-traces", "entrance", "yaglom", "factorization", "holder", "survival-scaling",
          "ikeda-watanabe", "lateral-kernel", "mean-value", "singular-caloric",
          "measure-recovery"})
        CHECK(std::find(names.begin(), names.end(), want) != names.end());
}
