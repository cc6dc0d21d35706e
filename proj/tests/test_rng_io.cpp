#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "fraccaloric/io.hpp"
#include "fraccaloric/quadrature.hpp"
#include "fraccaloric/rng.hpp"
#include "fraccaloric/special.hpp"

using namespace fc;

TEST_CASE("rng streams are deterministic and independent") {
    Rng a(42, 0), b(42, 0), c(42, 1);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    // different substreams decorrelate
    Rng a2(42, 0);
    int agree = 0;
    for (int i = 0; i < 1000; ++i)
        if ((a2.next() >> 63) == (c.next() >> 63)) ++agree;
    CHECK(agree > 400);
    CHECK(agree < 600);
}

TEST_CASE("rng moments") {
    Rng r(7, 3);
    int n = 200000;
    double su = 0, su2 = 0, sn = 0, sn2 = 0, se = 0;
    for (int i = 0; i < n; ++i) {
        double u = r.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        su += u;
        su2 += u * u;
        double z = r.normal();
        sn += z;
        sn2 += z * z;
        se += r.exponential();
    }
    CHECK(std::abs(su / n - 0.5) < 0.005);
    CHECK(std::abs(su2 / n - 1.0 / 3) < 0.005);
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(std::abs(sn2 / n - 1.0) < 0.02);
    CHECK(std::abs(se / n - 1.0) < 0.01);
}

TEST_CASE("gauss rules integrate polynomials exactly") {
    const GaussRule& g = gauss_legendre(8);
    double s = gauss_apply(g, [](double x) { return x * x * x * x * x * x; }, -1, 1);
    CHECK(std::abs(s - 2.0 / 7) < 1e-14);
    QuadResult q = integrate([](double x) { return std::exp(-x * x); }, -8, 8);
    CHECK(std::abs(q.value - std::sqrt(M_PI)) < 1e-10);
}

TEST_CASE("chi2 and ks tails") {
    CHECK(chi2_sf(0.0, 5) == doctest::Approx(1.0));
    CHECK(chi2_sf(4.351, 4) == doctest::Approx(0.3606).epsilon(0.01));
    CHECK(ks_pvalue(0.002, 1e6) > 0.5);
}

TEST_CASE("aitken extrapolation of a geometric sequence") {
    std::vector<double> seq;
    for (int k = 0; k < 6; ++k) seq.push_back(3.0 + 0.7 * std::pow(0.5, k));
    Extrapolation ex = aitken_limit(seq);
    CHECK(ex.converged);
    CHECK(std::abs(ex.limit - 3.0) < 1e-12);
    CHECK(std::abs(estimate_rho(seq) - 0.5) < 1e-12);
}

TEST_CASE("column file round trip") {
    std::string path = (std::filesystem::temp_directory_path() / "fc_cols_test.bin").string();
    std::vector<std::pair<std::string, std::vector<double>>> cols = {
        {"a", {1.0, 2.5, -3.25}}, {"b", {}}, {"c", {0.125}}};
    write_columns(path, cols);
    auto back = read_columns(path);
    REQUIRE(back.size() == 3);
    CHECK(back[0].first == "a");
    CHECK(back[0].second == cols[0].second);
    CHECK(back[1].second.empty());
    CHECK(back[2].second[0] == 0.125);
    std::filesystem::remove(path);
}

TEST_CASE("csv is byte stable") {
    namespace fs = std::filesystem;
    auto path1 = fs::temp_directory_path() / "fc_csv1.csv";
    auto path2 = fs::temp_directory_path() / "fc_csv2.csv";
    for (const auto& p : {path1, path2}) {
        CsvWriter w(p.string(), {"x", "y"});
        w.row({1.0 / 3.0, 2e-17});
    }
    std::ifstream f1(path1), f2(path2);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
    CHECK(s1.find("0.33333333333333331") != std::string::npos);
    fs::remove(path1);
    fs::remove(path2);
}
