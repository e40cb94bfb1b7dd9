#include <catch2/catch_amalgamated.hpp>

#include "gradcert/homology.hpp"
#include "mesh_checks.hpp"

#include <random>

using namespace gradcert;

namespace {
const std::vector<std::string> XY{"x", "y"};
const std::vector<std::string> XYZ{"x", "y", "z"};

HomologySummary summary_at_depth(const std::string& poly, const std::vector<std::string>& vars,
                                 double radius, int depth) {
    SignRegion region = make_sign_region(build_complex(static_cast<int>(vars.size()), radius),
                                         parse_polynomial(poly, vars));
    region = refine(std::move(region), depth);
    return homology_summary(region);
}

} // namespace

TEST_CASE("omega region of -y^2 on the circle: two arcs") {
    auto s = summary_at_depth("-y^2", XY, 1.0, 6);
    REQUIRE(s.betti == std::vector<long long>{2, 0});
    REQUIRE(s.euler == 2);
    REQUIRE_FALSE(s.empty);
}

TEST_CASE("omega region of xyz on the 2-sphere: four discs") {
    auto s = summary_at_depth("x*y*z", XYZ, 1.0, 6);
    REQUIRE(s.betti == std::vector<long long>{4, 0, 0});
    REQUIRE(s.euler == 4);
}

TEST_CASE("omega region of z(x^2+y^2): an annulus") {
    auto s = summary_at_depth("z*x^2 + z*y^2", XYZ, 1.0, 6);
    REQUIRE(s.betti == std::vector<long long>{1, 1, 0});
    REQUIRE(s.euler == 0);
}

TEST_CASE("full negative sphere has the homology of S^{n-1}") {
    auto s2 = summary_at_depth("-1", XY, 1.0, 3);
    REQUIRE(s2.betti == std::vector<long long>{1, 1});
    REQUIRE(s2.euler == 0);

    auto s3 = summary_at_depth("-x^2 - y^2 - z^2", XYZ, 1.0, 3);
    REQUIRE(s3.betti == std::vector<long long>{1, 0, 1});
    REQUIRE(s3.euler == 2);
}

TEST_CASE("empty region is flagged") {
    auto s = summary_at_depth("x^2 + y^2", XY, 1.0, 4);
    REQUIRE(s.empty);
    REQUIRE(s.betti == std::vector<long long>{0, 0});
    REQUIRE(s.euler == 0);
}

TEST_CASE("union-find rank of d1 agrees with Z/2 elimination") {
    SignRegion region = make_sign_region(build_complex(3, 1.0), parse_polynomial("x*y*z", XYZ));
    region = refine(std::move(region), 4);
    auto sub = detail::build_neg_subcomplex(region);

    // rank of d1 by explicit elimination
    std::vector<std::vector<std::int32_t>> cols;
    for (const auto& e : sub.simplices[1]) {
        std::array<std::int32_t, 4> f0{e[0], -1, -1, -1};
        std::array<std::int32_t, 4> f1{e[1], -1, -1, -1};
        std::vector<std::int32_t> col{sub.index[0].at(f0), sub.index[0].at(f1)};
        std::sort(col.begin(), col.end());
        cols.push_back(col);
    }
    const long long by_elimination = detail::z2_rank(cols);

    auto s = homology_summary(region);
    const long long V = static_cast<long long>(sub.simplices[0].size());
    REQUIRE(by_elimination == V - s.betti[0]);
}

TEST_CASE("stabilization protocol on the worked germs") {
    auto s83 = stabilized_invariants(parse_polynomial("x^3 - y^2", XY), 2,
                                     {0.125, 0.0625, 0.03125}, 9);
    REQUIRE(s83.stabilized);
    REQUIRE(s83.betti[0] == 1);

    auto s84 = stabilized_invariants(parse_polynomial("x*y*z - z^4", XYZ), 3,
                                     {0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625}, 9);
    REQUIRE(s84.stabilized);
    REQUIRE(s84.betti[0] == 2);
    REQUIRE(s84.betti[1] == 0);

    auto pos = stabilized_invariants(parse_polynomial("x^2 + y^2", XY), 2,
                                     {0.125, 0.0625, 0.03125}, 9);
    REQUIRE(pos.stabilized);
    REQUIRE(pos.empty);
}

TEST_CASE("circle mesh agrees with exact arc analysis for products of linear forms") {
    std::mt19937 rng(5150);
    std::uniform_real_distribution<double> angle(0.0, M_PI);
    std::uniform_int_distribution<int> kdist(1, 5);
    for (int trial = 0; trial < 10; ++trial) {
        const int k = kdist(rng);
        std::vector<std::array<double, 2>> forms;
        std::vector<double> dirs;
        while (static_cast<int>(forms.size()) < k) {
            const double t = angle(rng);
            bool close = false;
            for (double d : dirs)
                close = close || std::abs(std::sin(t - d)) < 0.05;
            if (close) continue;
            dirs.push_back(t);
            forms.push_back({std::cos(t), std::sin(t)});
        }
        // snap coefficients to an exact rational grid shared with the oracle
        std::vector<std::array<double, 2>> used;
        Polynomial p(2);
        p.add_term({0, 0}, 1);
        for (const auto& [a, b] : forms) {
            const long long qa = std::llround(a * 1e6);
            const long long qb = std::llround(b * 1e6);
            Polynomial form(2);
            form.add_term({1, 0}, Rational(qa, 1000000));
            form.add_term({0, 1}, Rational(qb, 1000000));
            p = p * form;
            used.push_back({static_cast<double>(qa) / 1e6, static_cast<double>(qb) / 1e6});
        }
        const int expected = testutil::negative_arc_count(used);
        auto s = stabilized_invariants(p, 2, {1.0}, 12);
        REQUIRE(s.stabilized);
        REQUIRE(s.betti[0] == expected);
    }
}
