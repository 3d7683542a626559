#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mg1/errors.hpp"
#include "mg1/model.hpp"
#include "mg1/rational.hpp"
#include "mg1/spectral.hpp"
#include "support/helpers.hpp"

using namespace mg1;
using testsup::fixture;

namespace {

// Three-phase cyclic model: down-steps rotate phases one way, up-steps the
// other. Every closed phase walk has level displacement divisible by 3.
const char* kCirculant =
    "{\"M\":3,\"M0\":1,"
    "\"A\":[[[0,0,0.6],[0.6,0,0],[0,0.6,0]],"
    "[[0,0,0],[0,0,0],[0,0,0]],"
    "[[0,0.4,0],[0,0,0.4],[0.4,0,0]]],"
    "\"B0\":[[0.4]],"
    "\"B\":[[[0.2,0.2,0.2]]],"
    "\"C0\":[[0.6],[0.6],[0.6]],"
    "\"a_tail\":null,\"b_tail\":null}";

// Brute-force oracle: gcd of level displacements over all closed phase walks
// at phase 0, enumerated by breadth-first expansion.
long long closed_walk_gcd(const std::vector<SupportEdge>& support, int max_steps = 12) {
    std::set<std::pair<int, long long>> visited{{0, 0LL}};
    std::set<std::pair<int, long long>> frontier = visited;
    long long g = 0;
    for (int s = 0; s < max_steps; ++s) {
        std::set<std::pair<int, long long>> next;
        for (const auto& [node, d] : frontier) {
            for (const auto& e : support) {
                if (e.i != node) continue;
                const long long nd = d + e.displacement;
                if (std::llabs(nd) > 60) continue;
                if (e.j == 0) g = std::gcd(g, std::llabs(nd));
                if (visited.insert({e.j, nd}).second) next.insert({e.j, nd});
            }
        }
        frontier = std::move(next);
    }
    return g;
}

void check_offsets_consistent(const std::vector<SupportEdge>& support, const PeriodResult& p) {
    for (const auto& e : support) {
        const long long r =
            (p.offsets[static_cast<size_t>(e.i)] + e.displacement -
             p.offsets[static_cast<size_t>(e.j)]) %
            p.tau;
        CHECK(((r + p.tau) % p.tau) == 0);
    }
}

}  // namespace

TEST_CASE("eigenvalue curve spot values") {
    const MG1Model scalar = load_model(fixture("scalar.json"));
    CHECK(perron_curve(scalar, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(perron_curve(scalar, 1.5) == doctest::Approx(1.45).epsilon(1e-12));
    CHECK(perron_curve(scalar, 2.0) == doctest::Approx(2.0).epsilon(1e-12));

    const MG1Model two = load_model(fixture("two_phase.json"));
    CHECK(perron_curve(two, 4.0) == doctest::Approx(4.0).epsilon(1e-11));
}

TEST_CASE("decay parameter root") {
    const MG1Model scalar = load_model(fixture("scalar.json"));
    const auto t1 = find_theta(scalar);
    REQUIRE(t1.has_value());
    CHECK(*t1 == doctest::Approx(2.0).epsilon(1e-10));

    const MG1Model two = load_model(fixture("two_phase.json"));
    const auto t2 = find_theta(two);
    REQUIRE(t2.has_value());
    CHECK(*t2 == doctest::Approx(4.0).epsilon(1e-9));

    const MG1Model asym = load_model(fixture("asym_two_phase.json"));
    const auto t3 = find_theta(asym);
    REQUIRE(t3.has_value());
    CHECK(*t3 == doctest::Approx(std::sqrt(21.0)).epsilon(1e-9));

    const MG1Model circ = parse_model(kCirculant);
    const auto t4 = find_theta(circ);
    REQUIRE(t4.has_value());
    CHECK(*t4 == doctest::Approx(1.5).epsilon(1e-10));

    // subcritical polynomial-head model: the curve never meets the diagonal
    // inside its convergence disc
    const MG1Model poly = load_model(fixture("polyhead.json"));
    CHECK_FALSE(find_theta(poly).has_value());
    const MG1Model polyb = load_model(fixture("polyhead_btail.json"));
    CHECK_FALSE(find_theta(polyb).has_value());
}

TEST_CASE("eigendata and curve slope at the decay parameter") {
    const MG1Model scalar = load_model(fixture("scalar.json"));
    const EigenTriple e1 = eigen_at_theta(scalar, 2.0);
    CHECK(e1.delta_prime == doctest::Approx(1.2).epsilon(1e-10));
    CHECK(e1.mu(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e1.v(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    const MG1Model two = load_model(fixture("two_phase.json"));
    const EigenTriple e2 = eigen_at_theta(two, 4.0);
    CHECK(e2.delta_prime == doctest::Approx(1.6).epsilon(1e-9));

    const MG1Model asym = load_model(fixture("asym_two_phase.json"));
    const double th = std::sqrt(21.0);
    const EigenTriple e3 = eigen_at_theta(asym, th);
    CHECK(e3.delta_prime == doctest::Approx(1.6).epsilon(1e-9));
    // normalization: mu e = 1, mu v = 1
    CHECK(e3.mu(0, 0) + e3.mu(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e3.mu(0, 0) * e3.v(0, 0) + e3.mu(0, 1) * e3.v(1, 0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // right-vector component ratio for the 2x2 anti-diagonal kernel
    CHECK(e3.v(0, 0) / e3.v(1, 0) == doctest::Approx(std::sqrt(7.0 / 3.0)).epsilon(1e-9));
}

TEST_CASE("curve slope agrees with a finite difference") {
    for (const char* name : {"scalar.json", "two_phase.json", "asym_two_phase.json"}) {
        CAPTURE(name);
        const MG1Model m = load_model(fixture(name));
        const auto theta = find_theta(m);
        REQUIRE(theta.has_value());
        const EigenTriple e = eigen_at_theta(m, *theta);
        const double h = 1e-6 * *theta;
        const double fd = (perron_curve(m, *theta + h) - perron_curve(m, *theta - h)) / (2 * h);
        CHECK(e.delta_prime == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("graph period and phase offsets") {
    const MG1Model scalar = load_model(fixture("scalar.json"));
    const PeriodResult p1 = madp_period(gamma_A_support(scalar));
    CHECK(p1.tau == 1);
    CHECK(p1.offsets == std::vector<int>{0});

    const MG1Model two = load_model(fixture("two_phase.json"));
    const PeriodResult p2 = madp_period(gamma_A_support(two));
    CHECK(p2.tau == 2);
    REQUIRE(p2.offsets.size() == 2);
    CHECK(std::abs(p2.offsets[0] - p2.offsets[1]) == 1);

    const MG1Model circ = parse_model(kCirculant);
    const PeriodResult p3 = madp_period(gamma_A_support(circ));
    CHECK(p3.tau == 3);
    check_offsets_consistent(gamma_A_support(circ), p3);

    // all closed walks displacement-free: period is undefined
    CHECK_THROWS_AS(madp_period(std::vector<SupportEdge>{{0, 0, 0}}), PeriodUndefined);
}

TEST_CASE("graph period matches the closed-walk oracle") {
    for (const char* name :
         {"scalar.json", "two_phase.json", "asym_two_phase.json", "boundary_m0.json"}) {
        CAPTURE(name);
        const MG1Model m = load_model(fixture(name));
        const auto support = gamma_A_support(m);
        const PeriodResult p = madp_period(support);
        CHECK(p.tau == static_cast<int>(closed_walk_gcd(support)));
        check_offsets_consistent(support, p);
    }
    const MG1Model circ = parse_model(kCirculant);
    CHECK(closed_walk_gcd(gamma_A_support(circ)) == 3);
}

TEST_CASE("unit-circle determinant scan separates true and false periods") {
    const MG1Model two = load_model(fixture("two_phase.json"));
    const auto scan2 = period_spectral_check(two, 4.0, 2);
    REQUIRE(scan2.size() == 2);
    CHECK(scan2[0].first == 1);
    CHECK(scan2[0].second < 1e-10);  // n = 1: the decay parameter itself
    CHECK(scan2[1].second < 1e-10);  // n = 2 = period

    const MG1Model circ = parse_model(kCirculant);
    const auto scan3 = period_spectral_check(circ, 1.5, 3);
    REQUIRE(scan3.size() == 3);
    CHECK(scan3[0].second < 1e-10);
    CHECK(scan3[1].second == doctest::Approx(0.56).epsilon(1e-9));  // 2 is not a period
    CHECK(scan3[2].second < 1e-10);                                 // 3 is
}

TEST_CASE("diagonal twist matrices") {
    const std::vector<int> offsets{0, 1};
    const ComplexMatrix d_half = delta_M(offsets, Frac(1, 2));
    CHECK(std::abs(d_half(0, 0) - std::complex<double>(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(d_half(1, 1) - std::complex<double>(-1.0, 0.0)) < 1e-15);
    CHECK(std::abs(d_half(0, 1)) == 0.0);

    const std::vector<int> off3{0, 1, 2};
    const ComplexMatrix d = delta_M(off3, Frac(1, 3));
    const ComplexMatrix dinv = delta_M_inverse(off3, Frac(1, 3));
    const ComplexMatrix prod = d * dinv;
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(d(i, i)) == doctest::Approx(1.0).epsilon(1e-15));
        for (int j = 0; j < 3; ++j) {
            const std::complex<double> want = (i == j) ? 1.0 : 0.0;
            CHECK(std::abs(prod(i, j) - want) < 1e-15);
        }
    }

    // angle 0: identity regardless of offsets
    const ComplexMatrix id = delta_M(off3, Frac(0, 1));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(id(i, i) - 1.0) == 0.0);
}

TEST_CASE("combined spectral profile") {
    const MG1Model scalar = load_model(fixture("scalar.json"));
    const SpectralProfile s = analyze_spectral(scalar);
    REQUIRE(s.theta.has_value());
    CHECK(*s.theta == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(s.rho == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(s.delta_prime == doctest::Approx(1.2).epsilon(1e-10));
    CHECK(s.tau == 1);
    CHECK(std::isinf(s.r_A));
    CHECK(std::isinf(s.r_B));

    const MG1Model asym = load_model(fixture("asym_two_phase.json"));
    const SpectralProfile sa = analyze_spectral(asym);
    REQUIRE(sa.theta.has_value());
    CHECK(*sa.theta == doctest::Approx(std::sqrt(21.0)).epsilon(1e-9));
    CHECK(sa.tau == 2);

    const MG1Model poly = load_model(fixture("polyhead.json"));
    const SpectralProfile sp = analyze_spectral(poly);
    CHECK_FALSE(sp.theta.has_value());
    CHECK(sp.r_A == 1.5);  // the radius is read straight off the tail ratio
    CHECK(sp.rho == doctest::Approx(0.129001921879).epsilon(1e-9));
}
