#include <doctest.h>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "mg1/asymptotics.hpp"
#include "mg1/errors.hpp"
#include "mg1/fundamental.hpp"
#include "mg1/model.hpp"
#include "mg1/spectral.hpp"
#include "support/helpers.hpp"

using namespace mg1;
using testsup::fixture;

namespace {

struct Pipeline {
    MG1Model model;
    SpectralProfile spectral;
    FundamentalSet fund;
};

Pipeline pipeline(const char* name, int k_levels = 6) {
    Pipeline p{load_model(fixture(name)), {}, {}};
    p.spectral = analyze_spectral(p.model);
    p.fund = solve_fundamental(p.model, k_levels);
    return p;
}

void check_expansion_nonneg(const PoleExpansion& exp) {
    double scale = 0.0;
    for (const auto& w : exp.weights) scale += std::abs(w);
    double best = 0.0;
    for (long long k = 0; k < 64; ++k) {
        const double v = pole_expansion_eval(exp, k);
        CHECK(v >= -1e-10 * scale);
        best = std::max(best, v);
    }
    CHECK(best > 0.0);
}

}  // namespace

TEST_CASE("regime classification covers all five cases") {
    CHECK(classify_regime(pipeline("scalar.json").model, pipeline("scalar.json").spectral) ==
          Regime::BelowRB);
    {
        const Pipeline p = pipeline("two_phase.json");
        CHECK(classify_regime(p.model, p.spectral) == Regime::BelowRB);
    }
    {
        const Pipeline p = pipeline("above_rb.json");
        CHECK(classify_regime(p.model, p.spectral) == Regime::AboveRB);
    }
    {
        const Pipeline p = pipeline("at_rb.json");
        CHECK(classify_regime(p.model, p.spectral) == Regime::AtRB);
    }
    {
        const Pipeline p = pipeline("polyhead_btail.json");
        CHECK(classify_regime(p.model, p.spectral) == Regime::NoThetaAboveRB);
    }
    {
        const Pipeline p = pipeline("polyhead.json");
        CHECK(classify_regime(p.model, p.spectral) == Regime::Unsupported);
    }
    CHECK(std::string(regime_name(Regime::BelowRB)) == "BelowRB");
    CHECK(std::string(regime_name(Regime::NoThetaAboveRB)) == "NoThetaAboveRB");
}

TEST_CASE("rank-one resolvent residue") {
    const Pipeline p = pipeline("scalar.json");
    const ComplexMatrix r = residue_inverse_at(p.model, p.spectral, 0);
    CHECK(r(0, 0).real() == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(std::abs(r(0, 0).imag()) < 1e-12);
}

TEST_CASE("transform residue scalars") {
    const Pipeline p = pipeline("scalar.json");
    const std::complex<double> c0 = c_omega(p.model, p.spectral, p.fund, 0);
    CHECK(c0.real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(c0.imag()) < 1e-12);

    // sign-flipped stationary rows make the base residue negative
    Pipeline bad = pipeline("scalar.json");
    bad.fund.x0 = bad.fund.x0 * -1.0;
    for (auto& row : bad.fund.x) row = row * -1.0;
    CHECK_THROWS_AS(c_omega(bad.model, bad.spectral, bad.fund, 0), PositivityViolation);
}

TEST_CASE("periodic prefactors below the boundary radius") {
    const Pipeline scalar = pipeline("scalar.json");
    const BelowData b1 = prefactors_below(scalar.model, scalar.spectral, scalar.fund);
    CHECK(b1.tau_prime == 1);
    REQUIRE(b1.c_l.size() == 1);
    CHECK(b1.c_l[0](0, 0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(b1.H == std::vector<int>{0});
    CHECK(b1.warnings.empty());

    // symmetric two-phase model: the opposite-sign residue vanishes, so the
    // period refines from 2 to 1
    const Pipeline two = pipeline("two_phase.json");
    const BelowData b2 = prefactors_below(two.model, two.spectral, two.fund);
    CHECK(two.spectral.tau == 2);
    CHECK(b2.tau_prime == 1);
    CHECK(b2.H == std::vector<int>{0});
    REQUIRE(b2.c_l.size() == 1);
    CHECK(b2.c_l[0](0, 0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(b2.c_l[0](0, 1) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(std::abs(b2.c_values[1]) < 1e-12);

    // asymmetric two-phase model: both residues survive, full period 2
    const Pipeline asym = pipeline("asym_two_phase.json");
    const BelowData b3 = prefactors_below(asym.model, asym.spectral, asym.fund);
    CHECK(b3.tau_prime == 2);
    CHECK(b3.H == std::vector<int>{0, 1});
    REQUIRE(b3.c_l.size() == 2);
    CHECK(b3.c_l[0](0, 0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(b3.c_l[0](0, 1) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(b3.c_l[1](0, 0) == doctest::Approx(0.327326835354).epsilon(1e-8));
    CHECK(b3.c_l[1](0, 1) == doctest::Approx(0.763762615826).epsilon(1e-8));

    // a zero tolerance close to the small-residue ratio triggers the
    // sensitivity warning without changing the kept set
    const BelowData b4 = prefactors_below(asym.model, asym.spectral, asym.fund, 0.15);
    CHECK(b4.tau_prime == 2);
    REQUIRE(b4.warnings.size() == 1);
    CHECK(b4.warnings[0].find("sensitive") != std::string::npos);

    // boundary phases differ from interior phases
    const Pipeline bm = pipeline("boundary_m0.json");
    const BelowData b5 = prefactors_below(bm.model, bm.spectral, bm.fund);
    REQUIRE(b5.c_l.size() == 2);
    CHECK(b5.c_l[0](0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
    CHECK(b5.c_l[0](0, 1) == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("pole weights above the boundary radius") {
    const Pipeline p = pipeline("above_rb.json");
    const AboveData a = prefactors_above(p.model, p.spectral, p.fund);
    REQUIRE(a.angles.size() == 1);
    CHECK(a.angles[0] == Frac(0, 1));
    CHECK(a.weights[0](0, 0).real() == doctest::Approx(1.875).epsilon(1e-9));
    CHECK(std::abs(a.weights[0](0, 0).imag()) < 1e-12);

    const Pipeline pb = pipeline("polyhead_btail.json");
    const AboveData ab = prefactors_above(pb.model, pb.spectral, pb.fund);
    REQUIRE(ab.weights.size() == 1);
    CHECK(ab.weights[0](0, 0).real() == doctest::Approx(0.785597205198).epsilon(1e-8));
}

TEST_CASE("merged prefactors at the boundary radius") {
    const Pipeline p = pipeline("at_rb.json");
    const AtData a = prefactors_at(p.model, p.spectral, p.fund);
    CHECK(a.tau_hat == 1);
    REQUIRE(a.P.size() == 1);
    CHECK(a.P[0] == Frac(0, 1));
    REQUIRE(a.c_l.size() == 1);
    CHECK(a.c_l[0](0, 0) == doctest::Approx(5.0 / 12.0).epsilon(1e-8));
    REQUIRE(a.s_values.size() == 1);
    CHECK(a.s_values[0].real() > 0.0);

    // no declared pole at the real base point: the intersection dies
    MG1Model doctored = p.model;
    doctored.b_tail->poles[0].angle = Frac(1, 2);
    CHECK_THROWS_AS(prefactors_at(doctored, p.spectral, p.fund), EmptyIntersection);
}

TEST_CASE("full report and pointwise prediction") {
    const Pipeline scalar = pipeline("scalar.json");
    const AsymptoticReport r1 = analyze_asymptotics(scalar.model, scalar.spectral, scalar.fund);
    CHECK(r1.regime == Regime::BelowRB);
    CHECK(r1.theta_or_rb == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r1.period_used == 1);
    CHECK(r1.order == 1);
    CHECK(predict_tail(r1, 5)(0, 0) == doctest::Approx(0.03125).epsilon(1e-8));

    const Pipeline two = pipeline("two_phase.json");
    const AsymptoticReport r2 = analyze_asymptotics(two.model, two.spectral, two.fund);
    CHECK(r2.period_used == 1);
    const RealMatrix p6 = predict_tail(r2, 6);
    CHECK(p6(0, 0) == doctest::Approx(0.5 * std::pow(4.0, -6)).epsilon(1e-8));
    CHECK(p6(0, 1) == doctest::Approx(0.5 * std::pow(4.0, -6)).epsilon(1e-8));

    const Pipeline above = pipeline("above_rb.json");
    const AsymptoticReport r3 = analyze_asymptotics(above.model, above.spectral, above.fund);
    CHECK(r3.regime == Regime::AboveRB);
    CHECK(r3.theta_or_rb == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(r3.order == 1);
    CHECK(predict_tail(r3, 10)(0, 0) ==
          doctest::Approx(1.875 * std::pow(1.5, -10)).epsilon(1e-8));

    const Pipeline at = pipeline("at_rb.json");
    const AsymptoticReport r4 = analyze_asymptotics(at.model, at.spectral, at.fund);
    CHECK(r4.regime == Regime::AtRB);
    CHECK(r4.order == 2);
    CHECK(r4.period_used == 1);
    CHECK(predict_tail(r4, 10)(0, 0) ==
          doctest::Approx(10.0 * std::pow(2.0, -10) * (5.0 / 12.0)).epsilon(1e-8));

    const Pipeline pb = pipeline("polyhead_btail.json");
    const AsymptoticReport r5 = analyze_asymptotics(pb.model, pb.spectral, pb.fund);
    CHECK(r5.regime == Regime::NoThetaAboveRB);
    CHECK(r5.theta_or_rb == doctest::Approx(1.2).epsilon(1e-12));

    const Pipeline poly = pipeline("polyhead.json");
    const AsymptoticReport r6 = analyze_asymptotics(poly.model, poly.spectral, poly.fund);
    CHECK(r6.regime == Regime::Unsupported);
}

TEST_CASE("pole-sum sequences evaluate exactly") {
    PoleExpansion flat;
    flat.poles.push_back({std::complex<double>(1.5, 0.0), 1});
    flat.weights.push_back(std::complex<double>(0.7, 0.0));
    for (long long k : {0LL, 1LL, 7LL, 40LL})
        CHECK(pole_expansion_eval(flat, k) == doctest::Approx(0.7).epsilon(1e-14));

    PoleExpansion alt;
    alt.poles.push_back({std::complex<double>(1.5, 0.0), 1});
    alt.poles.push_back({std::complex<double>(-1.5, 0.0), 1});
    alt.weights.push_back(std::complex<double>(1.0, 0.0));
    alt.weights.push_back(std::complex<double>(0.5, 0.0));
    CHECK(pole_expansion_eval(alt, 0) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(pole_expansion_eval(alt, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(pole_expansion_eval(alt, 2) == doctest::Approx(1.5).epsilon(1e-14));

    // conjugate pair: real values, period 3
    const std::complex<double> w(0.5, 0.2);
    const std::complex<double> loc = 2.0 * std::polar(1.0, 2.0 * std::acos(-1.0) / 3.0);
    PoleExpansion conj3;
    conj3.poles.push_back({loc, 1});
    conj3.poles.push_back({std::conj(loc), 1});
    conj3.weights.push_back(w);
    conj3.weights.push_back(std::conj(w));
    CHECK(pole_expansion_eval(conj3, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pole_expansion_eval(conj3, 3) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(pole_expansion_eval(conj3, 1) ==
          doctest::Approx(pole_expansion_eval(conj3, 4)).epsilon(1e-10));
}

TEST_CASE("per-phase expansions are nonnegative with positive peaks") {
    for (const char* name : {"scalar.json", "two_phase.json", "asym_two_phase.json",
                             "boundary_m0.json", "above_rb.json", "at_rb.json",
                             "polyhead_btail.json"}) {
        CAPTURE(name);
        const Pipeline p = pipeline(name);
        const AsymptoticReport r = analyze_asymptotics(p.model, p.spectral, p.fund);
        REQUIRE(r.residue_rows.size() == static_cast<size_t>(p.model.M));
        for (const PoleExpansion& exp : r.residue_rows) check_expansion_nonneg(exp);
    }
}
