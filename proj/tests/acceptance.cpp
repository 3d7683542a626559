// Acceptance gate: end-to-end checks of the solver and the tail predictor.
// Each criterion prints exactly one PASS/FAIL line; the exit status is the
// number of failed criteria.

#include <cmath>
#include <complex>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "mg1/asymptotics.hpp"
#include "mg1/errors.hpp"
#include "mg1/fundamental.hpp"
#include "mg1/linalg.hpp"
#include "mg1/model.hpp"
#include "mg1/oracle.hpp"
#include "mg1/rational.hpp"
#include "mg1/spectral.hpp"
#include "support/helpers.hpp"
#include "support/random_models.hpp"

using namespace mg1;
using testsup::fixture;

namespace {

int g_failures = 0;

const char* kAllFixtures[] = {"scalar.json",   "two_phase.json", "asym_two_phase.json",
                              "boundary_m0.json", "above_rb.json",  "at_rb.json",
                              "polyhead.json", "polyhead_btail.json"};

// Runs one criterion; the body returns an empty string on success or a
// short failure detail.
void criterion(int n, const std::string& what, const std::function<std::string()>& body) {
    std::string detail;
    try {
        detail = body();
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
        std::cout << "PASS: criterion " << n << " - " << what << "\n";
    } else {
        std::cout << "FAIL: criterion " << n << " - " << what << " (" << detail << ")\n";
        ++g_failures;
    }
}

double g_residual(const MG1Model& m, const RealMatrix& G) {
    RealMatrix acc = m.A.back();
    for (int k = static_cast<int>(m.A.size()) - 2; k >= 0; --k) acc = m.A[k] + acc * G;
    if (m.a_tail) {
        const RealMatrix rG = G * m.a_tail->ratio;
        RealMatrix power = RealMatrix::identity(m.M);
        for (int k = 0; k <= m.a_tail->start_index; ++k) power = power * rG;
        acc += m.a_tail->coeff *
               (power * solve_real(RealMatrix::identity(m.M) - rG, RealMatrix::identity(m.M)));
    }
    return testsup::max_abs_diff(acc, G);
}

std::string check1() {
    const MG1Model m = load_model(fixture("scalar.json"));
    const auto theta = find_theta(m);
    if (!theta || std::abs(*theta - 2.0) > 1e-10) return "decay parameter off";
    const SolvedChain chain = solve_chain(m, 40);
    if (std::abs(chain.fund.x0(0, 0) - 0.2) > 1e-10) return "boundary mass off";
    const SpectralProfile s = analyze_spectral(m);
    if (s.tau != 1) return "period off";
    const AsymptoticReport r = analyze_asymptotics(m, s, chain.fund);
    if (r.period_used != 1) return "refined period off";
    if (std::abs(r.prefactors[0](0, 0) - 1.0) > 1e-8) return "prefactor off";
    for (int k = 1; k <= 40; ++k) {
        const double want = std::pow(0.5, k);
        const double got = chain.tails[static_cast<size_t>(k)](0, 0);
        if (std::abs(got - want) > 1e-12 * want)
            return "tail at level " + std::to_string(k) + " off";
    }
    return "";
}

std::string check2() {
    const MG1Model m = load_model(fixture("two_phase.json"));
    const SpectralProfile s = analyze_spectral(m);
    if (s.tau != 2) return "graph period off";
    if (!s.theta || std::abs(*s.theta - 4.0) > 1e-9) return "decay parameter off";
    const auto scan = period_spectral_check(m, *s.theta, s.tau);
    if (scan.size() < 2 || scan[1].second >= 1e-10) return "second-root determinant not zero";
    const SolvedChain chain = solve_chain(m, 30);
    const AsymptoticReport r = analyze_asymptotics(m, s, chain.fund);
    const ComparisonTable table = compare(m, chain.fund, r, 30);
    if (table.summary.terminal_rel_err >= 1e-4)
        return "terminal error " + std::to_string(table.summary.terminal_rel_err);
    return "";
}

std::string check3() {
    for (const char* name : kAllFixtures) {
        const MG1Model m = load_model(fixture(name));
        const FundamentalSet fund = solve_fundamental(m, 25);
        const double r_cap = std::min(radius_A(m), 3.0);
        for (int i = 1; i <= 16; ++i) {
            const double z = 1.0 + i * (r_cap - 1.0) / 17.0;
            const double res = rg_factorization_residual(m, fund, z);
            if (!(res < 1e-9))
                return std::string(name) + ": factorization residual " + std::to_string(res) +
                       " at z = " + std::to_string(z);
        }
        const double bal = testsup::balance_residual(m, fund);
        if (!(bal < 1e-10)) return std::string(name) + ": balance residual " + std::to_string(bal);
    }
    return "";
}

std::string check4() {
    for (const char* name : {"scalar.json", "two_phase.json", "asym_two_phase.json",
                             "boundary_m0.json", "above_rb.json", "at_rb.json"}) {
        const MG1Model m = load_model(fixture(name));
        const SpectralProfile s = analyze_spectral(m);
        if (!s.theta) return std::string(name) + ": expected a decay parameter";
        const ComplexMatrix v = to_complex(s.v);
        const ComplexMatrix mu = to_complex(s.mu);
        for (int nu = 0; nu < s.tau; ++nu) {
            const Frac angle(nu, s.tau);
            const std::complex<double> z = *s.theta * unit_root(angle);
            const ComplexMatrix mat = ComplexMatrix::identity(m.M) - eval_Gamma_A_star(m, z);
            const ComplexMatrix adj = adjugate(mat);
            const ComplexMatrix outer =
                (delta_M(s.offsets, angle) * v) * (mu * delta_M_inverse(s.offsets, angle));
            // least-squares scalar aligning the rank-one pattern with the adjugate
            std::complex<double> num = 0.0;
            double den = 0.0;
            for (int i = 0; i < m.M; ++i)
                for (int j = 0; j < m.M; ++j) {
                    num += adj(i, j) * std::conj(outer(i, j));
                    den += std::norm(outer(i, j));
                }
            if (den == 0.0) return std::string(name) + ": degenerate eigenvector pattern";
            const std::complex<double> scale = num / den;
            double err = 0.0, ref = 0.0;
            for (int i = 0; i < m.M; ++i)
                for (int j = 0; j < m.M; ++j) {
                    err = std::max(err, std::abs(adj(i, j) - scale * outer(i, j)));
                    ref = std::max(ref, std::abs(adj(i, j)));
                }
            if (!(err <= 1e-8 * ref))
                return std::string(name) + ": adjugate mismatch at root " + std::to_string(nu);
        }
    }
    return "";
}

std::string check5() {
    const MG1Model m = load_model(fixture("above_rb.json"));
    const SolvedChain chain = solve_chain(m, 80);
    const SpectralProfile s = analyze_spectral(m);
    const AsymptoticReport r = analyze_asymptotics(m, s, chain.fund);
    if (r.regime != Regime::AboveRB) return "regime off";
    const ComparisonTable table = compare(m, chain.fund, r, 80);
    // the measured decay must sit at the boundary radius 1.5, not at the
    // interior decay parameter (which is 2 for this model)
    if (std::abs(table.summary.empirical_base - 1.5) > 1e-3)
        return "empirical base " + std::to_string(table.summary.empirical_base);
    if (s.theta && std::abs(table.summary.empirical_base - *s.theta) < 0.3)
        return "measured decay tracks the interior parameter";
    if (table.summary.terminal_rel_err > 2e-2)
        return "terminal error " + std::to_string(table.summary.terminal_rel_err);
    return "";
}

std::string check6() {
    const MG1Model m = load_model(fixture("at_rb.json"));
    const SolvedChain chain = solve_chain(m, 60);
    const SpectralProfile s = analyze_spectral(m);
    const AsymptoticReport r = analyze_asymptotics(m, s, chain.fund);
    if (r.regime != Regime::AtRB) return "regime off";
    if (r.order != 2) return "order " + std::to_string(r.order);
    // terminal check of x-bar(k) * base^k / k against the limiting prefactor
    const ComparisonTable table = compare(m, chain.fund, r, 60);
    if (table.summary.terminal_rel_err > 5e-2)
        return "terminal error " + std::to_string(table.summary.terminal_rel_err);
    return "";
}

std::string check7() {
    const testsup::CliResult r = testsup::run_cli("analyze " + fixture("polyhead.json"));
    if (r.status != 0) return "exit status " + std::to_string(r.status);
    if (r.output.find("theta = none (Assumption 3 fails)") == std::string::npos)
        return "missing explicit report line";
    return "";
}

std::string check8() {
    std::mt19937 rng(testsup::kModelSeed);
    for (int i = 0; i < 100; ++i) {
        const std::string tag = "model " + std::to_string(i) + ": ";
        const MG1Model m = testsup::random_model(rng, i);
        // transform row mass at the unit point
        const double d1 = perron_pair(eval_A_star_real(m, 1.0)).value;
        if (std::abs(d1 - 1.0) > 1e-10) return tag + "unit-point eigenvalue off";
        // first-passage matrix: fixed point and stochastic rows (all models
        // here are stable by construction)
        const RealMatrix G = compute_G(m);
        if (!(g_residual(m, G) < 1e-10)) return tag + "first-passage residual";
        for (int row = 0; row < m.M; ++row)
            if (std::abs(testsup::row_sum(G, row) - 1.0) > 1e-10)
                return tag + "first-passage rows not stochastic";
        const SpectralProfile s = analyze_spectral(m);
        if (!s.theta) return tag + "no decay parameter";
        const FundamentalSet fund = solve_fundamental(m, 4);
        // expected-visit transform reaches spectral radius one exactly at theta
        const double sp =
            spectral_radius(R_star_real(m, fund, *s.theta) + RealMatrix::identity(m.M)) - 1.0;
        if (std::abs(sp - 1.0) > 1e-7) return tag + "visit transform radius " + std::to_string(sp);
        const AsymptoticReport r = analyze_asymptotics(m, s, fund);
        if (!(r.c_values[0].real() > 0.0)) return tag + "base residue not positive";
        for (const RealMatrix& row : r.prefactors)
            for (int j = 0; j < row.cols(); ++j)
                if (!(row(0, j) > 0.0)) return tag + "prefactor not positive";
        // graph period against the determinant scan
        int spectral_period = 0;
        for (const auto& [n, val] : period_spectral_check(m, *s.theta, s.tau))
            if (val < 1e-8) spectral_period = std::max(spectral_period, n);
        if (spectral_period != s.tau)
            return tag + "graph period " + std::to_string(s.tau) + " vs spectral " +
                   std::to_string(spectral_period);
        // log-convexity of the eigenvalue curve in log coordinates
        const int steps = 12;
        std::vector<double> f(steps + 1);
        for (int t = 0; t <= steps; ++t) {
            const double y = std::exp(t * std::log(*s.theta) / steps);
            f[static_cast<size_t>(t)] = std::log(perron_curve(m, y));
        }
        for (int t = 1; t < steps; ++t) {
            const double second = f[static_cast<size_t>(t) + 1] + f[static_cast<size_t>(t) - 1] -
                                  2.0 * f[static_cast<size_t>(t)];
            if (second < -1e-8) return tag + "eigenvalue curve not log-convex";
        }
    }
    return "";
}

std::string check9() {
    int seen = 0;
    for (const char* name : kAllFixtures) {
        const MG1Model m = load_model(fixture(name));
        const SpectralProfile s = analyze_spectral(m);
        const FundamentalSet fund = solve_fundamental(m, 6);
        const AsymptoticReport r = analyze_asymptotics(m, s, fund);
        for (const PoleExpansion& exp : r.residue_rows) {
            ++seen;
            double scale = 0.0;
            for (const auto& w : exp.weights) scale += std::abs(w);
            double best = 0.0;
            for (long long k = 0; k < 64; ++k) {
                const double v = pole_expansion_eval(exp, k);
                if (v < -1e-10 * scale)
                    return std::string(name) + ": negative value " + std::to_string(v) +
                           " at k = " + std::to_string(k);
                best = std::max(best, v);
            }
            if (!(best > 0.0)) return std::string(name) + ": expansion has no positive peak";
        }
    }
    if (seen == 0) return "no expansions were emitted";
    return "";
}

}  // namespace

int main() {
    criterion(1, "closed-form model solved and predicted exactly", check1);
    criterion(2, "periodic model: period detection and prediction accuracy", check2);
    criterion(3, "factorization and stationarity residuals on every fixture", check3);
    criterion(4, "rank-one adjugate structure at every dominant root", check4);
    criterion(5, "boundary-dominated decay measured at the boundary radius", check5);
    criterion(6, "merged-pole regime: linear-in-level growth and prefactor", check6);
    criterion(7, "missing decay parameter reported without failure", check7);
    criterion(8, "invariants hold on one hundred random models", check8);
    criterion(9, "emitted pole expansions stay nonnegative with positive peaks", check9);
    if (g_failures == 0) {
        std::cout << "all acceptance criteria passed\n";
    } else {
        std::cout << g_failures << " acceptance criteria failed\n";
    }
    return g_failures;
}
