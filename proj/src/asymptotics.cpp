#include "mg1/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mg1 {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// mu(theta) * Delta_M(omega)^{-1} as a complex row.
ComplexMatrix twisted_mu(const SpectralProfile& spectral, const Frac& angle) {
    return to_complex(spectral.mu) * delta_M_inverse(spectral.offsets, angle);
}

/// Delta_M(omega) * v(theta) as a complex column.
ComplexMatrix twisted_v(const SpectralProfile& spectral, const Frac& angle) {
    return delta_M(spectral.offsets, angle) * to_complex(spectral.v);
}

/// Converts a residue-class sum of complex rows into a real positive row;
/// throws PositivityViolation if the imaginary part or sign is off.
RealMatrix realize_positive_row(const ComplexMatrix& row, double scale, const char* what) {
    if (imag_part(row).max_abs() > 1e-10 * std::max(1.0, scale))
        throw PositivityViolation(std::string(what) + " has a non-real entry");
    RealMatrix out = real_part(row);
    for (int j = 0; j < out.cols(); ++j)
        if (out(0, j) <= 0.0)
            throw PositivityViolation(std::string(what) + " has a non-positive entry");
    return out;
}

/// Surviving exponents and refined period for a family of residue scalars:
/// keeps nu = 0 unconditionally plus every nu with |value| above the cutoff.
std::vector<int> surviving_set(const std::vector<std::complex<double>>& values, double cutoff) {
    std::vector<int> kept{0};
    for (int nu = 1; nu < static_cast<int>(values.size()); ++nu)
        if (std::abs(values[nu]) > cutoff) kept.push_back(nu);
    return kept;
}

int refine_period(const std::vector<int>& kept, int tau) {
    long long g = tau;
    for (int nu : kept)
        if (nu != 0) g = std::gcd(g, static_cast<long long>(nu));
    return static_cast<int>(tau / g);
}

} // namespace

const char* regime_name(Regime regime) {
    switch (regime) {
        case Regime::BelowRB: return "BelowRB";
        case Regime::AboveRB: return "AboveRB";
        case Regime::AtRB: return "AtRB";
        case Regime::NoThetaAboveRB: return "NoThetaAboveRB";
        case Regime::Unsupported: return "Unsupported";
    }
    return "Unsupported";
}

double pole_expansion_eval(const PoleExpansion& expansion, long long k) {
    if (expansion.poles.empty()) return 0.0;
    const double sigma = std::abs(expansion.poles.front().location);
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < expansion.poles.size(); ++j) {
        const std::complex<double> ratio = sigma / expansion.poles[j].location;
        acc += std::pow(ratio, static_cast<double>(k)) * expansion.weights[j];
    }
    return acc.real();
}

Regime classify_regime(const MG1Model& model, const SpectralProfile& spectral, double atrb_tol) {
    const bool has_b_tail = model.b_tail.has_value();
    if (spectral.theta) {
        const double theta = *spectral.theta;
        if (has_b_tail && std::abs(theta - spectral.r_B) <= atrb_tol * theta) return Regime::AtRB;
        if (theta < spectral.r_B) return Regime::BelowRB;
        if (has_b_tail) return Regime::AboveRB;
        return Regime::Unsupported;
    }
    if (has_b_tail && spectral.r_A > spectral.r_B) return Regime::NoThetaAboveRB;
    return Regime::Unsupported;
}

ComplexMatrix residue_inverse_at(const MG1Model& model, const SpectralProfile& spectral, int nu) {
    (void)model;
    if (!spectral.theta) throw std::invalid_argument("residue_inverse_at: no decay parameter");
    const Frac angle(nu, spectral.tau);
    const ComplexMatrix outer = twisted_v(spectral, angle) * twisted_mu(spectral, angle);
    return outer * std::complex<double>(1.0 / (spectral.delta_prime - 1.0));
}

std::complex<double> c_omega(const MG1Model& model, const SpectralProfile& spectral,
                             const FundamentalSet& fund, int nu) {
    if (!spectral.theta) throw std::invalid_argument("c_omega: no decay parameter");
    const double theta = *spectral.theta;
    const Frac angle(nu, spectral.tau);
    const std::complex<double> omega = unit_root(angle);
    const std::complex<double> z = theta * omega;
    const ComplexMatrix numerator_row =
        to_complex(fund.x0) * eval_B_star(model, z) - to_complex(fund.x[1] * model.A[0]);
    const std::complex<double> numerator = (numerator_row * twisted_v(spectral, angle))(0, 0);
    const std::complex<double> value =
        numerator / ((z - 1.0) * (spectral.delta_prime - 1.0));
    if (nu == 0 && value.real() <= 0.0)
        throw PositivityViolation("residue at the decay parameter is not positive");
    return value;
}

BelowData prefactors_below(const MG1Model& model, const SpectralProfile& spectral,
                           const FundamentalSet& fund, double zero_tol) {
    BelowData out;
    const int tau = spectral.tau;
    for (int nu = 0; nu < tau; ++nu) out.c_values.push_back(c_omega(model, spectral, fund, nu));

    const double cutoff = zero_tol * std::abs(out.c_values[0]);
    out.H = surviving_set(out.c_values, cutoff);
    out.tau_prime = refine_period(out.H, tau);
    // Sensitivity check: a 10x looser cutoff should not change the refinement.
    const int tau_prime_loose =
        refine_period(surviving_set(out.c_values, 10.0 * cutoff), tau);
    if (tau_prime_loose != out.tau_prime)
        out.warnings.push_back("period refinement is sensitive to the zero tolerance");

    const double scale = std::abs(out.c_values[0]);
    for (int l = 0; l < out.tau_prime; ++l) {
        ComplexMatrix row(1, model.M);
        for (int nu : out.H) {
            const Frac angle(nu, tau);
            const std::complex<double> phase = unit_root(angle.times(-l));
            row += (twisted_mu(spectral, angle) * (phase * out.c_values[nu]));
        }
        out.c_l.push_back(realize_positive_row(row, scale, "periodic prefactor"));
    }
    return out;
}

AboveData prefactors_above(const MG1Model& model, const SpectralProfile& spectral,
                           const FundamentalSet& fund) {
    (void)spectral;
    if (!model.b_tail) throw std::invalid_argument("prefactors_above: no boundary pole data");
    const BTailSpec& spec = *model.b_tail;
    AboveData out;
    const ComplexMatrix eye = ComplexMatrix::identity(model.M);
    for (const BTailPole& pole : spec.poles) {
        const std::complex<double> z = spec.radius * unit_root(pole.angle);
        const ComplexMatrix inv = solve_complex(eye - eval_Gamma_A_star(model, z), eye);
        const ComplexMatrix weight =
            (to_complex(fund.x0) * pole.weight) * (std::complex<double>(1.0) / (z - 1.0)) * inv;
        out.angles.push_back(pole.angle);
        out.weights.push_back(weight);
    }
    return out;
}

AtData prefactors_at(const MG1Model& model, const SpectralProfile& spectral,
                     const FundamentalSet& fund, double zero_tol) {
    if (!spectral.theta) throw std::invalid_argument("prefactors_at: no decay parameter");
    if (!model.b_tail) throw std::invalid_argument("prefactors_at: no boundary pole data");
    const double theta = *spectral.theta;
    const int tau = spectral.tau;
    const BTailSpec& spec = *model.b_tail;

    // Exact intersection of the two dominant pole sets: angles nu/tau that
    // are also declared boundary-pole angles carry the maximal order m_B + 1.
    std::vector<Frac> candidates;
    std::vector<const BTailPole*> matched;
    for (int nu = 0; nu < tau; ++nu) {
        const Frac angle(nu, tau);
        for (const BTailPole& pole : spec.poles)
            if (pole.angle == angle) {
                candidates.push_back(angle);
                matched.push_back(&pole);
            }
    }
    if (candidates.empty() || !(candidates.front() == Frac(0, 1)))
        throw EmptyIntersection("dominant pole intersection lost its real base point");

    // Residue scalars s_m = x(0) W_m Delta_M(omega) v(theta) / ((theta omega - 1)(delta' - 1)).
    std::vector<std::complex<double>> s_all;
    for (std::size_t m = 0; m < candidates.size(); ++m) {
        const Frac& angle = candidates[m];
        const std::complex<double> z = theta * unit_root(angle);
        const std::complex<double> numer =
            ((to_complex(fund.x0) * matched[m]->weight) * twisted_v(spectral, angle))(0, 0);
        s_all.push_back(numer / ((z - 1.0) * (spectral.delta_prime - 1.0)));
    }
    if (s_all[0].real() <= 0.0)
        throw PositivityViolation("residue at the decay parameter is not positive");

    AtData out;
    const double cutoff = zero_tol * std::abs(s_all[0]);
    for (std::size_t m = 0; m < candidates.size(); ++m) {
        if (m == 0 || std::abs(s_all[m]) > cutoff) {
            out.P.push_back(candidates[m]);
            out.s_values.push_back(s_all[m]);
        }
    }

    // Period: least common multiple of the reduced angle denominators.
    long long lcm = 1;
    for (const Frac& angle : out.P) lcm = std::lcm(lcm, angle.den);
    out.tau_hat = static_cast<int>(lcm);

    const double scale = std::abs(out.s_values[0]);
    for (int l = 0; l < out.tau_hat; ++l) {
        ComplexMatrix row(1, model.M);
        for (std::size_t m = 0; m < out.P.size(); ++m) {
            const Frac& angle = out.P[m];
            const std::complex<double> phase = unit_root(angle.times(-l));
            row += twisted_mu(spectral, angle) * (phase * out.s_values[m]);
        }
        out.c_l.push_back(realize_positive_row(row, scale, "boundary-circle prefactor"));
    }
    return out;
}

AsymptoticReport analyze_asymptotics(const MG1Model& model, const SpectralProfile& spectral,
                                     const FundamentalSet& fund, double zero_tol,
                                     double atrb_tol) {
    AsymptoticReport report;
    report.regime = classify_regime(model, spectral, atrb_tol);

    auto expansion_rows = [&](const std::vector<Frac>& angles,
                              const std::vector<ComplexMatrix>& rows, double base, int order) {
        // Per-phase dominant-circle expansions: pole locations base*omega with
        // the phase's component of each residue row as weight.
        report.residue_rows.assign(model.M, PoleExpansion{});
        for (int j = 0; j < model.M; ++j) {
            for (std::size_t m = 0; m < angles.size(); ++m) {
                report.residue_rows[j].poles.push_back({base * unit_root(angles[m]), order});
                report.residue_rows[j].weights.push_back(rows[m](0, j));
            }
        }
    };

    switch (report.regime) {
        case Regime::BelowRB: {
            BelowData below = prefactors_below(model, spectral, fund, zero_tol);
            report.theta_or_rb = *spectral.theta;
            report.period_used = below.tau_prime;
            report.order = 1;
            report.prefactors = below.c_l;
            report.c_values = below.c_values;
            report.H = below.H;
            report.warnings = below.warnings;
            std::vector<Frac> angles;
            std::vector<ComplexMatrix> rows;
            for (int nu : below.H) {
                const Frac angle(nu, spectral.tau);
                angles.push_back(angle);
                rows.push_back(twisted_mu(spectral, angle) * below.c_values[nu]);
            }
            expansion_rows(angles, rows, report.theta_or_rb, 1);
            break;
        }
        case Regime::AboveRB:
        case Regime::NoThetaAboveRB: {
            AboveData above = prefactors_above(model, spectral, fund);
            report.theta_or_rb = model.b_tail->radius;
            report.order = model.b_tail->order;
            long long lcm = 1;
            for (const Frac& angle : above.angles) lcm = std::lcm(lcm, angle.den);
            report.period_used = static_cast<int>(lcm);
            report.pole_angles = above.angles;
            report.pole_weights = above.weights;
            expansion_rows(above.angles, above.weights, report.theta_or_rb, report.order);
            break;
        }
        case Regime::AtRB: {
            AtData at = prefactors_at(model, spectral, fund, zero_tol);
            report.theta_or_rb = *spectral.theta;
            report.period_used = at.tau_hat;
            report.order = model.b_tail->order + 1;
            report.prefactors = at.c_l;
            report.c_values = at.s_values;
            report.P = at.P;
            report.warnings = at.warnings;
            std::vector<ComplexMatrix> rows;
            for (std::size_t m = 0; m < at.P.size(); ++m)
                rows.push_back(twisted_mu(spectral, at.P[m]) * at.s_values[m]);
            expansion_rows(at.P, rows, report.theta_or_rb, report.order);
            break;
        }
        case Regime::Unsupported:
            break;
    }
    return report;
}

RealMatrix predict_tail(const AsymptoticReport& report, long long k) {
    if (report.regime == Regime::Unsupported)
        throw std::invalid_argument("predict_tail: unsupported regime");
    const double power_factor =
        std::pow(static_cast<double>(k), report.order - 1) / factorial(report.order - 1);
    const double geo = std::pow(report.theta_or_rb, -static_cast<double>(k));

    if (report.regime == Regime::BelowRB || report.regime == Regime::AtRB) {
        const RealMatrix& pref = report.prefactors[static_cast<int>(k % report.period_used)];
        return pref * (power_factor * geo);
    }
    // Pole regimes: xi(k) = Sum_n zeta_n^{-k} weight_n.
    const int M = report.pole_weights.front().cols();
    ComplexMatrix xi(1, M);
    for (std::size_t n = 0; n < report.pole_angles.size(); ++n) {
        const std::complex<double> phase = unit_root(report.pole_angles[n].times(-k));
        xi += report.pole_weights[n] * phase;
    }
    return real_part(xi) * (power_factor * geo);
}

} // namespace mg1
