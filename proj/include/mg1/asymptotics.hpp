#pragma once

#include <complex>
#include <string>
#include <vector>

#include "mg1/fundamental.hpp"
#include "mg1/spectral.hpp"

namespace mg1 {

/// Position of the decay parameter relative to the boundary-kernel radius.
enum class Regime { BelowRB, AboveRB, AtRB, NoThetaAboveRB, Unsupported };

const char* regime_name(Regime regime);

/// Dominant-circle pole data of a scalar sequence transform:
/// xi_k = Sum_j (sigma/sigma_j)^k * weight_j with sigma the common modulus.
struct PolePoint {
    std::complex<double> location;
    int order = 1;
};
struct PoleExpansion {
    std::vector<PolePoint> poles;
    std::vector<std::complex<double>> weights;
};

double pole_expansion_eval(const PoleExpansion& expansion, long long k);

/// Everything needed to predict x-bar(k) for large k:
///   prediction(k) = k^{order-1}/(order-1)! * base^{-k} * prefactor(k),
/// where prefactor(k) is prefactors[k mod period_used] in the periodic
/// regimes, or the angle-weighted pole sum in the pole regimes.
struct AsymptoticReport {
    Regime regime = Regime::Unsupported;
    double theta_or_rb = 0.0; // decay base
    int period_used = 1;      // tau-prime, lcm of pole-angle denominators, or tau-hat
    int order = 1;            // 1, m_B, or m_B + 1

    std::vector<RealMatrix> prefactors;       // residue class l -> 1 x M row
    std::vector<Frac> pole_angles;            // pole regimes: angles zeta_n
    std::vector<ComplexMatrix> pole_weights;  // 1 x M rows aligned with pole_angles

    // Diagnostics.
    std::vector<std::complex<double>> c_values; // c(omega_tau^nu) or the s_m scalars
    std::vector<int> H;                         // kept residue exponents (theta < r_B)
    std::vector<Frac> P;                        // kept pole angles (theta = r_B)
    std::vector<std::string> warnings;
    std::vector<PoleExpansion> residue_rows;    // per-phase dominant-circle expansions
};

/// Case split on theta vs. r_B (equality within atrb_tol relative).
Regime classify_regime(const MG1Model& model, const SpectralProfile& spectral,
                       double atrb_tol = 1e-9);

/// Rank-one limit of (1 - z/(theta omega_tau^nu)) [I - Gamma_A*(z)]^{-1}:
///   Delta_M(omega^nu) v(theta) mu(theta) Delta_M(omega^nu)^{-1} / (delta' - 1).
ComplexMatrix residue_inverse_at(const MG1Model& model, const SpectralProfile& spectral, int nu);

/// Residue scalar of the tail transform at z = theta omega_tau^nu:
///   [x(0) B*(theta omega) - x(1) A(0)] Delta_M(omega) v(theta)
///     / ((theta omega - 1)(delta' - 1)).
std::complex<double> c_omega(const MG1Model& model, const SpectralProfile& spectral,
                             const FundamentalSet& fund, int nu);

struct BelowData {
    int tau_prime = 1;
    std::vector<RealMatrix> c_l; // l = 0..tau_prime-1
    std::vector<std::complex<double>> c_values;
    std::vector<int> H;
    std::vector<std::string> warnings;
};
/// Residues at all tau roots, the surviving exponent set, the refined period,
/// and the per-class positive prefactor rows.
BelowData prefactors_below(const MG1Model& model, const SpectralProfile& spectral,
                           const FundamentalSet& fund, double zero_tol = 1e-9);

struct AboveData {
    std::vector<Frac> angles;           // declared pole angles zeta_n
    std::vector<ComplexMatrix> weights; // x(0) W_n / (r_B zeta_n - 1) [I - Gamma_A*(r_B zeta_n)]^{-1}
};
AboveData prefactors_above(const MG1Model& model, const SpectralProfile& spectral,
                           const FundamentalSet& fund);

struct AtData {
    int tau_hat = 1;
    std::vector<RealMatrix> c_l; // l = 0..tau_hat-1
    std::vector<Frac> P;         // kept angles (intersection of the two pole sets)
    std::vector<std::complex<double>> s_values;
    std::vector<std::string> warnings;
};
AtData prefactors_at(const MG1Model& model, const SpectralProfile& spectral,
                     const FundamentalSet& fund, double zero_tol = 1e-9);

/// Full report for whatever regime applies.
AsymptoticReport analyze_asymptotics(const MG1Model& model, const SpectralProfile& spectral,
                                     const FundamentalSet& fund, double zero_tol = 1e-9,
                                     double atrb_tol = 1e-9);

/// Predicted x-bar(k) row from a report.
RealMatrix predict_tail(const AsymptoticReport& report, long long k);

} // namespace mg1
