#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mg1/model.hpp"

namespace mg1 {

/// Decay parameter, Perron eigendata, and period structure of the repeating
/// kernel.
struct SpectralProfile {
    std::optional<double> theta; // root of delta(A*(y)) = y on (1, r_A), if any
    double r_A = 0.0;            // may be +infinity
    double r_B = 0.0;            // may be +infinity
    double rho = 0.0;
    RealMatrix mu;               // 1 x M left Perron vector of Gamma_A*(theta); empty without theta
    RealMatrix v;                // M x 1 right Perron vector; mu e = 1, mu v = 1
    double delta_prime = 0.0;    // d/dy delta(A*(y)) at y = theta
    int tau = 0;                 // period of the displacement-labelled phase graph
    std::vector<int> offsets;    // phase -> residue in {0..tau-1}
};

/// delta(A*(y)): the Perron-Frobenius eigenvalue of A*(y).
double perron_curve(const MG1Model& model, double y);

/// Root of delta(A*(y)) = y on (1, r_A): geometric grid scan for a sign
/// change, bisection to relative tolerance tol, near-boundary probes before
/// giving up. Returns nullopt when the curve stays below the diagonal.
std::optional<double> find_theta(const MG1Model& model, double tol = 1e-12);

struct EigenTriple {
    RealMatrix mu;       // 1 x M, mu e = 1
    RealMatrix v;        // M x 1, mu v = 1
    double delta_prime;  // mu A*'(theta) v
};
/// Perron pair of Gamma_A*(theta) at eigenvalue 1 plus the curve slope via
/// the simple-eigenvalue perturbation identity.
EigenTriple eigen_at_theta(const MG1Model& model, double theta);

struct PeriodResult {
    int tau = 0;
    std::vector<int> offsets;
};
/// Period of the displacement-labelled support graph: spanning-tree potentials
/// phi, then the gcd of |w - (phi(j) - phi(i))| over all edges. Throws
/// PeriodUndefined when every cycle displacement vanishes.
PeriodResult madp_period(const std::vector<SupportEdge>& support);

/// |det(I - Gamma_A*(theta * e^{2 pi i / n}))| for n = 1..M: near zero exactly
/// when the period divides n-compatible roots; cross-checks the graph result.
std::vector<std::pair<int, double>> period_spectral_check(const MG1Model& model, double theta,
                                                          int tau);

/// Diagonal twist diag(omega^{-p(j)}) with omega = unit_root(angle); powers
/// are reduced exactly before evaluation.
ComplexMatrix delta_M(const std::vector<int>& offsets, const Frac& angle);
ComplexMatrix delta_M_inverse(const std::vector<int>& offsets, const Frac& angle);

/// One-call pipeline for the full profile.
SpectralProfile analyze_spectral(const MG1Model& model, double theta_tol = 1e-12);

} // namespace mg1
