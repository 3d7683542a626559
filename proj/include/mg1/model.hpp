#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mg1/linalg.hpp"
#include "mg1/rational.hpp"

namespace mg1 {

/// One pole of the boundary-kernel transform on its circle of convergence:
/// located at radius * unit_root(angle), with matrix residue weight.
struct BTailPole {
    Frac angle;           // fraction of a full turn, in [0, 1)
    ComplexMatrix weight; // M0 x M
};

/// Analytic continuation data for the boundary kernel: blocks beyond
/// start_index follow
///   B(k) = Sum_n weight_n * binom(k + order - 1, order - 1) * (conj(zeta_n)/radius)^k,
/// which makes B*(z) a rational function with poles of the given order at
/// radius * zeta_n.
struct BTailSpec {
    double radius = 0.0; // > 1
    int order = 1;       // >= 1
    int start_index = 0; // blocks k > start_index come from the closed form
    std::vector<BTailPole> poles;
};

/// Level-homogeneous upper block-Hessenberg chain:
///   level 0 row:   B0, B(1), B(2), ...
///   level 1 row:   C0, A(1), A(2), ...   (with A(0) governing the descent)
///   level n >= 2:  A(0) one step down, A(k) up k-1 levels.
struct MG1Model {
    int M = 0;  // repeating phase count
    int M0 = 0; // boundary phase count
    std::vector<RealMatrix> A;  // A[k] is M x M, k = 0..K_A
    RealMatrix B0;              // M0 x M0
    std::vector<RealMatrix> B;  // B[k] is M0 x M, k >= 1; B[0] is a zero placeholder
    RealMatrix C0;              // M x M0
    std::optional<GeometricTail> a_tail;
    std::optional<BTailSpec> b_tail;
};

/// First-moment data of the repeating part.
struct DriftProfile {
    RealMatrix pi;     // 1 x M, stationary vector of A = Sum_k A(k)
    RealMatrix beta_A; // M x 1, Sum_k k A(k) e
    RealMatrix beta_B; // M0 x 1, Sum_k k B(k) e
    double rho = 0.0;  // pi * beta_A
};

/// Directed phase-transition edge with its level displacement (k - 1 for a
/// block A(k)). Phases are 0-based.
struct SupportEdge {
    int i = 0;
    int j = 0;
    long long displacement = 0;
};

// ----- loading and validation ---------------------------------------------

/// Parses and fully validates a model from a JSON file.
MG1Model load_model(const std::string& path);

/// Parses a model from JSON text (strict: unknown fields and type mismatches
/// are rejected). Does not validate semantic invariants.
MG1Model parse_model(const std::string& json_text);

/// Checks every structural invariant: block shapes, nonnegativity,
/// stochasticity of A and of the boundary rows, C0 e = A(0) e, tail
/// coherence, conjugate closure of declared poles, irreducibility of A and
/// of the truncated level graph. Throws ValidationError on the first failure.
void validate_model(const MG1Model& model);

// ----- radii and block access ----------------------------------------------

/// Radius of convergence of A*(z); +infinity for finite support.
double radius_A(const MG1Model& model);
/// Radius of convergence of B*(z); +infinity for finite support.
double radius_B(const MG1Model& model);

/// A(k) for any k >= 0, evaluating the geometric tail beyond the stored head.
RealMatrix implied_A(const MG1Model& model, int k);
/// B(k) for any k >= 1, evaluating the pole closed form beyond the stored head.
RealMatrix implied_B(const MG1Model& model, int k);
/// Sum_{k>=1} B(k), tails in closed form.
RealMatrix b_total(const MG1Model& model);

// ----- transforms ----------------------------------------------------------

ComplexMatrix eval_A_star(const MG1Model& model, std::complex<double> z);
RealMatrix eval_A_star_real(const MG1Model& model, double y);
ComplexMatrix eval_A_star_derivative(const MG1Model& model, std::complex<double> z);
RealMatrix eval_A_star_derivative_real(const MG1Model& model, double y);

/// B*(z) = Sum_{k>=1} z^k B(k); excludes B0. With pole data this is evaluable
/// anywhere off the declared poles; throws AtPole within 1e-12 * radius of one.
ComplexMatrix eval_B_star(const MG1Model& model, std::complex<double> z);
RealMatrix eval_B_star_real(const MG1Model& model, double y);
RealMatrix eval_B_star_derivative_real(const MG1Model& model, double y);

/// Gamma_A*(z) = A*(z) / z.
ComplexMatrix eval_Gamma_A_star(const MG1Model& model, std::complex<double> z);
RealMatrix eval_Gamma_A_star_real(const MG1Model& model, double y);

// ----- drift and support ----------------------------------------------------

DriftProfile drift(const MG1Model& model);

/// Displacement-labelled support edges of the repeating kernel: one entry per
/// nonzero [A(k)]_{ij} with displacement k - 1. Tail coefficients contribute
/// their support at two consecutive representative displacements, which pins
/// the same gcd as the full infinite tail.
std::vector<SupportEdge> gamma_A_support(const MG1Model& model);

} // namespace mg1
