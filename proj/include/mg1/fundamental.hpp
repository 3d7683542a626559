#pragma once

#include <optional>
#include <vector>

#include "mg1/model.hpp"

namespace mg1 {

/// Whether a normal-form check treats the matrix as a one-step-down record
/// (recurrent class must be closed) or a one-step-up record (recurrent class
/// must be a source).
enum class StructureSubject { GMatrix, RMatrix };

enum class StructureForm { Irreducible, OneIrreduciblePlusTriangular };

/// Condensation of a nonnegative matrix into its admissible normal form:
/// either irreducible, or one irreducible class plus a strictly triangular
/// remainder.
struct StructureReport {
    StructureSubject subject = StructureSubject::GMatrix;
    StructureForm form = StructureForm::Irreducible;
    /// Partition of 0-based phases; the irreducible class comes first.
    std::vector<std::vector<int>> classes;
};

/// First-passage and stationary data of the chain.
struct FundamentalSet {
    RealMatrix G;                      // M x M first-passage matrix
    std::vector<RealMatrix> U;         // U[k], k = 0..k_top
    std::vector<RealMatrix> U0;        // U0[k], k = 1..k_top (index 0 is a zero placeholder)
    std::vector<RealMatrix> R;         // R[k], k = 0..k_top with R[0] = O
    std::vector<RealMatrix> R0;        // R0[k], k = 1..k_top (index 0 is a zero placeholder)
    std::optional<GeometricTail> u_tail; // U(k) = coeff * ratio^k for k > k_top
    RealMatrix Kmat;                   // M0 x M0 censored boundary kernel
    RealMatrix kappa;                  // 1 x M0 stationary vector of Kmat
    RealMatrix x0;                     // 1 x M0 boundary stationary row
    std::vector<RealMatrix> x;         // x[k] (1 x M), k = 1..k_levels (index 0 is a placeholder)
    RealMatrix g_vec;                  // 1 x M stationary vector of G
};

/// Minimal nonnegative solution of X = Sum_k A(k) X^k (tail in closed form),
/// by fixed-point iteration from X = O. Stops when successive iterates agree
/// entrywise within tol; iteration budget 10^6.
RealMatrix compute_G(const MG1Model& model, double tol = 1e-14);

/// Level kernels of the censored chain:
///   U(k)  = Sum_{m >= k+1} A(m) G^{m-k-1},
///   U0(k) = Sum_{m >= k}   B(m) G^{m-k},
///   R(k)  = U(k) (I - U(0))^{-1}   (R(0) = O),
///   R0(k) = U0(k) (I - U(0))^{-1},
/// computed by downward recurrence from closed-form seeds, for k <= k_max.
struct LevelKernels {
    std::vector<RealMatrix> U;
    std::vector<RealMatrix> U0;
    std::vector<RealMatrix> R;
    std::vector<RealMatrix> R0;
    std::optional<GeometricTail> u_tail;
};
LevelKernels compute_URR0(const MG1Model& model, const RealMatrix& G, int k_max);

/// Default stored depth: two levels past the longest stored block sequence.
int default_k_max(const MG1Model& model);

/// Censored boundary kernel K = B0 + U0(1)(I - U(0))^{-1} C0, its stationary
/// vector kappa, and the normalized boundary row x(0).
struct BoundaryData {
    RealMatrix Kmat;
    RealMatrix kappa;
    RealMatrix x0;
};
BoundaryData boundary_solve(const MG1Model& model, const RealMatrix& G,
                            const std::vector<RealMatrix>& U, const std::vector<RealMatrix>& U0);

/// Stationary rows x(1..k_levels) by the forward recursion
/// x(k) = x(0) R0(k) + Sum_{j=1}^{k-1} x(j) R(k-j).
std::vector<RealMatrix> ramaswami(const MG1Model& model, const FundamentalSet& fund,
                                  int k_levels);

/// pi_star = Sum_{k>=1} x(k) in closed form.
RealMatrix pi_star(const MG1Model& model, const FundamentalSet& fund);

/// R*(z) = Sum_{k>=1} z^k R(k), stored head plus closed-form tail.
ComplexMatrix R_star(const MG1Model& model, const FundamentalSet& fund, std::complex<double> z);
RealMatrix R_star_real(const MG1Model& model, const FundamentalSet& fund, double y);

/// || (I - Gamma_A*(z)) - (I - R*(z)) (I - U(0)) (I - G/z) ||_inf.
double rg_factorization_residual(const MG1Model& model, const FundamentalSet& fund,
                                 std::complex<double> z);

/// Classifies the support of a nonnegative square matrix into one of the two
/// admissible normal forms. Throws ShapeViolation otherwise.
StructureReport structure_normal_form(const RealMatrix& m, StructureSubject subject);

/// One-call pipeline: G, level kernels deep enough for k_levels, boundary
/// row, stationary rows, and the stationary vector of G.
FundamentalSet solve_fundamental(const MG1Model& model, int k_levels, double g_tol = 1e-14);

} // namespace mg1
