#include "mg1/fundamental.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mg1 {

namespace {

/// binom(k + m - 1, m - 1 - i) style coefficients for the closed-form seed of
/// the boundary level kernel.
double binom_double(long long top, int bottom) {
    if (bottom < 0) return 0.0;
    double b = 1.0;
    for (int i = 1; i <= bottom; ++i) b *= double(top - bottom + i) / double(i);
    return b;
}

RealMatrix inverse(const RealMatrix& m) {
    return solve_real(m, RealMatrix::identity(m.rows()));
}

ComplexMatrix inverse(const ComplexMatrix& m) {
    return solve_complex(m, ComplexMatrix::identity(m.rows()));
}

/// U0(k) for k beyond the stored boundary head, in closed form. Expanding
/// binom(k+j+m-1, m-1) by Vandermonde convolution turns the double series
/// Sum_j B(k+j) G^j into a finite sum of resolvent powers:
///   U0(k) = Re Sum_n W_n t_n^k Sum_{i=0}^{m-1} binom(k+m-1, m-1-i)
///                (t_n G)^i (I - t_n G)^{-(i+1)},   t_n = conj(zeta_n)/r_B.
RealMatrix u0_tail_closed(const MG1Model& model, const RealMatrix& G, int k) {
    const BTailSpec& spec = *model.b_tail;
    const int m = spec.order;
    ComplexMatrix acc(model.M0, model.M);
    const ComplexMatrix Gc = to_complex(G);
    for (const BTailPole& pole : spec.poles) {
        const std::complex<double> t = std::conj(unit_root(pole.angle)) / spec.radius;
        const ComplexMatrix tG = Gc * t;
        const ComplexMatrix resolvent = inverse(ComplexMatrix::identity(model.M) - tG);
        ComplexMatrix power = resolvent; // (tG)^i (I - tG)^{-(i+1)} at i = 0
        ComplexMatrix inner(model.M, model.M);
        for (int i = 0; i < m; ++i) {
            inner += power * std::complex<double>(binom_double(k + m - 1, m - 1 - i));
            if (i + 1 < m) power = power * (tG * resolvent);
        }
        acc += (pole.weight * inner) * std::pow(t, k);
    }
    return real_part(acc);
}

} // namespace

// ----- G ---------------------------------------------------------------------

RealMatrix compute_G(const MG1Model& model, double tol) {
    const int M = model.M;
    auto step = [&](const RealMatrix& X) {
        // Horner evaluation of Sum_k A(k) X^k (matrix powers multiply on the right).
        RealMatrix next = model.A.back();
        for (int k = static_cast<int>(model.A.size()) - 2; k >= 0; --k)
            next = model.A[k] + next * X;
        if (model.a_tail) {
            // Sum_{k > K} coeff ratio^k X^k = coeff (rX)^{K+1} (I - rX)^{-1}.
            const double r = model.a_tail->ratio;
            const RealMatrix rX = X * r;
            RealMatrix power = RealMatrix::identity(M); // becomes (rX)^{K+1}
            for (int k = 0; k <= model.a_tail->start_index; ++k) power = power * rX;
            next += model.a_tail->coeff * (power * inverse(RealMatrix::identity(M) - rX));
        }
        return next;
    };
    auto max_diff = [M](const RealMatrix& a, const RealMatrix& b) {
        double diff = 0.0;
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) diff = std::max(diff, std::abs(a(i, j) - b(i, j)));
        return diff;
    };
    RealMatrix X(M, M);
    const long budget = 1000000;
    double diff = std::numeric_limits<double>::infinity();
    for (long it = 0; it < budget && diff >= tol; ++it) {
        RealMatrix next = step(X);
        diff = max_diff(next, X);
        X = std::move(next);
    }
    if (diff >= tol) throw NoConvergence("first-passage iteration exhausted its budget");
    // Polish: extra iterations are cheap and sharpen X to float granularity.
    // Each step must strictly shrink the update, so this always terminates.
    while (diff > 0.0) {
        RealMatrix next = step(X);
        const double d = max_diff(next, X);
        if (d >= diff) break;
        X = std::move(next);
        diff = d;
    }
    return X;
}

// ----- level kernels ------------------------------------------------------------

int default_k_max(const MG1Model& model) {
    const int top_A = static_cast<int>(model.A.size()) - 1;
    const int top_B = static_cast<int>(model.B.size()) - 1;
    return std::max(top_A, top_B) + 2;
}

LevelKernels compute_URR0(const MG1Model& model, const RealMatrix& G, int k_max) {
    const int M = model.M;
    // Store at least one level past the analytic-tail start so that the
    // geometric description of U(k) beyond the stored head is exact.
    if (model.a_tail) k_max = std::max(k_max, model.a_tail->start_index + 1);
    LevelKernels out;

    // --- U(k): seed at a depth where the closed form (or zero) is exact.
    const int top_A = static_cast<int>(model.A.size()) - 1;
    RealMatrix u_coeff; // U(k) = u_coeff * ratio^k beyond the head
    int seed_U;
    if (model.a_tail) {
        const double r = model.a_tail->ratio;
        u_coeff = (model.a_tail->coeff * r) * inverse(RealMatrix::identity(M) - G * r);
        seed_U = std::max(k_max + 1, model.a_tail->start_index);
    } else {
        seed_U = std::max(k_max + 1, top_A); // U(k) = O for k >= top_A
    }
    std::vector<RealMatrix> U(seed_U + 1, RealMatrix(M, M));
    if (model.a_tail) U[seed_U] = u_coeff * std::pow(model.a_tail->ratio, seed_U);
    for (int k = seed_U - 1; k >= 0; --k) U[k] = implied_A(model, k + 1) + U[k + 1] * G;
    U.resize(k_max + 1);
    out.U = std::move(U);
    if (model.a_tail) {
        GeometricTail tail;
        tail.start_index = k_max;
        tail.ratio = model.a_tail->ratio;
        tail.coeff = u_coeff;
        out.u_tail = tail;
    }

    // --- U0(k): same downward recurrence with the boundary head and seed.
    const int top_B = static_cast<int>(model.B.size()) - 1;
    int seed_U0;
    if (model.b_tail)
        seed_U0 = std::max(k_max + 1, model.b_tail->start_index + 1);
    else
        seed_U0 = std::max(k_max + 1, top_B + 1); // U0(k) = O for k > top_B
    std::vector<RealMatrix> U0(seed_U0 + 1, RealMatrix(model.M0, M));
    if (model.b_tail) U0[seed_U0] = u0_tail_closed(model, G, seed_U0);
    for (int k = seed_U0 - 1; k >= 1; --k) U0[k] = implied_B(model, k) + U0[k + 1] * G;
    U0.resize(k_max + 1);
    out.U0 = std::move(U0);

    // --- R(k) and R0(k).
    const RealMatrix inv_iu0 = inverse(RealMatrix::identity(M) - out.U[0]);
    out.R.assign(k_max + 1, RealMatrix(M, M));
    out.R0.assign(k_max + 1, RealMatrix(model.M0, M));
    for (int k = 1; k <= k_max; ++k) {
        out.R[k] = out.U[k] * inv_iu0;
        out.R0[k] = out.U0[k] * inv_iu0;
    }
    return out;
}

// ----- boundary -------------------------------------------------------------------

BoundaryData boundary_solve(const MG1Model& model, const RealMatrix& G,
                            const std::vector<RealMatrix>& U, const std::vector<RealMatrix>& U0) {
    const int M = model.M;
    const RealMatrix inv_iu0 = inverse(RealMatrix::identity(M) - U[0]);

    BoundaryData out;
    out.Kmat = model.B0 + U0[1] * (inv_iu0 * model.C0);
    out.kappa = stationary_vector(out.Kmat);

    const DriftProfile prof = drift(model);
    if (prof.rho >= 1.0)
        throw ValidationError("model is unstable (rho >= 1)", prof.rho - 1.0);

    // Normalization constant of the boundary row:
    //   x(0) = kappa / (1 + kappa/(1-rho) { beta_B + (B - Sum_k B(k) G^k) [I - A + e pi]^{-1} beta_A }),
    // with Sum_k B(k) G^k = U0(1) G.
    const RealMatrix b_sum = b_total(model);
    const RealMatrix middle = b_sum - U0[1] * G;
    const RealMatrix a_sum = eval_A_star_real(model, 1.0);
    const RealMatrix core = RealMatrix::identity(M) - a_sum + ones(M) * prof.pi;
    const RealMatrix solved = solve_real(core, prof.beta_A); // M x 1
    const RealMatrix inner = prof.beta_B + middle * solved;  // M0 x 1
    const double scalar = (out.kappa * inner)(0, 0) / (1.0 - prof.rho);
    out.x0 = out.kappa * (1.0 / (1.0 + scalar));
    return out;
}

std::vector<RealMatrix> ramaswami(const MG1Model& model, const FundamentalSet& fund,
                                  int k_levels) {
    if (static_cast<int>(fund.R.size()) <= k_levels || static_cast<int>(fund.R0.size()) <= k_levels)
        throw std::invalid_argument("ramaswami: stored level kernels are too shallow");
    std::vector<RealMatrix> x(k_levels + 1, RealMatrix(1, model.M));
    for (int k = 1; k <= k_levels; ++k) {
        RealMatrix row = fund.x0 * fund.R0[k];
        for (int j = 1; j < k; ++j) row += x[j] * fund.R[k - j];
        x[k] = std::move(row); // R(0) = O, so the j = k term vanishes
    }
    return x;
}

RealMatrix pi_star(const MG1Model& model, const FundamentalSet& fund) {
    if (fund.x.size() < 2) throw std::invalid_argument("pi_star: x(1) not available");
    const DriftProfile prof = drift(model);
    const RealMatrix b_sum = b_total(model);
    const RealMatrix lhs =
        fund.x0 * (b_sum + prof.beta_B * fund.g_vec) - fund.x[1] * model.A[0];
    const RealMatrix core = RealMatrix::identity(model.M) - eval_A_star_real(model, 1.0) +
                            (ones(model.M) - prof.beta_A) * fund.g_vec;
    // Solve pi_star * core = lhs.
    return solve_real(core.transpose(), lhs.transpose()).transpose();
}

// ----- transforms of the level kernels ----------------------------------------------

namespace {

template <typename T>
Matrix<T> r_star_impl(const MG1Model& model, const FundamentalSet& fund, T z) {
    const int M = model.M;
    Matrix<T> acc(M, M);
    // Horner over the stored head Sum_{k>=1} U(k) z^k.
    const int top = static_cast<int>(fund.U.size()) - 1;
    for (int k = top; k >= 1; --k) {
        Matrix<T> blk(M, M);
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) blk(i, j) = T(fund.U[k](i, j));
        acc = acc * z + blk;
    }
    acc = acc * z;
    if (fund.u_tail) {
        const T t = z * T(fund.u_tail->ratio);
        if (std::abs(t) >= 1.0)
            throw OutsideRadius("level-kernel transform argument at or beyond its radius");
        const T factor = std::pow(t, fund.u_tail->start_index + 1) / (T(1) - t);
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) acc(i, j) += T(fund.u_tail->coeff(i, j)) * factor;
    }
    // Right factor (I - U(0))^{-1}.
    RealMatrix iu0 = RealMatrix::identity(M) - fund.U[0];
    Matrix<T> iu0_t(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) iu0_t(i, j) = T(iu0(i, j));
    if constexpr (std::is_same_v<T, double>)
        return acc * inverse(iu0);
    else
        return acc * inverse(to_complex(iu0));
}

} // namespace

ComplexMatrix R_star(const MG1Model& model, const FundamentalSet& fund, std::complex<double> z) {
    return r_star_impl<std::complex<double>>(model, fund, z);
}

RealMatrix R_star_real(const MG1Model& model, const FundamentalSet& fund, double y) {
    return r_star_impl<double>(model, fund, y);
}

double rg_factorization_residual(const MG1Model& model, const FundamentalSet& fund,
                                 std::complex<double> z) {
    const int M = model.M;
    const ComplexMatrix eye = ComplexMatrix::identity(M);
    const ComplexMatrix lhs = eye - eval_Gamma_A_star(model, z);
    const ComplexMatrix left = eye - R_star(model, fund, z);
    const ComplexMatrix mid = to_complex(RealMatrix::identity(M) - fund.U[0]);
    const ComplexMatrix right = eye - to_complex(fund.G) * (std::complex<double>(1.0) / z);
    return (lhs - left * mid * right).norm_inf();
}

// ----- structure ---------------------------------------------------------------------

StructureReport structure_normal_form(const RealMatrix& m, StructureSubject subject) {
    if (!m.square()) throw std::invalid_argument("structure_normal_form: matrix must be square");
    const int n = m.rows();
    const double threshold = std::max(1e-14 * m.norm_inf(), 1e-300);
    std::vector<std::vector<int>> adj(n), radj(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(m(i, j)) > threshold) {
                adj[i].push_back(j);
                radj[j].push_back(i);
            }

    // Kosaraju: order by finish time, then peel components on the reverse graph.
    std::vector<int> order;
    order.reserve(n);
    std::vector<char> seen(n, 0);
    for (int s = 0; s < n; ++s) {
        if (seen[s]) continue;
        // Iterative DFS with an explicit edge cursor.
        std::vector<std::pair<int, std::size_t>> stack{{s, 0}};
        seen[s] = 1;
        while (!stack.empty()) {
            auto& [u, cursor] = stack.back();
            if (cursor < adj[u].size()) {
                const int v = adj[u][cursor++];
                if (!seen[v]) {
                    seen[v] = 1;
                    stack.emplace_back(v, 0);
                }
            } else {
                order.push_back(u);
                stack.pop_back();
            }
        }
    }
    std::vector<int> comp(n, -1);
    int n_comp = 0;
    for (int idx = n - 1; idx >= 0; --idx) {
        const int s = order[idx];
        if (comp[s] >= 0) continue;
        std::vector<int> stack{s};
        comp[s] = n_comp;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : radj[u])
                if (comp[v] < 0) {
                    comp[v] = n_comp;
                    stack.push_back(v);
                }
        }
        ++n_comp;
    }

    std::vector<std::vector<int>> members(n_comp);
    for (int i = 0; i < n; ++i) members[comp[i]].push_back(i);
    auto has_self_loop = [&](int c) {
        for (int i : members[c])
            for (int j : adj[i])
                if (j == i) return true;
        return false;
    };

    std::vector<int> nontrivial;
    for (int c = 0; c < n_comp; ++c)
        if (members[c].size() >= 2 || has_self_loop(c)) nontrivial.push_back(c);

    StructureReport report;
    report.subject = subject;
    if (nontrivial.size() != 1)
        throw ShapeViolation(nontrivial.empty()
                                 ? "support graph has no recurrent class"
                                 : "support graph has more than one recurrent class");
    const int rec = nontrivial.front();

    if (n_comp == 1) {
        report.form = StructureForm::Irreducible;
        report.classes = {members[rec]};
        return report;
    }

    // The irreducible class must be closed (no edges leaving it) when the
    // matrix records downward passage, and a source (no edges entering it)
    // when it records upward expansion; the remaining trivial classes are
    // strictly triangular in any topological order.
    for (int i = 0; i < n; ++i)
        for (int j : adj[i]) {
            if (subject == StructureSubject::GMatrix && comp[i] == rec && comp[j] != rec)
                throw ShapeViolation("recurrent class is not closed");
            if (subject == StructureSubject::RMatrix && comp[j] == rec && comp[i] != rec)
                throw ShapeViolation("recurrent class is not a source");
        }

    report.form = StructureForm::OneIrreduciblePlusTriangular;
    report.classes.push_back(members[rec]);
    for (int c = 0; c < n_comp; ++c)
        if (c != rec) report.classes.push_back(members[c]);
    return report;
}

// ----- pipeline -----------------------------------------------------------------------

FundamentalSet solve_fundamental(const MG1Model& model, int k_levels, double g_tol) {
    FundamentalSet fund;
    fund.G = compute_G(model, g_tol);
    const int k_max = std::max(default_k_max(model), k_levels + 1);
    LevelKernels kernels = compute_URR0(model, fund.G, k_max);
    fund.U = std::move(kernels.U);
    fund.U0 = std::move(kernels.U0);
    fund.R = std::move(kernels.R);
    fund.R0 = std::move(kernels.R0);
    fund.u_tail = kernels.u_tail;
    BoundaryData boundary = boundary_solve(model, fund.G, fund.U, fund.U0);
    fund.Kmat = std::move(boundary.Kmat);
    fund.kappa = std::move(boundary.kappa);
    fund.x0 = std::move(boundary.x0);
    fund.g_vec = stationary_vector(fund.G);
    fund.x = ramaswami(model, fund, k_levels);
    return fund;
}

} // namespace mg1
