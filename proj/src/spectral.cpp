#include "mg1/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mg1/errors.hpp"

namespace mg1 {

double perron_curve(const MG1Model& model, double y) {
    if (y <= 0.0) throw std::invalid_argument("perron_curve: y must be positive");
    return perron_pair(eval_A_star_real(model, y)).value;
}

std::optional<double> find_theta(const MG1Model& model, double tol) {
    const double r_A = radius_A(model);
    const bool bounded = std::isfinite(r_A);
    // f(y) = delta(A*(y)) - y vanishes at y = 1 with negative slope rho - 1,
    // and is convex in log y, so the first sign change brackets the root.
    auto f = [&](double y) { return perron_curve(model, y) - y; };

    std::vector<double> probes;
    const double grid_top = bounded ? std::min(1e6, r_A * (1.0 - 1e-6)) : 1e6;
    const double step = std::log(grid_top) / 64.0;
    for (int i = 1; i <= 64; ++i) probes.push_back(std::exp(i * step));
    if (bounded) {
        // Near-boundary probes: the curve may cross arbitrarily close to r_A.
        for (int j = 1; j <= 40; ++j) {
            const double y = r_A * (1.0 - std::pow(2.0, -j));
            if (y > 1.0) probes.push_back(y);
        }
        std::sort(probes.begin(), probes.end());
        probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
    }

    double lo = 1.0;
    for (double y : probes) {
        if (y <= lo) continue;
        const double fy = f(y);
        if (fy > 0.0) {
            double hi = y;
            while (hi - lo > tol * hi) {
                const double mid = 0.5 * (lo + hi);
                if (f(mid) > 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            double root = 0.5 * (lo + hi);
            // Newton polish: the bisected root is accurate to `tol`; a couple
            // of steps with the analytic slope sharpen it to float accuracy,
            // which keeps the error of every downstream residue negligible.
            for (int step_i = 0; step_i < 3; ++step_i) {
                const EigenTriple e = eigen_at_theta(model, root);
                const double slope = e.delta_prime - 1.0;
                if (std::abs(slope) < 1e-8) break;
                const double next = root - (perron_curve(model, root) - root) / slope;
                if (!(next > lo - (hi - lo) && next < hi + (hi - lo)) || !(next > 1.0)) break;
                if (bounded && next >= r_A) break;
                if (next == root) break;
                root = next;
            }
            return root;
        }
        lo = y;
    }
    return std::nullopt;
}

EigenTriple eigen_at_theta(const MG1Model& model, double theta) {
    const PerronPair pair = perron_pair(eval_Gamma_A_star_real(model, theta));
    EigenTriple out;
    out.mu = pair.left;
    out.v = pair.right;
    out.delta_prime = (pair.left * (eval_A_star_derivative_real(model, theta) * pair.right))(0, 0);
    return out;
}

PeriodResult madp_period(const std::vector<SupportEdge>& support) {
    int n = 0;
    for (const SupportEdge& e : support) n = std::max({n, e.i + 1, e.j + 1});
    if (n == 0) throw std::invalid_argument("madp_period: empty support");

    // Potentials from a spanning tree, crossing directed edges both ways.
    std::vector<std::vector<std::pair<int, long long>>> undirected(n);
    for (const SupportEdge& e : support) {
        undirected[e.i].push_back({e.j, e.displacement});
        undirected[e.j].push_back({e.i, -e.displacement});
    }
    std::vector<long long> phi(n, 0);
    std::vector<char> seen(n, 0);
    std::vector<int> queue{0};
    seen[0] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int u = queue[head];
        for (const auto& [v, w] : undirected[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                phi[v] = phi[u] + w;
                queue.push_back(v);
            }
        }
    }
    for (int i = 0; i < n; ++i)
        if (!seen[i])
            throw std::invalid_argument("madp_period: support graph is not connected");

    long long d = 0;
    for (const SupportEdge& e : support)
        d = std::gcd(d, std::llabs(e.displacement - (phi[e.j] - phi[e.i])));
    if (d == 0)
        throw PeriodUndefined("all cycle displacements vanish; no additive period exists");

    PeriodResult out;
    out.tau = static_cast<int>(d);
    out.offsets.resize(n);
    for (int i = 0; i < n; ++i) {
        long long r = phi[i] % d;
        if (r < 0) r += d;
        out.offsets[i] = static_cast<int>(r);
    }
    return out;
}

std::vector<std::pair<int, double>> period_spectral_check(const MG1Model& model, double theta,
                                                          int /*tau*/) {
    std::vector<std::pair<int, double>> out;
    const ComplexMatrix eye = ComplexMatrix::identity(model.M);
    for (int n = 1; n <= model.M; ++n) {
        const std::complex<double> z = theta * unit_root(1, n);
        const double mag = std::abs(lu_det_complex(eye - eval_Gamma_A_star(model, z)));
        out.push_back({n, mag});
    }
    return out;
}

ComplexMatrix delta_M(const std::vector<int>& offsets, const Frac& angle) {
    const int n = static_cast<int>(offsets.size());
    ComplexMatrix d(n, n);
    for (int j = 0; j < n; ++j) d(j, j) = unit_root(angle.times(-offsets[j]));
    return d;
}

ComplexMatrix delta_M_inverse(const std::vector<int>& offsets, const Frac& angle) {
    const int n = static_cast<int>(offsets.size());
    ComplexMatrix d(n, n);
    for (int j = 0; j < n; ++j) d(j, j) = unit_root(angle.times(offsets[j]));
    return d;
}

SpectralProfile analyze_spectral(const MG1Model& model, double theta_tol) {
    SpectralProfile profile;
    profile.r_A = radius_A(model);
    profile.r_B = radius_B(model);
    profile.rho = drift(model).rho;
    profile.theta = find_theta(model, theta_tol);
    if (profile.theta) {
        const EigenTriple triple = eigen_at_theta(model, *profile.theta);
        profile.mu = triple.mu;
        profile.v = triple.v;
        profile.delta_prime = triple.delta_prime;
    }
    const PeriodResult period = madp_period(gamma_A_support(model));
    profile.tau = period.tau;
    profile.offsets = period.offsets;
    return profile;
}

} // namespace mg1
